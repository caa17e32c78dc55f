import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mismatch_qpt import Displacement, gram, overlap
from mismatch_qpt.errors import DimensionMismatchError, ValidationError
from mismatch_qpt.wavepacket import reduce_to_scalar

import oracles

finite = st.floats(min_value=-5.0, max_value=5.0, allow_nan=False)


def test_overlap_unit_shift():
    # |a - b| = 1 pins the convention: exp(-1/4)
    assert overlap(Displacement.scalar(0.0), Displacement.scalar(1.0)) == pytest.approx(
        math.exp(-0.25), abs=1e-15
    )


def test_overlap_identity_and_symmetry():
    a = Displacement((0.3, -1.2))
    b = Displacement((-0.5, 0.8))
    assert overlap(a, a) == 1.0
    assert overlap(a, b) == overlap(b, a)


def test_overlap_matches_numerical_integration():
    pairs = [
        (Displacement.scalar(0.0), Displacement.scalar(1.0)),
        (Displacement.scalar(-0.7), Displacement.scalar(2.1)),
        (Displacement((0.5, -0.3, 1.1)), Displacement((-0.2, 0.4, 0.9))),
    ]
    for a, b in pairs:
        num = oracles.overlap_quad(a.components, b.components)
        assert overlap(a, b) == pytest.approx(num, abs=1e-9)


def test_reduce_to_scalar_preserves_origin_overlap():
    d = Displacement((0.6, -0.8))
    zero2 = Displacement.zero(2)
    zero1 = Displacement.zero(1)
    r = reduce_to_scalar(d)
    assert r.dim == 1
    assert overlap(r, zero1) == pytest.approx(overlap(d, zero2), abs=1e-15)


def test_displacement_validation():
    with pytest.raises(ValidationError):
        Displacement(())
    with pytest.raises(ValidationError):
        Displacement((float("nan"),))
    with pytest.raises(DimensionMismatchError):
        overlap(Displacement.zero(1), Displacement.zero(2))
    with pytest.raises(DimensionMismatchError):
        Displacement.scalar(1.0) + Displacement.zero(2)


def test_displacement_arithmetic():
    a = Displacement((1.0, 2.0))
    b = Displacement((0.5, -1.0))
    assert (a + b).components == (1.5, 1.0)
    assert (a - b).components == (0.5, 3.0)
    assert (-a).components == (-1.0, -2.0)
    assert a.magnitude() == pytest.approx(math.sqrt(5.0))


def test_gram_matches_pairwise_overlap():
    labels = [Displacement.scalar(v) for v in (0.0, 0.4, -1.3, 2.2)]
    g = gram(labels)
    assert g.dim == 4
    for i, a in enumerate(labels):
        for j, b in enumerate(labels):
            assert g.entries[i, j] == pytest.approx(overlap(a, b), abs=1e-15)


def test_gram_rejects_empty_and_mixed_dims():
    with pytest.raises(ValidationError):
        gram([])
    with pytest.raises(DimensionMismatchError):
        gram([Displacement.zero(1), Displacement.zero(2)])


@given(a=finite, b=finite, c=finite)
@settings(max_examples=50, deadline=None)
def test_overlap_range_and_translation_invariance(a, b, c):
    da, db = Displacement.scalar(a), Displacement.scalar(b)
    v = overlap(da, db)
    assert 0.0 < v <= 1.0
    shifted = overlap(
        Displacement.scalar(a + c), Displacement.scalar(b + c)
    )
    assert shifted == pytest.approx(v, rel=1e-12, abs=1e-15)
