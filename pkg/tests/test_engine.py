import numpy as np
import pytest

from mismatch_qpt import (
    available_backends,
    build_cnot,
    evolve,
    measurement_settings,
    model,
    outcome_probability,
    post_selected,
    prepare_input,
    using,
)
from mismatch_qpt.circuit import ROW_LABELS, apply_elements
from mismatch_qpt.engine import tau_array
from mismatch_qpt.errors import ValidationError

Z_COLS = ("00", "01", "10", "11")
X_COLS = ("++", "+-", "-+", "--")


def slow_matrix(taus) -> np.ndarray:
    """Reference 8x8 matrix via direct per-input, per-setting evolution."""
    circuit = build_cnot(taus)
    out = np.zeros((8, 8))
    for r, label in enumerate(ROW_LABELS):
        state = post_selected(circuit, evolve(circuit, prepare_input(label)))
        for c, col in enumerate(Z_COLS + X_COLS):
            setting = measurement_settings(col)
            probe = apply_elements(state, setting.elements)
            out[r, c] = outcome_probability(probe, *setting.detectors)
    for block in (slice(0, 4), slice(4, 8)):
        out[:, block] /= out[:, block].sum(axis=1, keepdims=True)
    return out


def test_entries_match_slow_path_at_zero():
    np.testing.assert_allclose(
        model().meas_entries((0.0,) * 5), slow_matrix((0.0,) * 5), atol=1e-12
    )


def test_entries_match_slow_path_random_taus():
    rng = np.random.default_rng(7)
    for _ in range(3):
        taus = rng.uniform(-1.5, 1.5, 5)
        np.testing.assert_allclose(
            model().meas_entries(taus), slow_matrix(tuple(taus)), atol=1e-10
        )


def test_block_sums_and_range():
    rng = np.random.default_rng(3)
    for _ in range(5):
        m = model().meas_entries(rng.uniform(-2.0, 2.0, 5))
        assert m.min() >= 0.0 and m.max() <= 1.0
        np.testing.assert_allclose(m[:, :4].sum(axis=1), 1.0, atol=1e-12)
        np.testing.assert_allclose(m[:, 4:].sum(axis=1), 1.0, atol=1e-12)


def test_tau1_tau5_invisible_in_computational_block():
    base = model().meas_entries((0.0, 0.3, -0.4, 0.2, 0.0))
    for t1 in (-2.0, 0.7, 1.5):
        for t5 in (-1.1, 0.4, 2.0):
            m = model().meas_entries((t1, 0.3, -0.4, 0.2, t5))
            np.testing.assert_allclose(m[:4, :4], base[:4, :4], atol=1e-10)


def test_tau2_invisible_for_control_zero_rows():
    base = model().meas_entries((0.1, 0.0, -0.4, 0.2, -0.3))
    for t2 in (-2.0, 0.5, 1.3):
        m = model().meas_entries((0.1, t2, -0.4, 0.2, -0.3))
        np.testing.assert_allclose(m[:2, :], base[:2, :], atol=1e-10)


def test_backend_equivalence():
    backends = available_backends()
    if len(backends) < 2:
        pytest.skip("only one backend available")
    rng = np.random.default_rng(11)
    taus = rng.uniform(-1.0, 1.0, 5)
    results = {}
    for name in backends:
        with using(name):
            results[name] = model().meas_entries(taus)
    ref = results[backends[0]]
    for name in backends[1:]:
        np.testing.assert_allclose(results[name], ref, atol=1e-14)


def test_density_trace_matches_block_success():
    # unnormalized two-qubit density: trace equals the Z-block success
    taus = (0.2, -0.4, 0.3, -0.1, 0.25)
    rho = model().density("1", "1", tau_array(taus))
    circuit = build_cnot(taus)
    state = post_selected(circuit, evolve(circuit, prepare_input("11")))
    succ = sum(
        outcome_probability(state, a, b)
        for a in ("c0", "c1")
        for b in ("t0", "t1")
    )
    assert np.trace(rho).real == pytest.approx(succ, abs=1e-12)
    assert abs(np.trace(rho).imag) < 1e-14
    np.testing.assert_allclose(rho, rho.conj().T, atol=1e-12)


def test_tau_array_validation():
    with pytest.raises(ValidationError):
        tau_array((1.0, 2.0))
    with pytest.raises(ValidationError):
        tau_array((np.nan, 0, 0, 0, 0))
    np.testing.assert_array_equal(tau_array((1, 2, 3, 4, 5)), np.arange(1.0, 6.0))
