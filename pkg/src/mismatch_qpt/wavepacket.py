"""Photon wavepacket displacement labels and their Gaussian overlaps.

Every photon wavepacket is a unit-bandwidth Gaussian, psi(k) =
pi**(-1/4) * exp(-k**2 / 2), shifted by a displacement label.  Under this
fixed convention the overlap of two labels a and b is

    <a|b> = exp(-|a - b|**2 / 4)

which is the only quantity the rest of the package ever consumes.  All
displacement magnitudes are therefore expressed in units of inverse photon
bandwidth; choosing a different wavepacket shape or width would rescale
every displacement value (and any fidelity quoted for specific values)
without changing the structure of the model.

Labels default to a single component.  Multi-component labels exist so the
rotational-invariance property of the overlap can be exercised directly;
``reduce_to_scalar`` maps any of them onto the equivalent single component.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatchError, ValidationError

__all__ = ["Displacement", "OverlapGram", "overlap", "reduce_to_scalar", "gram"]


@dataclass(frozen=True)
class Displacement:
    """A mode-mismatch shift of a photon wavepacket.

    ``components`` holds one real number per photon degree of freedom, in
    units of inverse photon bandwidth.  Instances are immutable and usable
    as dict keys, which the state machinery relies on when merging
    physically identical terms.
    """

    components: tuple[float, ...] = (0.0,)

    def __post_init__(self):
        comps = tuple(float(c) for c in self.components)
        if not comps:
            raise ValidationError("displacement needs at least one component")
        if not all(math.isfinite(c) for c in comps):
            raise ValidationError(f"non-finite displacement components: {comps}")
        object.__setattr__(self, "components", comps)

    @classmethod
    def scalar(cls, value: float) -> "Displacement":
        return cls((float(value),))

    @classmethod
    def zero(cls, dim: int = 1) -> "Displacement":
        return cls((0.0,) * dim)

    @property
    def dim(self) -> int:
        return len(self.components)

    def magnitude(self) -> float:
        return math.sqrt(sum(c * c for c in self.components))

    def __add__(self, other: "Displacement") -> "Displacement":
        _check_dims(self, other)
        return Displacement(tuple(a + b for a, b in zip(self.components, other.components)))

    def __sub__(self, other: "Displacement") -> "Displacement":
        _check_dims(self, other)
        return Displacement(tuple(a - b for a, b in zip(self.components, other.components)))

    def __neg__(self) -> "Displacement":
        return Displacement(tuple(-c for c in self.components))

    def as_array(self) -> np.ndarray:
        return np.array(self.components, dtype=float)


def _check_dims(a: Displacement, b: Displacement) -> None:
    if a.dim != b.dim:
        raise DimensionMismatchError(
            f"displacement dimensionality mismatch: {a.dim} vs {b.dim}"
        )


def overlap(a: Displacement, b: Displacement) -> float:
    """Inner product of two displaced wavepackets, in [0, 1].

    Symmetric, translation invariant and rotation invariant; equals 1 only
    for identical labels and decays as exp(-|a-b|**2 / 4).
    """
    _check_dims(a, b)
    d2 = sum((x - y) ** 2 for x, y in zip(a.components, b.components))
    return math.exp(-0.25 * d2)


def reduce_to_scalar(d: Displacement) -> Displacement:
    """Collapse a multi-component displacement onto one degree of freedom.

    The overlap against the origin is preserved exactly: only the Euclidean
    magnitude of a displacement is observable, so a single component of
    that magnitude is an equivalent label.
    """
    return Displacement((d.magnitude(),))


@dataclass(frozen=True, eq=False)
class OverlapGram:
    """Square matrix of pairwise label overlaps.

    Symmetric with unit diagonal, and positive semidefinite because the
    entries are genuine inner products (eigenvalues above -1e-12 are
    accepted as zero round-off).
    """

    entries: np.ndarray

    def __post_init__(self):
        g = self.entries
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ValidationError(f"gram matrix must be square, got shape {g.shape}")
        if not np.allclose(g, g.T, atol=1e-12):
            raise ValidationError("gram matrix not symmetric")
        if not np.allclose(np.diag(g), 1.0, atol=1e-12):
            raise ValidationError("gram matrix diagonal departs from 1")
        if np.linalg.eigvalsh(g).min() < -1e-12:
            raise ValidationError("gram matrix not positive semidefinite")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


def gram(labels: Sequence[Displacement] | Iterable[Displacement]) -> OverlapGram:
    """Overlap Gram matrix for a list of displacement labels."""
    labels = list(labels)
    if not labels:
        raise ValidationError("gram of an empty label list")
    dim = labels[0].dim
    for lab in labels[1:]:
        if lab.dim != dim:
            raise DimensionMismatchError(
                f"displacement dimensionality mismatch: {dim} vs {lab.dim}"
            )
    pts = np.array([lab.components for lab in labels], dtype=float)
    diff = pts[:, None, :] - pts[None, :, :]
    g = np.exp(-0.25 * np.sum(diff * diff, axis=-1))
    # exact symmetry and unit diagonal, independent of round-off
    g = 0.5 * (g + g.T)
    np.fill_diagonal(g, 1.0)
    return OverlapGram(g)
