"""Two-photon states over named spatial modes, with displacement labels.

A state is a superposition of creation-operator products,

    |psi> = sum_p amp_p * a([m1_p, l1_p]) * a([m2_p, l2_p]) |vac>

where each photon carries a spatial mode id and a wavepacket displacement
label.  Amplitudes are the coefficients of the canonically ordered operator
product itself, so a double-occupied mode with equal labels is stored once
and its squared norm picks up the bosonic factor of two through the
exchange term of the inner product:

    <q|p> = O(p1,q1)*O(p2,q2) + O(p1,q2)*O(p2,q1)

with O((m,l),(m',l')) = delta(m, m') * overlap(l, l').  This one formula
covers single occupancy, double occupancy and partial distinguishability
uniformly; the normalized two-photon Fock state of one mode corresponds to
amplitude 1/sqrt(2).

States are immutable values; every operation returns a new state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import math

import numpy as np

from .errors import ModeError, NumericalError, ValidationError
from .wavepacket import Displacement, gram

__all__ = [
    "Photon",
    "PathTerm",
    "TwoPhotonState",
    "two_photon_state",
    "pair_state",
    "apply_beamsplitter",
    "apply_taubox",
    "apply_phase",
    "post_select",
    "norm",
    "outcome_probability",
]

# a photon is (mode id, displacement label)
Photon = tuple[str, Displacement]

NEGATIVE_NORM_TOL = 1e-12


def _sort_key(p: Photon):
    return (p[0], p[1].components)


def _canonical(a: Photon, b: Photon) -> tuple[Photon, Photon]:
    return (a, b) if _sort_key(a) <= _sort_key(b) else (b, a)


@dataclass(frozen=True)
class PathTerm:
    """One creation-operator product with its complex coefficient."""

    amp: complex
    photons: tuple[Photon, Photon]

    def __post_init__(self):
        object.__setattr__(self, "amp", complex(self.amp))
        object.__setattr__(self, "photons", _canonical(*self.photons))


@dataclass(frozen=True)
class TwoPhotonState:
    """Superposition of two-photon path terms over a fixed mode set."""

    modes: tuple[str, ...]
    terms: tuple[PathTerm, ...]

    def __post_init__(self):
        if len(set(self.modes)) != len(self.modes):
            raise ModeError(f"duplicate mode ids in {self.modes}")
        known = set(self.modes)
        for t in self.terms:
            for m, _ in t.photons:
                if m not in known:
                    raise ModeError(f"term references unknown mode {m!r}")

    def label_dim(self) -> int | None:
        for t in self.terms:
            return t.photons[0][1].dim
        return None


def two_photon_state(modes: Sequence[str], terms: Iterable[PathTerm]) -> TwoPhotonState:
    """Build a state, merging terms with identical canonical keys."""
    merged: dict[tuple, complex] = {}
    for t in terms:
        key = tuple((m, lab.components) for m, lab in t.photons)
        merged[key] = merged.get(key, 0.0) + complex(t.amp)
    kept = tuple(
        PathTerm(amp, tuple((m, Displacement(c)) for m, c in key))  # type: ignore[arg-type]
        for key, amp in merged.items()
        if amp != 0.0
    )
    return TwoPhotonState(tuple(modes), kept)


def pair_state(
    modes: Sequence[str], m1: str, m2: str, dim: int = 1, amp: complex = 1.0
) -> TwoPhotonState:
    """Freshly prepared input: one photon in each of two modes, zero labels."""
    z = Displacement.zero(dim)
    return two_photon_state(modes, [PathTerm(amp, ((m1, z), (m2, z)))])


def _check_mode(state: TwoPhotonState, m: str) -> None:
    if m not in state.modes:
        raise ModeError(f"unknown mode {m!r} (state modes: {state.modes})")


def apply_beamsplitter(
    state: TwoPhotonState, m1: str, m2: str, eta: float, gray: str | None = None
) -> TwoPhotonState:
    """Mix modes m1 and m2 on a beamsplitter of reflectivity eta.

    Reflection keeps the mode with amplitude sqrt(eta) and picks up a sign
    inversion on the gray side (default m2); transmission swaps the mode
    with amplitude sqrt(1 - eta).  Displacement labels ride along
    untouched.  The 2x2 transfer matrix is orthogonal, so total probability
    is conserved before any post-selection.
    """
    _check_mode(state, m1)
    _check_mode(state, m2)
    if m1 == m2:
        raise ModeError("beamsplitter needs two distinct modes")
    if not 0.0 <= eta <= 1.0:
        raise ValidationError(f"reflectivity must lie in [0, 1], got {eta}")
    if gray is None:
        gray = m2
    if gray not in (m1, m2):
        raise ModeError(f"gray side {gray!r} is neither {m1!r} nor {m2!r}")
    r = math.sqrt(eta)
    t = math.sqrt(1.0 - eta)
    fan_out = {
        m1: ((m1, -r if gray == m1 else r), (m2, t)),
        m2: ((m1, t), (m2, -r if gray == m2 else r)),
    }

    def split(p: Photon):
        m, lab = p
        if m not in fan_out:
            return ((p, 1.0),)
        return tuple(((mo, lab), c) for mo, c in fan_out[m])

    out: list[PathTerm] = []
    for term in state.terms:
        p1, p2 = term.photons
        for q1, c1 in split(p1):
            for q2, c2 in split(p2):
                out.append(PathTerm(term.amp * c1 * c2, (q1, q2)))
    return two_photon_state(state.modes, out)


def apply_taubox(state: TwoPhotonState, m: str, tau: Displacement) -> TwoPhotonState:
    """Shift the wavepacket label of every photon currently in mode m."""
    _check_mode(state, m)
    dim = state.label_dim()
    if dim is not None and tau.dim != dim:
        # matches Displacement addition, but fail before touching any term
        from .errors import DimensionMismatchError

        raise DimensionMismatchError(
            f"tau dimensionality {tau.dim} vs state labels {dim}"
        )
    out = []
    for term in state.terms:
        photons = tuple(
            (mode, lab + tau) if mode == m else (mode, lab) for mode, lab in term.photons
        )
        out.append(PathTerm(term.amp, photons))  # type: ignore[arg-type]
    return two_photon_state(state.modes, out)


def apply_phase(state: TwoPhotonState, m: str, angle: float) -> TwoPhotonState:
    """Multiply every photon in mode m by exp(i * angle)."""
    _check_mode(state, m)
    phase = complex(math.cos(angle), math.sin(angle))
    out = []
    for term in state.terms:
        amp = term.amp
        for mode, _ in term.photons:
            if mode == m:
                amp = amp * phase
        out.append(PathTerm(amp, term.photons))
    return two_photon_state(state.modes, out)


def post_select(
    state: TwoPhotonState, group_a: Iterable[str], group_b: Iterable[str]
) -> TwoPhotonState:
    """Keep terms with exactly one photon in each mode group (no renormalization)."""
    a = frozenset(group_a)
    b = frozenset(group_b)
    if a & b:
        raise ModeError(f"post-selection groups overlap: {sorted(a & b)}")
    kept = []
    for term in state.terms:
        n_a = sum(1 for m, _ in term.photons if m in a)
        n_b = sum(1 for m, _ in term.photons if m in b)
        if n_a == 1 and n_b == 1:
            kept.append(term)
    return TwoPhotonState(state.modes, tuple(kept))


def norm(state: TwoPhotonState) -> float:
    """Squared norm of the state via the label-overlap Gram matrix.

    Computes sum_{p,q} amp_p * conj(amp_q) * <q|p> with the two-photon
    inner product described in the module docstring.  Tiny negative values
    from round-off are clamped to zero; anything below -1e-12 signals an
    internal inconsistency.
    """
    n = len(state.terms)
    if n == 0:
        return 0.0
    labels: list[Displacement] = []
    index: dict[tuple, int] = {}
    for term in state.terms:
        for _, lab in term.photons:
            if lab.components not in index:
                index[lab.components] = len(labels)
                labels.append(lab)
    g = gram(labels).entries

    mode_code = {m: i for i, m in enumerate(state.modes)}
    modes = np.empty((n, 2), dtype=np.intp)
    labs = np.empty((n, 2), dtype=np.intp)
    amps = np.empty(n, dtype=complex)
    for i, term in enumerate(state.terms):
        amps[i] = term.amp
        for j, (m, lab) in enumerate(term.photons):
            modes[i, j] = mode_code[m]
            labs[i, j] = index[lab.components]

    # direct and exchange photon pairings between every pair of terms
    same = lambda a, b: modes[:, None, a] == modes[None, :, b]  # noqa: E731
    ov = lambda a, b: g[labs[:, None, a], labs[None, :, b]]  # noqa: E731
    direct = np.where(same(0, 0) & same(1, 1), ov(0, 0) * ov(1, 1), 0.0)
    exchange = np.where(same(0, 1) & same(1, 0), ov(0, 1) * ov(1, 0), 0.0)
    total = np.einsum("p,q,pq->", amps, amps.conj(), direct + exchange)

    if abs(total.imag) > 1e-10:
        raise NumericalError(f"norm has imaginary part {total.imag}")
    value = float(total.real)
    if value < -NEGATIVE_NORM_TOL:
        raise NumericalError(f"norm is negative beyond tolerance: {value}")
    return max(value, 0.0)


def outcome_probability(state: TwoPhotonState, m_a: str, m_b: str) -> float:
    """Coincidence probability for one photon in m_a and one in m_b.

    Photo-detection ignores the wavepacket labels, so the probability is
    the squared norm of the matching sub-state with the labels traced out
    (which the Gram-sum norm performs implicitly).
    """
    _check_mode(state, m_a)
    _check_mode(state, m_b)
    if m_a == m_b:
        sub = [t for t in state.terms if all(m == m_a for m, _ in t.photons)]
    else:
        wanted = {m_a, m_b}
        sub = [t for t in state.terms if {m for m, _ in t.photons} == wanted]
    p = norm(TwoPhotonState(state.modes, tuple(sub)))
    if p > 1.0 + 1e-12:
        raise NumericalError(f"outcome probability exceeds 1: {p}")
    return min(p, 1.0)
