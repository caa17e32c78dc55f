"""Fast evaluation engine for the CNOT model.

The five tau boxes are the only tau-dependent elements, so the network is
evolved once with symbolic labels: box i adds the i-th unit vector of a
5-dimensional label space, making every photon label an integer
combination of (tau1..tau5).  Each coincidence probability or density
matrix entry then collapses to a fixed list of weighted kernel products

    sum_n w_n * g(d1_n) * g(d2_n),   g(d) = exp(-(d . tau)^2 / 4)

over label-difference vectors d with components in {-1, 0, 1}.  Tables are
built once per process and evaluated per tau point in microseconds, which
is what makes multi-start minimax fitting affordable.  Kernel evaluation
dispatches through _backend (compiled extension or numpy fallback).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .circuit import (
    CNOT_CONTROL,
    CNOT_TARGET,
    ROW_LABELS,
    TauParams,
    apply_elements,
    build_cnot,
    evolve,
    measurement_settings,
    prepare_input,
)
from .errors import NumericalError, ValidationError
from .fock import TwoPhotonState, post_select
from .wavepacket import Displacement

__all__ = [
    "SYM_DIM",
    "Z_OUTCOMES",
    "X_OUTCOMES",
    "CnotModel",
    "model",
    "tau_array",
]

SYM_DIM = 5
Z_OUTCOMES = ("00", "01", "10", "11")
X_OUTCOMES = ("++", "+-", "-+", "--")

_UNIT_TAUS = tuple(
    Displacement(tuple(1.0 if j == i else 0.0 for j in range(SYM_DIM)))
    for i in range(SYM_DIM)
)

NEG_PROB_TOL = 1e-12
DEGENERATE_TOL = 1e-12


def tau_array(tau) -> np.ndarray:
    """Coerce TauParams or a length-5 sequence to a float vector."""
    if isinstance(tau, TauParams):
        arr = np.asarray(tau.values, dtype=float)
    else:
        arr = np.asarray(tau, dtype=float).reshape(-1)
    if arr.shape != (SYM_DIM,):
        raise ValidationError(f"expected {SYM_DIM} tau values, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("tau values must be finite")
    return arr


def _ivec(lab: Displacement) -> tuple[int, ...]:
    return tuple(int(round(x)) for x in lab.components)


def _sub(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(x - y for x, y in zip(a, b))


class _DiffRegistry:
    """Interns label-difference vectors up to overall sign.

    The kernel depends on d only through (d . tau)^2, so d and -d are the
    same entry; the canonical representative has its first nonzero
    component positive.
    """

    def __init__(self):
        self._index: dict[tuple[int, ...], int] = {}
        self.rows: list[tuple[int, ...]] = []

    def intern(self, d: tuple[int, ...]) -> int:
        for x in d:
            if x:
                if x < 0:
                    d = tuple(-v for v in d)
                break
        idx = self._index.get(d)
        if idx is None:
            idx = len(self.rows)
            self._index[d] = idx
            self.rows.append(d)
        return idx


@dataclass(frozen=True)
class _RealTable:
    u1: np.ndarray
    u2: np.ndarray
    w: np.ndarray
    cell: np.ndarray
    ncells: int

    def eval(self, diffs: np.ndarray, tau: np.ndarray) -> np.ndarray:
        return _backend.eval_cells_real(
            diffs, tau, self.u1, self.u2, self.w, self.cell, self.ncells
        )


@dataclass(frozen=True)
class _ComplexTable:
    u1: np.ndarray
    u2: np.ndarray
    w_re: np.ndarray
    w_im: np.ndarray
    cell: np.ndarray
    ncells: int

    def eval(self, diffs: np.ndarray, tau: np.ndarray) -> np.ndarray:
        return _backend.eval_cells_complex(
            diffs, tau, self.u1, self.u2, self.w_re, self.w_im, self.cell, self.ncells
        )


def _finalize_real(acc: dict[tuple[int, int, int], float], ncells: int) -> _RealTable:
    items = [(k, w) for k, w in acc.items() if w != 0.0]
    items.sort(key=lambda kv: (kv[0][2], kv[0][0], kv[0][1]))
    return _RealTable(
        u1=np.array([k[0] for k, _ in items], dtype=np.int32),
        u2=np.array([k[1] for k, _ in items], dtype=np.int32),
        w=np.array([w for _, w in items], dtype=float),
        cell=np.array([k[2] for k, _ in items], dtype=np.int32),
        ncells=ncells,
    )


def _finalize_complex(
    acc: dict[tuple[int, int, int], complex], ncells: int
) -> _ComplexTable:
    items = [(k, w) for k, w in acc.items() if w != 0.0]
    items.sort(key=lambda kv: (kv[0][2], kv[0][0], kv[0][1]))
    return _ComplexTable(
        u1=np.array([k[0] for k, _ in items], dtype=np.int32),
        u2=np.array([k[1] for k, _ in items], dtype=np.int32),
        w_re=np.array([w.real for _, w in items], dtype=float),
        w_im=np.array([w.imag for _, w in items], dtype=float),
        cell=np.array([k[2] for k, _ in items], dtype=np.int32),
        ncells=ncells,
    )


def _coincidence_terms(state: TwoPhotonState, m_a: str, m_b: str):
    """Terms with one photon in m_a and one in m_b, labels as int vectors,
    m_a's photon first."""
    out = []
    for t in state.terms:
        (m1, l1), (m2, l2) = t.photons
        if m1 == m2 or {m1, m2} != {m_a, m_b}:
            continue
        v1, v2 = _ivec(l1), _ivec(l2)
        out.append((t.amp, v1, v2) if m1 == m_a else (t.amp, v2, v1))
    return out


class CnotModel:
    """Precompiled symbolic path tables for the CNOT network."""

    def __init__(self):
        self._registry = _DiffRegistry()
        self._zero = self._registry.intern((0,) * SYM_DIM)
        self._diffs = np.zeros((0, SYM_DIM))
        self._circuit = build_cnot()
        self._prob = self._build_prob_table()
        self._density: dict[tuple[str, str], _ComplexTable] = {}

    # -- construction ------------------------------------------------------

    def _evolved(self, label: str) -> TwoPhotonState:
        state = prepare_input(label, label_dim=SYM_DIM)
        state = evolve(self._circuit, state, _UNIT_TAUS)
        return post_select(state, CNOT_CONTROL, CNOT_TARGET)

    def _acc_prob(self, acc, terms, cell: int) -> None:
        reg = self._registry
        zero = self._zero
        for p, (ap, a1, a2) in enumerate(terms):
            key = (zero, zero, cell)
            acc[key] = acc.get(key, 0.0) + (ap * ap.conjugate()).real
            for q in range(p):
                aq, b1, b2 = terms[q]
                w = 2.0 * (ap * aq.conjugate()).real
                if w == 0.0:
                    continue
                i = reg.intern(_sub(a1, b1))
                j = reg.intern(_sub(a2, b2))
                if j < i:
                    i, j = j, i
                key = (i, j, cell)
                acc[key] = acc.get(key, 0.0) + w

    def _build_prob_table(self) -> _RealTable:
        acc: dict[tuple[int, int, int], float] = {}
        for r, row in enumerate(ROW_LABELS):
            ps = self._evolved(row)
            for k, out in enumerate(Z_OUTCOMES):
                ms = measurement_settings(out)
                self._acc_prob(acc, _coincidence_terms(ps, *ms.detectors), r * 8 + k)
            sx = apply_elements(ps, measurement_settings("++").elements)
            for k, out in enumerate(X_OUTCOMES):
                det = measurement_settings(out).detectors
                self._acc_prob(acc, _coincidence_terms(sx, *det), r * 8 + 4 + k)
        return _finalize_real(acc, 64)

    def _build_density_table(self, tok_c: str, tok_t: str) -> _ComplexTable:
        ps = self._evolved(f"{tok_c},{tok_t}")
        groups: dict[int, list] = {b: [] for b in range(4)}
        for t in ps.terms:
            (m1, l1), (m2, l2) = t.photons
            if m1 in CNOT_CONTROL:
                mc, lc, mt, lt = m1, l1, m2, l2
            else:
                mc, lc, mt, lt = m2, l2, m1, l1
            b = (0 if mc == "c0" else 1) * 2 + (0 if mt == "t0" else 1)
            groups[b].append((t.amp, _ivec(lc), _ivec(lt)))
        acc: dict[tuple[int, int, int], complex] = {}
        reg = self._registry
        for bp in range(4):
            for bq in range(4):
                cell = bp * 4 + bq
                for ap, ac, at in groups[bp]:
                    for aq, bc, bt in groups[bq]:
                        w = ap * aq.conjugate()
                        if w == 0.0:
                            continue
                        i = reg.intern(_sub(ac, bc))
                        j = reg.intern(_sub(at, bt))
                        if j < i:
                            i, j = j, i
                        acc[(i, j, cell)] = acc.get((i, j, cell), 0j) + w
        return _finalize_complex(acc, 16)

    def density_table(self, tok_c: str, tok_t: str) -> _ComplexTable:
        key = (tok_c, tok_t)
        tbl = self._density.get(key)
        if tbl is None:
            tbl = self._build_density_table(tok_c, tok_t)
            self._density[key] = tbl
        return tbl

    # -- evaluation --------------------------------------------------------

    def _diff_array(self) -> np.ndarray:
        if len(self._registry.rows) != self._diffs.shape[0]:
            self._diffs = np.array(self._registry.rows, dtype=float).reshape(
                -1, SYM_DIM
            )
        return self._diffs

    def raw_entries(self, tau) -> np.ndarray:
        """Unnormalized 8x8 coincidence probabilities (rows x outcomes)."""
        vals = self._prob.eval(self._diff_array(), tau_array(tau))
        return vals.reshape(8, 8)

    def meas_entries(self, tau) -> np.ndarray:
        """The 8x8 matrix of conditional probabilities, per-basis-block
        normalized."""
        raw = self.raw_entries(tau)
        if raw.min() < -NEG_PROB_TOL:
            raise NumericalError(f"negative probability in model table: {raw.min()}")
        raw = np.clip(raw, 0.0, None)
        out = np.empty_like(raw)
        for sl in (slice(0, 4), slice(4, 8)):
            s = raw[:, sl].sum(axis=1)
            if np.any(s < DEGENERATE_TOL):
                raise NumericalError(
                    "post-selected probability vanished for a basis block"
                )
            out[:, sl] = raw[:, sl] / s[:, None]
        return np.clip(out, 0.0, 1.0)

    def density(self, tok_c: str, tok_t: str, tau) -> np.ndarray:
        """Unnormalized post-selected 4x4 output density matrix; its trace
        is the success probability."""
        tbl = self.density_table(tok_c, tok_t)
        vals = tbl.eval(self._diff_array(), tau_array(tau))
        return vals.reshape(4, 4)


_MODEL: CnotModel | None = None


def model() -> CnotModel:
    """The process-wide table singleton (built on first use)."""
    global _MODEL
    if _MODEL is None:
        _MODEL = CnotModel()
    return _MODEL
