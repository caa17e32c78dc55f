"""Measurement matrices, error metrics, process reconstruction and fidelity.

The 8x8 coincidence matrix convention: rows are the input states
(|00>, |01>, |10>, |11>, |++>, |+->, |-+>, |-->), columns 1-4 the Z (x) Z
outcomes in the same computational order, columns 5-8 the X (x) X outcomes
(++, +-, -+, --).  Entries are post-selection-conditional probabilities,
so each basis block of a row sums to one.

Process matrices live in the two-qubit Pauli product basis, control qubit
first: P[4a+b] = kron(sigma_a, sigma_b) with (I, X, Y, Z) indexed 0..3.
The reconstruction keeps the success-weighted (trace-decreasing) linear
map all the way through and only rescales chi to unit trace at the end,
which is what keeps the inversion linear and the result physical without
any correction step.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import product

import numpy as np

from .circuit import ROW_LABELS, TauParams, split_state_label
from .engine import X_OUTCOMES, Z_OUTCOMES, model
from .errors import NumericalError, ValidationError

__all__ = [
    "COL_LABELS",
    "PAULI_LABELS",
    "MeasMatrix",
    "ErrorReport",
    "ChiMatrix",
    "model_matrix",
    "error_report",
    "output_density",
    "reconstruct_chi",
    "process_fidelity",
    "chi_of_unitary",
    "ideal_cnot_chi",
    "apply_chi",
    "matrix_from_chi",
    "synthesize_measurement",
    "write_meas_csv",
    "read_meas_csv",
    "write_chi_json",
    "read_chi_json",
]

COL_LABELS = Z_OUTCOMES + X_OUTCOMES

ENTRY_TOL = 1e-9
STRICT_BLOCK_TOL = 1e-9
RELAXED_BLOCK_TOL = 0.02  # admits real (noisy) data

_KETS = {
    "0": np.array([1.0, 0.0], dtype=complex),
    "1": np.array([0.0, 1.0], dtype=complex),
    "+": np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0),
    "-": np.array([1.0, -1.0], dtype=complex) / np.sqrt(2.0),
    "+i": np.array([1.0, 1.0j], dtype=complex) / np.sqrt(2.0),
    "-i": np.array([1.0, -1.0j], dtype=complex) / np.sqrt(2.0),
}

_SIGMA = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
_PAULI_NAMES = ("I", "X", "Y", "Z")
PAULI_LABELS = tuple(a + b for a, b in product(_PAULI_NAMES, _PAULI_NAMES))
PAULIS = tuple(np.kron(_SIGMA[a], _SIGMA[b]) for a, b in product(range(4), range(4)))

CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)

# default informationally complete tomography inputs
TOMO_TOKENS = ("0", "1", "+", "+i")
TOMO_INPUTS = tuple(product(TOMO_TOKENS, TOMO_TOKENS))


def state_vector(label: str) -> np.ndarray:
    """Two-qubit ket from a state label ("1+i", "0,0", ...)."""
    tok_c, tok_t = split_state_label(label)
    return np.kron(_KETS[tok_c], _KETS[tok_t])


def _check_entries(entries: np.ndarray, block_tol: float) -> np.ndarray:
    m = np.asarray(entries, dtype=float)
    if m.shape != (8, 8):
        raise ValidationError(f"measurement matrix must be 8x8, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError("measurement matrix entries must be finite")
    if m.min() < -ENTRY_TOL or m.max() > 1.0 + ENTRY_TOL:
        raise ValidationError(
            f"entries outside [0, 1]: min {m.min()}, max {m.max()}"
        )
    m = np.clip(m, 0.0, 1.0)
    for sl, name in ((slice(0, 4), "Z"), (slice(4, 8), "X")):
        sums = m[:, sl].sum(axis=1)
        bad = np.abs(sums - 1.0) > block_tol
        if np.any(bad):
            r = int(np.argmax(bad))
            raise ValidationError(
                f"{name} block of row {ROW_LABELS[r]!r} sums to {sums[r]:.6f}"
                f" (tolerance {block_tol})"
            )
    return m


@dataclass(frozen=True, eq=False)
class MeasMatrix:
    """8x8 conditional coincidence probabilities (see module docstring)."""

    entries: np.ndarray
    block_tol: float = STRICT_BLOCK_TOL

    def __post_init__(self):
        object.__setattr__(
            self, "entries", _check_entries(self.entries, self.block_tol)
        )
        self.entries.setflags(write=False)

    @classmethod
    def relaxed(cls, entries) -> "MeasMatrix":
        """Construction for measured data: block sums only within 2%."""
        return cls(entries, block_tol=RELAXED_BLOCK_TOL)


@dataclass(frozen=True)
class ErrorReport:
    """Element-wise absolute deviation between two measurement matrices."""

    error_matrix: np.ndarray
    e_max: float
    e_mean: float


def error_report(exp: MeasMatrix | np.ndarray, mod: MeasMatrix | np.ndarray) -> ErrorReport:
    a = exp.entries if isinstance(exp, MeasMatrix) else np.asarray(exp, dtype=float)
    b = mod.entries if isinstance(mod, MeasMatrix) else np.asarray(mod, dtype=float)
    if a.shape != b.shape:
        raise ValidationError(f"shape mismatch: {a.shape} vs {b.shape}")
    err = np.abs(a - b)
    return ErrorReport(err, float(err.max()), float(err.mean()))


def model_matrix(tau: TauParams | list | tuple | np.ndarray) -> MeasMatrix:
    """Predicted 8x8 matrix for the CNOT network at the given tau values."""
    return MeasMatrix(model().meas_entries(tau))


def output_density(label: str, tau) -> tuple[np.ndarray, float]:
    """Post-selected two-qubit output state for a pure input, with success.

    The wavepacket labels are traced out, so the state is in general mixed.
    Returns (rho, success_probability) with rho trace-normalized.
    """
    tok_c, tok_t = split_state_label(label)
    raw = model().density(tok_c, tok_t, tau)
    raw = 0.5 * (raw + raw.conj().T)
    success = float(raw.trace().real)
    if success < 1e-12:
        raise NumericalError(f"success probability vanished for input {label!r}")
    return raw / success, success


# -- process matrix reconstruction ------------------------------------------


@dataclass(frozen=True, eq=False)
class ChiMatrix:
    """16x16 process matrix in the Pauli product basis, unit trace.

    scale holds the trace of the raw success-weighted process, so
    scale * chi represents the physical (trace-decreasing) map.
    """

    entries: np.ndarray
    scale: float = 1.0

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        if m.shape != (16, 16):
            raise ValidationError(f"chi matrix must be 16x16, got {m.shape}")
        herm_dev = np.abs(m - m.conj().T).max()
        if herm_dev > 1e-10:
            raise NumericalError(f"chi not Hermitian: deviation {herm_dev}")
        if abs(m.trace().real - 1.0) > 1e-9:
            raise NumericalError(f"chi trace {m.trace()} != 1")
        floor = float(np.linalg.eigvalsh(m).min())
        if floor < -1e-9:
            raise NumericalError(f"chi eigenvalue floor {floor} below -1e-9")
        object.__setattr__(self, "entries", m)
        self.entries.setflags(write=False)

    def eigenvalue_floor(self) -> float:
        return float(np.linalg.eigvalsh(self.entries).min())


def _input_projectors(inputs) -> list[np.ndarray]:
    rhos = []
    for tok in inputs:
        label = tok if isinstance(tok, str) else f"{tok[0]},{tok[1]}"
        psi = state_vector(label)
        rhos.append(np.outer(psi, psi.conj()))
    return rhos


def reconstruct_chi(tau, inputs=None) -> ChiMatrix:
    """Process tomography of the model at tau.

    Evaluates the success-weighted output state for each tomography input
    (default {|0>,|1>,|+>,|+i>} on each qubit), inverts the linear map onto
    the elementary-matrix basis, assembles the Choi matrix and projects it
    onto the Pauli product basis.  Any informationally complete input set
    gives the same chi; larger sets are solved in least squares.
    """
    toks = TOMO_INPUTS if inputs is None else tuple(inputs)
    if len(toks) < 16:
        raise ValidationError(f"need at least 16 tomography inputs, got {len(toks)}")
    rhos_in = _input_projectors(toks)
    mdl = model()
    outs = []
    for tok in toks:
        label = tok if isinstance(tok, str) else f"{tok[0]},{tok[1]}"
        tok_c, tok_t = split_state_label(label)
        outs.append(mdl.density(tok_c, tok_t, tau))

    # coefficients c with vec(E_ij) = S c, then E(E_ij) = sum_k c_k out_k
    s_mat = np.column_stack([r.ravel() for r in rhos_in])
    out_stack = np.stack(outs)  # (K, 4, 4)
    choi = np.zeros((16, 16), dtype=complex)
    for i in range(4):
        for j in range(4):
            e_vec = np.zeros(16, dtype=complex)
            e_vec[4 * i + j] = 1.0
            if len(toks) == 16:
                coeff = np.linalg.solve(s_mat, e_vec)
            else:
                coeff, *_ = np.linalg.lstsq(s_mat, e_vec, rcond=None)
            block = np.tensordot(coeff, out_stack, axes=(0, 0))
            choi[4 * i : 4 * i + 4, 4 * j : 4 * j + 4] = block

    basis = np.column_stack([p.T.ravel() for p in PAULIS])
    chi_raw = basis.conj().T @ choi @ basis / 16.0
    chi_raw = 0.5 * (chi_raw + chi_raw.conj().T)
    scale = float(chi_raw.trace().real)
    if scale <= 0.0:
        raise NumericalError("process trace vanished")
    return ChiMatrix(chi_raw / scale, scale=scale)


def chi_of_unitary(u: np.ndarray) -> ChiMatrix:
    """Rank-1 process matrix of a two-qubit unitary, unit trace."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (4, 4):
        raise ValidationError(f"expected a 4x4 unitary, got {u.shape}")
    coeffs = np.array([np.trace(p.conj().T @ u) / 4.0 for p in PAULIS])
    chi = np.outer(coeffs, coeffs.conj())
    tr = chi.trace().real
    return ChiMatrix(chi / tr, scale=float(tr))


def ideal_cnot_chi() -> ChiMatrix:
    return chi_of_unitary(CNOT)


def apply_chi(chi: ChiMatrix | np.ndarray, rho: np.ndarray) -> np.ndarray:
    """The channel sum_mn chi[m,n] P_m rho P_n (Paulis are Hermitian)."""
    c = chi.entries if isinstance(chi, ChiMatrix) else np.asarray(chi, dtype=complex)
    out = np.zeros((4, 4), dtype=complex)
    for m in range(16):
        row = c[m]
        nz = np.nonzero(row)[0]
        if nz.size == 0:
            continue
        pm_rho = PAULIS[m] @ rho
        for n in nz:
            out += row[n] * (pm_rho @ PAULIS[n])
    return out


def _sqrtm_psd(mat: np.ndarray, floor: float = -1e-9) -> np.ndarray:
    w, v = np.linalg.eigh(mat)
    if w.min() < floor:
        raise NumericalError(f"matrix eigenvalue {w.min()} below PSD tolerance")
    # round-off eigenvalues near zero would otherwise leak sqrt(eps)-size
    # terms into the trace; unit trace sets the scale, so an absolute
    # cutoff is safe
    w = np.clip(w, 0.0, None)
    w[w < 1e-14] = 0.0
    return (v * np.sqrt(w)) @ v.conj().T


def process_fidelity(a: ChiMatrix | np.ndarray, b: ChiMatrix | np.ndarray) -> float:
    """F = tr(sqrt(sqrt(A) B sqrt(A)))^2 for unit-trace process matrices."""
    ma = a.entries if isinstance(a, ChiMatrix) else np.asarray(a, dtype=complex)
    mb = b.entries if isinstance(b, ChiMatrix) else np.asarray(b, dtype=complex)
    for m in (ma, mb):
        if np.abs(m - m.conj().T).max() > 1e-8:
            raise NumericalError("process matrix not Hermitian")
        if abs(m.trace().real - 1.0) > 1e-6:
            raise ValidationError(f"process matrix trace {m.trace().real} != 1")
    ra = _sqrtm_psd(ma)
    inner = ra @ mb @ ra
    inner = 0.5 * (inner + inner.conj().T)
    w = np.linalg.eigvalsh(inner)
    if w.min() < -1e-9:
        raise NumericalError(f"fidelity inner matrix eigenvalue {w.min()}")
    w = np.clip(w, 0.0, None)
    w[w < 1e-14] = 0.0
    f = float(np.sqrt(w).sum() ** 2)
    return min(f, 1.0)


# -- predictions from a process matrix ---------------------------------------

_Z_PROJ = [np.diag([1.0 if i == k else 0.0 for i in range(4)]).astype(complex) for k in range(4)]
_X_KETS = [state_vector(lbl) for lbl in X_OUTCOMES]
_X_PROJ = [np.outer(k, k.conj()) for k in _X_KETS]


def matrix_from_chi(chi: ChiMatrix | np.ndarray) -> MeasMatrix:
    """Conditional 8x8 coincidence matrix predicted by a process matrix.

    Because entries are normalized within each basis block, the overall
    success scale of the map drops out.
    """
    entries = np.zeros((8, 8))
    for r, label in enumerate(ROW_LABELS):
        psi = state_vector(label)
        rho_out = apply_chi(chi, np.outer(psi, psi.conj()))
        z = np.array([float(np.trace(rho_out @ p).real) for p in _Z_PROJ])
        x = np.array([float(np.trace(rho_out @ p).real) for p in _X_PROJ])
        for block, sl in ((z, slice(0, 4)), (x, slice(4, 8))):
            tot = block.sum()
            if tot < 1e-12:
                raise NumericalError("vanishing block probability from chi")
            entries[r, sl] = np.clip(block / tot, 0.0, 1.0)
    return MeasMatrix(entries)


# -- synthetic data -----------------------------------------------------------


def synthesize_measurement(tau, counts: int, seed: int | None = 0) -> MeasMatrix:
    """Measurement matrix with multinomial counting noise.

    Each (input row, basis block) collects `counts` coincidences in total,
    distributed multinomially over the four outcomes and normalized back
    to frequencies; this respects the per-block conditional normalization
    while matching Poissonian per-entry fluctuations (sigma ~ sqrt(p/c)).
    """
    if counts < 1:
        raise ValidationError(f"counts must be >= 1, got {counts}")
    probs = model_matrix(tau).entries
    rng = np.random.default_rng(seed)
    out = np.zeros((8, 8))
    for r in range(8):
        for sl in (slice(0, 4), slice(4, 8)):
            p = probs[r, sl]
            p = p / p.sum()
            out[r, sl] = rng.multinomial(counts, p) / counts
    return MeasMatrix(out)


# -- file formats -------------------------------------------------------------


def write_meas_csv(m: MeasMatrix, path) -> None:
    lines = [
        "# coincidence expectation matrix, conditional probabilities",
        "# rows: " + ", ".join(ROW_LABELS),
        "# cols: " + ", ".join(COL_LABELS) + "  (Z block then X block)",
    ]
    for row in m.entries:
        lines.append(",".join(repr(float(v)) for v in row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_meas_csv(path, block_tol: float = RELAXED_BLOCK_TOL) -> MeasMatrix:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            if len(parts) != 8:
                raise ValidationError(
                    f"{path}: line {line_no}: expected 8 values, got {len(parts)}"
                )
            try:
                rows.append([float(p) for p in parts])
            except ValueError as exc:
                raise ValidationError(f"{path}: line {line_no}: {exc}") from exc
    if len(rows) != 8:
        raise ValidationError(f"{path}: expected 8 data rows, got {len(rows)}")
    return MeasMatrix(np.array(rows), block_tol=block_tol)


def write_chi_json(chi: ChiMatrix, path) -> None:
    payload = {
        "basis": list(PAULI_LABELS),
        "basis_order": "control Pauli first: chi[4a+b, 4c+d] ~ (P_a x P_b, P_c x P_d)",
        "scale": chi.scale,
        "real": chi.entries.real.tolist(),
        "imag": chi.entries.imag.tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def read_chi_json(path) -> ChiMatrix:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    try:
        entries = np.array(payload["real"]) + 1j * np.array(payload["imag"])
        scale = float(payload.get("scale", 1.0))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: malformed chi JSON: {exc}") from exc
    return ChiMatrix(entries, scale=scale)
