"""Circuit description, text DSL, and the dual-rail CNOT builder.

A circuit is an ordered list of elements (beamsplitters, tau boxes, phase
shifts) over named spatial modes, plus control/target mode groups used for
coincidence post-selection.  Tau boxes carry an index 1..5 into a separate
value vector (TauParams); the DSL describes structure only, values travel
alongside in parameter files.

The CNOT network uses dual-rail encoding: control qubit on rails (c0, c1),
target on (t0, t1), plus two vacuum modes (v1, v2) that balance the
amplitudes and are discarded by post-selection.  Reflectivities are 1/3
for the central and balancing beamsplitters and 1/2 for the target
interferometer; with all tau values zero the post-selected action is
exactly CNOT with success probability 1/9.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

from .errors import CircuitParseError, ModeError, ValidationError
from .fock import (
    TwoPhotonState,
    apply_beamsplitter,
    apply_phase,
    apply_taubox,
    pair_state,
    post_select,
)
from .wavepacket import Displacement

__all__ = [
    "Beamsplitter",
    "TauBox",
    "PhaseShift",
    "Element",
    "Circuit",
    "TauParams",
    "MeasurementSetting",
    "CNOT_MODES",
    "CNOT_CONTROL",
    "CNOT_TARGET",
    "ROW_LABELS",
    "QUBIT_TOKENS",
    "build_cnot",
    "split_state_label",
    "prepare_input",
    "measurement_settings",
    "apply_elements",
    "evolve",
    "post_selected",
    "parse_circuit",
    "serialize_circuit",
]

N_TAU = 5

CNOT_MODES = ("c0", "c1", "t0", "t1", "v1", "v2")
CNOT_CONTROL = ("c0", "c1")
CNOT_TARGET = ("t0", "t1")

# row/column enumeration of the 8x8 coincidence matrix
ROW_LABELS = ("00", "01", "10", "11", "++", "+-", "-+", "--")

QUBIT_TOKENS = ("0", "1", "+", "-", "+i", "-i")


@dataclass(frozen=True)
class Beamsplitter:
    m1: str
    m2: str
    eta: float
    gray: str

    def __post_init__(self):
        if self.m1 == self.m2:
            raise ModeError("beamsplitter needs two distinct modes")
        if not 0.0 <= self.eta <= 1.0:
            raise ValidationError(f"reflectivity must lie in [0, 1], got {self.eta}")
        if self.gray not in (self.m1, self.m2):
            raise ModeError(
                f"gray side {self.gray!r} is neither {self.m1!r} nor {self.m2!r}"
            )


@dataclass(frozen=True)
class TauBox:
    mode: str
    index: int

    def __post_init__(self):
        if not 1 <= self.index <= N_TAU:
            raise ValidationError(f"tau index must be 1..{N_TAU}, got {self.index}")


@dataclass(frozen=True)
class PhaseShift:
    mode: str
    angle: float

    def __post_init__(self):
        if not math.isfinite(self.angle):
            raise ValidationError(f"phase angle must be finite, got {self.angle}")


Element = Union[Beamsplitter, TauBox, PhaseShift]


def _element_modes(el: Element) -> tuple[str, ...]:
    if isinstance(el, Beamsplitter):
        return (el.m1, el.m2)
    return (el.mode,)


@dataclass(frozen=True)
class TauParams:
    """The five mode-mismatch scalars, in units of inverse photon bandwidth."""

    values: tuple[float, float, float, float, float] = (0.0,) * N_TAU

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if len(vals) != N_TAU:
            raise ValidationError(f"expected {N_TAU} tau values, got {len(vals)}")
        if not all(math.isfinite(v) for v in vals):
            raise ValidationError(f"tau values must be finite, got {vals}")
        object.__setattr__(self, "values", vals)

    @classmethod
    def zero(cls) -> "TauParams":
        return cls()

    @classmethod
    def of(cls, values: Sequence[float]) -> "TauParams":
        return cls(tuple(float(v) for v in values))  # type: ignore[arg-type]

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i: int) -> float:
        return self.values[i]

    def scaled(self, s: float) -> "TauParams":
        return TauParams.of([s * v for v in self.values])

    def as_displacements(self) -> tuple[Displacement, ...]:
        return tuple(Displacement((v,)) for v in self.values)

    def within_bounds(self, bound: float = 3.0) -> bool:
        return all(abs(v) <= bound for v in self.values)


@dataclass(frozen=True)
class Circuit:
    """Ordered element list over named modes, with post-selection groups."""

    modes: tuple[str, ...]
    elements: tuple[Element, ...]
    control: tuple[str, ...] = ()
    target: tuple[str, ...] = ()
    tau_values: tuple[float, ...] = (0.0,) * N_TAU

    def __post_init__(self):
        if len(set(self.modes)) != len(self.modes):
            raise ModeError(f"duplicate mode ids in {self.modes}")
        known = set(self.modes)
        tau_seen: set[int] = set()
        for el in self.elements:
            for m in _element_modes(el):
                if m not in known:
                    raise ModeError(f"element references unknown mode {m!r}")
            if isinstance(el, TauBox):
                if el.index in tau_seen:
                    raise ValidationError(f"duplicate tau index {el.index}")
                tau_seen.add(el.index)
        for group, name in ((self.control, "control"), (self.target, "target")):
            for m in group:
                if m not in known:
                    raise ModeError(f"{name} group references unknown mode {m!r}")
        if set(self.control) & set(self.target):
            raise ModeError("control and target groups overlap")
        vals = tuple(float(v) for v in self.tau_values)
        if len(vals) != N_TAU or not all(math.isfinite(v) for v in vals):
            raise ValidationError(f"tau_values must be {N_TAU} finite reals")
        object.__setattr__(self, "tau_values", vals)

    def tau_params(self) -> TauParams:
        return TauParams.of(self.tau_values)


def build_cnot(taus: TauParams | Sequence[float] | None = None) -> Circuit:
    """The post-selected CNOT network with its five tau boxes.

    Layout (in application order): tau1 on c0 and tau2 on c1 at the control
    inputs, tau3 on t0 at the target input, the opening 50/50 of the target
    interferometer, tau4 on t1 inside it, the central 1/3 beamsplitter
    coupling (c1, t0), the two balancing 1/3 beamsplitters into the vacuum
    modes, the closing 50/50, and tau5 on t0 at the output.  Gray
    (sign-inverting) surfaces sit on t1 for both 50/50s, on c1 for the
    central coupler and on the vacuum side of the balancers; this
    particular assignment makes all four computational transition
    amplitudes come out at +1/3.
    """
    if taus is None:
        tp = TauParams.zero()
    elif isinstance(taus, TauParams):
        tp = taus
    else:
        tp = TauParams.of(taus)
    third = 1.0 / 3.0
    elements: tuple[Element, ...] = (
        TauBox("c0", 1),
        TauBox("c1", 2),
        TauBox("t0", 3),
        Beamsplitter("t0", "t1", 0.5, gray="t1"),
        TauBox("t1", 4),
        Beamsplitter("c1", "t0", third, gray="c1"),
        Beamsplitter("c0", "v1", third, gray="v1"),
        Beamsplitter("t1", "v2", third, gray="v2"),
        Beamsplitter("t0", "t1", 0.5, gray="t1"),
        TauBox("t0", 5),
    )
    return Circuit(
        modes=CNOT_MODES,
        elements=elements,
        control=CNOT_CONTROL,
        target=CNOT_TARGET,
        tau_values=tp.values,
    )


def split_state_label(label: str) -> tuple[str, str]:
    """Split a two-qubit state label into per-qubit tokens.

    Accepts either a comma-separated pair ("+i,0") or the concatenated
    form ("+i0", "--"); the token set {0, 1, +, -, +i, -i} makes the
    concatenated form unambiguous.
    """
    if "," in label:
        parts = label.split(",")
        if len(parts) == 2 and parts[0] in QUBIT_TOKENS and parts[1] in QUBIT_TOKENS:
            return parts[0], parts[1]
        raise ValidationError(f"invalid state label {label!r}")
    for cut in (1, 2):
        a, b = label[:cut], label[cut:]
        if a in QUBIT_TOKENS and b in QUBIT_TOKENS:
            return a, b
    raise ValidationError(
        f"invalid state label {label!r} (tokens: {', '.join(QUBIT_TOKENS)})"
    )


def _prepare_rail(
    state: TwoPhotonState, token: str, rail0: str, rail1: str
) -> TwoPhotonState:
    if token in ("0", "1"):
        return state
    state = apply_beamsplitter(state, rail0, rail1, 0.5, gray=rail1)
    if token == "+i":
        state = apply_phase(state, rail1, math.pi / 2)
    elif token == "-i":
        state = apply_phase(state, rail1, -math.pi / 2)
    return state


def prepare_input(label: str, label_dim: int = 1) -> TwoPhotonState:
    """Two-photon input state for the CNOT from a two-qubit label.

    Computational tokens place the photon directly on the matching rail;
    superposition tokens start on rail 0 (rail 1 for "-") and pass an
    ideal virtual 50/50 beamsplitter, with a +-pi/2 phase on rail 1 for
    the circular tokens.  Wavepacket labels start at zero with the
    requested dimensionality.
    """
    tok_c, tok_t = split_state_label(label)
    mc = "c1" if tok_c in ("1", "-") else "c0"
    mt = "t1" if tok_t in ("1", "-") else "t0"
    state = pair_state(CNOT_MODES, mc, mt, dim=label_dim)
    state = _prepare_rail(state, tok_c, "c0", "c1")
    state = _prepare_rail(state, tok_t, "t0", "t1")
    return state


@dataclass(frozen=True)
class MeasurementSetting:
    """Virtual post-circuit elements plus the detector pair for one outcome."""

    elements: tuple[Element, ...]
    detectors: tuple[str, str]


_X_MEAS_ELEMENTS: tuple[Element, ...] = (
    Beamsplitter("c0", "c1", 0.5, gray="c1"),
    Beamsplitter("t0", "t1", 0.5, gray="t1"),
)


def measurement_settings(label: str) -> MeasurementSetting:
    """Detector configuration for one of the eight coincidence outcomes.

    Z outcomes read the rails directly.  X outcomes append virtual 50/50
    beamsplitters on (c0, c1) and (t0, t1); the |+> component exits on
    rail 0 under the gray-on-rail-1 convention, so "+" maps to (c0, t0).
    """
    if label not in ROW_LABELS:
        raise ValidationError(f"invalid setting label {label!r}")
    a, b = label[0], label[1]
    if a in "01":
        det = ("c0" if a == "0" else "c1", "t0" if b == "0" else "t1")
        return MeasurementSetting((), det)
    det = ("c0" if a == "+" else "c1", "t0" if b == "+" else "t1")
    return MeasurementSetting(_X_MEAS_ELEMENTS, det)


def apply_elements(
    state: TwoPhotonState,
    elements: Iterable[Element],
    taus: Sequence[Displacement] | None = None,
) -> TwoPhotonState:
    """Apply elements in order; tau boxes draw from the taus sequence."""
    for el in elements:
        if isinstance(el, Beamsplitter):
            state = apply_beamsplitter(state, el.m1, el.m2, el.eta, gray=el.gray)
        elif isinstance(el, TauBox):
            if taus is None or len(taus) < el.index:
                raise ValidationError(
                    f"no displacement supplied for tau index {el.index}"
                )
            state = apply_taubox(state, el.mode, taus[el.index - 1])
        else:
            state = apply_phase(state, el.mode, el.angle)
    return state


def evolve(
    circuit: Circuit,
    state: TwoPhotonState,
    taus: Sequence[Displacement] | None = None,
) -> TwoPhotonState:
    """Run a state through the circuit (no post-selection).

    By default the circuit's own tau_values are used as scalar
    displacements; pass explicit Displacement sequences to override, e.g.
    with multi-dimensional labels.
    """
    if taus is None:
        taus = circuit.tau_params().as_displacements()
    return apply_elements(state, circuit.elements, taus)


def post_selected(circuit: Circuit, state: TwoPhotonState) -> TwoPhotonState:
    """Post-select on one photon in the control group and one in the target."""
    if not circuit.control or not circuit.target:
        raise ValidationError("circuit has no post-selection groups")
    return post_select(state, circuit.control, circuit.target)


# --- text DSL -------------------------------------------------------------

_NUM_RE = re.compile(r"[-+0-9.eE]+$")


def serialize_circuit(circuit: Circuit) -> str:
    """Canonical text form: sorted modes, groups, then elements in order."""
    lines = [f"mode {m}" for m in sorted(circuit.modes)]
    if circuit.control:
        lines.append("control " + " ".join(circuit.control))
    if circuit.target:
        lines.append("target " + " ".join(circuit.target))
    for el in circuit.elements:
        if isinstance(el, Beamsplitter):
            lines.append(f"bs {el.m1} {el.m2} {el.eta!r} gray={el.gray}")
        elif isinstance(el, TauBox):
            lines.append(f"tau {el.mode} {el.index}")
        else:
            lines.append(f"phase {el.mode} {el.angle!r}")
    return "\n".join(lines) + "\n"


def _tokenize(text: str):
    """Yield (line_no, [(col, token), ...]) for non-empty lines, 1-based."""
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        tokens = [(m.start() + 1, m.group()) for m in re.finditer(r"\S+", line)]
        if tokens:
            yield line_no, tokens


def parse_circuit(text: str) -> Circuit:
    """Parse the line-oriented circuit DSL; errors carry line and column."""
    modes: list[str] = []
    mode_lines: dict[str, int] = {}
    pending: list[tuple[int, list[tuple[int, str]]]] = []
    control: tuple[str, ...] = ()
    target: tuple[str, ...] = ()

    def fail(msg: str, line: int, col: int):
        raise CircuitParseError(msg, line=line, column=col)

    for line_no, tokens in _tokenize(text):
        col0, keyword = tokens[0]
        args = tokens[1:]
        if keyword == "mode":
            if len(args) != 1:
                fail("mode takes exactly one id", line_no, col0)
            col, mid = args[0]
            if mid in mode_lines:
                fail(f"duplicate mode {mid!r}", line_no, col)
            mode_lines[mid] = line_no
            modes.append(mid)
        elif keyword in ("bs", "tau", "phase", "control", "target"):
            pending.append((line_no, tokens))
        else:
            fail(f"unknown directive {keyword!r}", line_no, col0)

    known = set(modes)

    def need_mode(line: int, col: int, mid: str) -> str:
        if mid not in known:
            fail(f"unknown mode {mid!r}", line, col)
        return mid

    elements: list[Element] = []
    tau_seen: dict[int, int] = {}
    for line_no, tokens in pending:
        col0, keyword = tokens[0]
        args = tokens[1:]
        if keyword == "bs":
            if len(args) != 4:
                fail("bs takes: m1 m2 eta gray=<m1|m2>", line_no, col0)
            (c1, m1), (c2, m2), (c3, eta_s), (c4, gray_s) = args
            need_mode(line_no, c1, m1)
            need_mode(line_no, c2, m2)
            if not _NUM_RE.match(eta_s):
                fail(f"bad reflectivity {eta_s!r}", line_no, c3)
            try:
                eta = float(eta_s)
            except ValueError:
                fail(f"bad reflectivity {eta_s!r}", line_no, c3)
            if not 0.0 <= eta <= 1.0:
                fail(f"reflectivity {eta} outside [0, 1]", line_no, c3)
            if not gray_s.startswith("gray="):
                fail("expected gray=<mode>", line_no, c4)
            gray = gray_s[len("gray="):]
            if gray not in (m1, m2):
                fail(f"gray side {gray!r} is neither endpoint", line_no, c4)
            if m1 == m2:
                fail("beamsplitter needs two distinct modes", line_no, c2)
            elements.append(Beamsplitter(m1, m2, eta, gray))
        elif keyword == "tau":
            if len(args) != 2:
                fail("tau takes: mode index", line_no, col0)
            (c1, mid), (c2, idx_s) = args
            need_mode(line_no, c1, mid)
            try:
                idx = int(idx_s)
            except ValueError:
                fail(f"bad tau index {idx_s!r}", line_no, c2)
            if not 1 <= idx <= N_TAU:
                fail(f"tau index must be 1..{N_TAU}, got {idx}", line_no, c2)
            if idx in tau_seen:
                fail(f"duplicate tau index {idx}", line_no, c2)
            tau_seen[idx] = line_no
            elements.append(TauBox(mid, idx))
        elif keyword == "phase":
            if len(args) != 2:
                fail("phase takes: mode radians", line_no, col0)
            (c1, mid), (c2, ang_s) = args
            need_mode(line_no, c1, mid)
            try:
                angle = float(ang_s)
            except ValueError:
                fail(f"bad phase angle {ang_s!r}", line_no, c2)
            elements.append(PhaseShift(mid, angle))
        else:  # control / target
            if not args:
                fail(f"{keyword} needs at least one mode", line_no, col0)
            group = tuple(need_mode(line_no, c, m) for c, m in args)
            if keyword == "control":
                control = group
            else:
                target = group

    if not modes:
        raise CircuitParseError("no modes declared", line=1, column=1)
    return Circuit(
        modes=tuple(modes),
        elements=tuple(elements),
        control=control,
        target=target,
    )
