"""Command-line front end.

Subcommands: simulate (outcome probabilities for one input), fit
(estimate tau from a measurement CSV), qpt (process matrix and fidelity
vs the ideal gate), fidelity (compare two saved process matrices), synth
(noisy synthetic measurement data), sweep (fidelity vs tau scale).

Every file-writing run drops a <output>.manifest.json next to the output
recording the command line, inputs, configuration, seed, and tool
version; re-running the recorded argv reproduces the output bitwise
(wall time aside).

Exit codes: 0 success, 1 file I/O, 2 usage, 3 validation, 4 numerical.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .circuit import (
    ROW_LABELS,
    Beamsplitter,
    TauParams,
    build_cnot,
    evolve,
    parse_circuit,
    post_selected,
    split_state_label,
)
from .errors import NumericalError, ValidationError
from .fitting import (
    FitConfig,
    fit,
    load_fit_result,
    save_fit_result,
)
from .fock import apply_beamsplitter, apply_phase, outcome_probability, pair_state
from .tomography import (
    ideal_cnot_chi,
    process_fidelity,
    read_chi_json,
    read_meas_csv,
    reconstruct_chi,
    synthesize_measurement,
    write_chi_json,
    write_meas_csv,
)

EXIT_OK = 0
EXIT_IO = 1
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_NUMERICAL = 4

SEED_ENV = "MISMATCH_QPT_SEED"
DEFAULT_COUNTS = 4600

# options whose value can begin with "-" ("--tau -0.3,...", "--input --");
# merged into --opt=value before argparse sees them
_LEADING_DASH_OPTS = ("--tau", "--input", "--scales", "--seed")


def _merge_dash_values(argv):
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in _LEADING_DASH_OPTS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            tok = tok + "=" + argv[i + 1]
            i += 2
        else:
            i += 1
        # argparse eats a bare "--" value even in the merged form (it is
        # the end-of-options marker); the comma spelling is the same label
        if tok == "--input=--":
            tok = "--input=-,-"
        out.append(tok)
    return out


def _tau_csv(text: str) -> TauParams:
    parts = text.split(",")
    if len(parts) != 5:
        raise argparse.ArgumentTypeError(
            f"expected 5 comma-separated tau values, got {len(parts)}"
        )
    try:
        return TauParams.of([float(p) for p in parts])
    except (ValueError, ValidationError) as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _scale_grid(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected start:stop:n")
    try:
        start, stop, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))
    if n < 2:
        raise argparse.ArgumentTypeError("grid needs at least 2 points")
    return np.linspace(start, stop, n)


def _resolve_seed(value):
    if value is not None:
        return value
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ValidationError(f"{SEED_ENV} must be an integer, got {env!r}")
    return 0


def _write_manifest(out_path, command, argv, inputs, outputs, config, seed, t0):
    payload = {
        "command": command,
        "argv": list(argv),
        "inputs": [str(p) for p in inputs],
        "outputs": [str(p) for p in outputs],
        "config": config,
        "seed": seed,
        "version": __version__,
        "wall_time_s": round(time.time() - t0, 6),
    }
    path = str(out_path) + ".manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


# -- simulate ----------------------------------------------------------------


def _prepare_on(circuit, label: str):
    """Input state for an arbitrary circuit with 2+2 post-selection rails."""
    if len(circuit.control) != 2 or len(circuit.target) != 2:
        raise ValidationError(
            "simulation needs two control and two target modes, got "
            f"{len(circuit.control)}+{len(circuit.target)}"
        )
    c0, c1 = circuit.control
    t0, t1 = circuit.target
    tok_c, tok_t = split_state_label(label)
    mc = c1 if tok_c in ("1", "-") else c0
    mt = t1 if tok_t in ("1", "-") else t0
    state = pair_state(circuit.modes, mc, mt, dim=1)
    for tok, r0, r1 in ((tok_c, c0, c1), (tok_t, t0, t1)):
        if tok in ("0", "1"):
            continue
        state = apply_beamsplitter(state, r0, r1, 0.5, gray=r1)
        if tok == "+i":
            state = apply_phase(state, r1, math.pi / 2)
        elif tok == "-i":
            state = apply_phase(state, r1, -math.pi / 2)
    return state


def _simulate_block(circuit, label: str, basis: str):
    """Conditional outcome probabilities and the success probability."""
    state = _prepare_on(circuit, label)
    state = post_selected(circuit, evolve(circuit, state))
    c0, c1 = circuit.control
    t0, t1 = circuit.target
    if basis == "x":
        state = apply_beamsplitter(state, c0, c1, 0.5, gray=c1)
        state = apply_beamsplitter(state, t0, t1, 0.5, gray=t1)
        names = ("++", "+-", "-+", "--")
    else:
        names = ("00", "01", "10", "11")
    raw = []
    for name in names:
        ma = c0 if name[0] in "0+" else c1
        mb = t0 if name[1] in "0+" else t1
        raw.append(outcome_probability(state, ma, mb))
    success = sum(raw)
    if success < 1e-12:
        raise NumericalError("post-selection probability is numerically zero")
    return names, [p / success for p in raw], success


def _cmd_simulate(args, argv):
    t0 = time.time()
    inputs = []
    if args.circuit is not None:
        with open(args.circuit, "r", encoding="utf-8") as fh:
            circuit = parse_circuit(fh.read())
        if args.tau is not None:
            # the DSL names tau slots but carries no values
            circuit = dataclasses.replace(circuit, tau_values=args.tau.values)
        inputs.append(args.circuit)
    else:
        circuit = build_cnot(args.tau or TauParams.zero())
    names, probs, success = _simulate_block(circuit, args.input, args.basis)

    lines = ["outcome,probability"]
    for name, p in zip(names, probs):
        lines.append(f"{name},{p!r}")
    lines.append(f"success,{success!r}")
    text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
        config = {
            "input": args.input,
            "basis": args.basis,
            "tau": list(args.tau.values) if args.tau else None,
            "circuit": args.circuit,
        }
        _write_manifest(args.output, "simulate", argv, inputs, [args.output], config, None, t0)
        print(f"wrote {args.output}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_fit(args, argv):
    t0 = time.time()
    seed = _resolve_seed(args.seed)
    m = read_meas_csv(args.data)
    cfg = FitConfig(
        bound=args.bound,
        restarts=args.restarts,
        seed=seed,
        mode=args.mode,
        stop_tol=args.stop_tol,
    )
    res = fit(m, cfg)
    print(f"mode: {res.mode}")
    print(f"achieved E_max: {res.achieved_e_max:.6e}")
    print(f"achieved E_mean: {res.achieved_e_mean:.6e}")
    if res.mode == "global":
        print("tau:", ",".join(repr(v) for v in res.tau.values))
        flagged = [i + 1 for i, u in enumerate(res.unconstrained) if u]
        if flagged:
            print("unconstrained components:", ",".join(str(i) for i in flagged))
    if args.output:
        save_fit_result(res, args.output)
        config = {
            "bound": cfg.bound,
            "restarts": cfg.restarts,
            "max_iterations": cfg.max_iterations,
            "diameter_tol": cfg.diameter_tol,
            "mode": cfg.mode,
            "stop_tol": cfg.stop_tol,
        }
        _write_manifest(args.output, "fit", argv, [args.data], [args.output], config, seed, t0)
        print(f"wrote {args.output}")
    return EXIT_OK


def _cmd_qpt(args, argv):
    t0 = time.time()
    inputs = []
    if args.fit_result is not None:
        res = load_fit_result(args.fit_result)
        if res.mode != "global":
            raise ValidationError(
                "per-input fit results carry one tau per row; qpt needs a global fit"
            )
        tau = res.tau
        inputs.append(args.fit_result)
    else:
        tau = args.tau
    chi = reconstruct_chi(tau)
    f_ideal = process_fidelity(chi, ideal_cnot_chi())
    print(f"F_P vs ideal CNOT: {f_ideal:.12f}")
    print(f"chi eigenvalue floor: {chi.eigenvalue_floor():.6e}")
    print(f"success-probability scale: {chi.scale!r}")
    if args.output:
        write_chi_json(chi, args.output)
        config = {"tau": list(tau.values), "fit_result": args.fit_result}
        _write_manifest(args.output, "qpt", argv, inputs, [args.output], config, None, t0)
        print(f"wrote {args.output}")
    return EXIT_OK


def _cmd_fidelity(args, argv):
    t0 = time.time()
    chi_a = read_chi_json(args.chi_a)
    chi_b = read_chi_json(args.chi_b)
    f = process_fidelity(chi_a, chi_b)
    print(f"F_P: {f:.12f}")
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            json.dump({"f_p": f, "chi_a": args.chi_a, "chi_b": args.chi_b}, fh, indent=1)
            fh.write("\n")
        _write_manifest(
            args.output, "fidelity", argv, [args.chi_a, args.chi_b], [args.output], {}, None, t0
        )
        print(f"wrote {args.output}")
    return EXIT_OK


def _cmd_synth(args, argv):
    t0 = time.time()
    seed = _resolve_seed(args.seed)
    if args.counts < 1:
        raise ValidationError(f"counts must be >= 1, got {args.counts}")
    m = synthesize_measurement(args.tau, args.counts, seed=seed)
    write_meas_csv(m, args.output)
    config = {"tau": list(args.tau.values), "counts": args.counts}
    _write_manifest(args.output, "synth", argv, [], [args.output], config, seed, t0)
    print(f"wrote {args.output}")
    return EXIT_OK


def _cmd_sweep(args, argv):
    t0 = time.time()
    ideal = ideal_cnot_chi()
    lines = ["scale,f_p"]
    for s in args.scales:
        f = process_fidelity(reconstruct_chi(args.tau.scaled(float(s))), ideal)
        lines.append(f"{float(s)!r},{f!r}")
    with open(args.output, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    config = {"tau": list(args.tau.values), "scales": [float(s) for s in args.scales]}
    _write_manifest(args.output, "sweep", argv, [], [args.output], config, None, t0)
    print(f"wrote {args.output}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mismatch-qpt",
        description="Mode-mismatch gate simulation, tomography, and fitting.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="outcome probabilities for one input state")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--builtin", choices=("cnot",), default="cnot")
    src.add_argument("--circuit", help="circuit DSL file (overrides --builtin)")
    p.add_argument("--tau", type=_tau_csv, help="five comma-separated tau values")
    p.add_argument("--input", required=True, help="two-qubit label, e.g. 10 or +,0 or --")
    p.add_argument("--basis", choices=("z", "x"), default="z")
    p.add_argument("--output", help="write CSV here (plus manifest)")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("fit", help="estimate tau from measurement CSV")
    p.add_argument("data", help="measurement matrix CSV")
    p.add_argument("--mode", choices=("global", "per-input"), default="global")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--restarts", type=int, default=32)
    p.add_argument("--bound", type=float, default=3.0)
    p.add_argument("--stop-tol", type=float, default=None)
    p.add_argument("--output", help="write fit result JSON here (plus manifest)")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("qpt", help="process matrix and fidelity vs the ideal gate")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--tau", type=_tau_csv)
    src.add_argument("--fit-result", help="global-mode fit result JSON")
    p.add_argument("--output", help="write chi JSON here (plus manifest)")
    p.set_defaults(func=_cmd_qpt)

    p = sub.add_parser("fidelity", help="process fidelity between two chi files")
    p.add_argument("chi_a")
    p.add_argument("chi_b")
    p.add_argument("--output", help="write result JSON here (plus manifest)")
    p.set_defaults(func=_cmd_fidelity)

    p = sub.add_parser("synth", help="synthetic noisy measurement CSV")
    p.add_argument("--tau", type=_tau_csv, required=True)
    p.add_argument("--counts", type=int, default=DEFAULT_COUNTS)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("sweep", help="fidelity vs tau scale, CSV output")
    p.add_argument("--tau", type=_tau_csv, required=True)
    p.add_argument("--scales", type=_scale_grid, default=_scale_grid("0:1:11"))
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_sweep)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    argv = _merge_dash_values(argv)
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, argv)
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
