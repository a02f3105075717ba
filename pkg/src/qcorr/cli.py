"""qcorr command line: compute, channel, sweep, surface, selfcheck.

Exit codes: 0 success, 1 computation error (unphysical state, failed
precondition, failed selfcheck), 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import channels, correlations, geometry, states
from .correlations import MeasureKind, OptimizerOptions
from .measurements import PROJECTIVE, strength


class UsageError(Exception):
    pass


def fmt(v) -> str:
    """12 significant digits, locale-free, always with a decimal point or exponent."""
    if v is None:
        return "nan"
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    s = f"{v:.12g}"
    if s.lstrip("-").isdigit():
        s += ".0"
    return s


def _parse_basis(text: str):
    n = np.array([float(v) for v in text.split(",")])
    if n.shape != (3,):
        raise UsageError("--basis needs three comma-separated components")
    norm = np.linalg.norm(n)
    if abs(norm - 1) > 1e-6:
        raise UsageError(f"--basis must be a unit vector (|n| = {norm:.6g})")
    return n / norm


def _parse_x(text):
    if text is None:
        return None
    try:
        return strength(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _state_from_args(args) -> states.TwoQubitState:
    given = [v is not None for v in (args.state, args.werner, args.bell)]
    if sum(given) != 1:
        raise UsageError("give exactly one of --state, --werner, --bell")
    if args.werner is not None:
        return states.werner(args.werner)
    if args.bell is not None:
        c = [float(v) for v in args.bell.split(",")]
        if len(c) != 3:
            raise UsageError("--bell needs c1,c2,c3")
        return states.bell_diagonal(*c)
    text = args.state
    if os.path.isfile(text):
        with open(text) as fh:
            text = fh.read()
    try:
        desc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"--state is not valid JSON: {exc}") from None
    return states.from_descriptor(desc)


def _add_state_args(p):
    p.add_argument("--state", help="JSON descriptor (or a path to one)")
    p.add_argument("--werner", type=float, metavar="Z", help="shorthand for a Werner state")
    p.add_argument("--bell", metavar="C1,C2,C3", help="shorthand for a Bell-diagonal state")


def _add_output_args(p):
    p.add_argument("--format", choices=["text", "csv", "json"], default="text")
    p.add_argument("--out", help="write output to this path instead of stdout")


def _emit(text: str, args, stdout):
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)


def _require_x(kind: MeasureKind, x):
    if kind.is_weak and x is None:
        raise UsageError(f"--x is required for {kind.value}")
    return x


def _opts(args) -> OptimizerOptions:
    try:
        return OptimizerOptions(coarse_grid=(args.grid_theta, args.grid_phi))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _results_output(state, kind, x, closed, numeric, args) -> str:
    diff = None if closed is None or numeric is None else closed.value - numeric.value
    if args.format == "json":
        d = {"state": states.to_descriptor(state), "measure": kind.value, "x": "inf" if x in (None, PROJECTIVE) else x}
        if closed is not None:
            d["closed_form"] = closed.to_dict()
        if numeric is not None:
            d["numeric"] = numeric.to_dict()
        if diff is not None:
            d["difference"] = diff
        return json.dumps(d) + "\n"
    if args.format == "csv":
        cols, vals = [], []
        for name, r in (("closed_form", closed), ("numeric", numeric)):
            if r is not None:
                cols.append(name)
                vals.append(fmt(r.value))
        if diff is not None:
            cols.append("difference")
            vals.append(fmt(diff))
        return ",".join(cols) + "\n" + ",".join(vals) + "\n"
    if closed is not None and numeric is None:
        return fmt(closed.value) + "\n"
    if numeric is not None and closed is None:
        return fmt(numeric.value) + "\n"
    return f"closed_form {fmt(closed.value)}\nnumeric {fmt(numeric.value)}\ndifference {fmt(diff)}\n"


def cmd_compute(args, stdout):
    kind = MeasureKind.parse(args.measure)
    x = _require_x(kind, _parse_x(args.x))
    state = _state_from_args(args)
    if args.basis is not None:
        if args.method is not None:
            raise UsageError("--basis evaluates one fixed basis and cannot be combined with --method")
        fixed = correlations.measure_at_basis(kind, state, _parse_basis(args.basis), x)
        _emit(_results_output(state, kind, x, None, fixed, args), args, stdout)
        return 0
    method = args.method or ("numeric" if state.family == "raw" else "closed")
    closed = numeric = None
    if method in ("closed", "both"):
        if state.family == "raw":
            raise ValueError("closed forms need a werner or bell_diagonal state; use --method numeric")
        closed = correlations.closed_form_measure(kind, state, x)
    if method in ("numeric", "both"):
        numeric = correlations.measure_numeric(kind, state, x, _opts(args))
    _emit(_results_output(state, kind, x, closed, numeric, args), args, stdout)
    return 0


def _phase_flip_from_args(args) -> channels.PhaseFlipParams:
    has_p = args.p is not None
    has_rate = args.gamma is not None or args.t is not None
    if has_p == has_rate:
        raise UsageError("give either --p or both --gamma and --t")
    if has_rate:
        if args.gamma is None or args.t is None:
            raise UsageError("--gamma and --t must be given together")
        return channels.PhaseFlipParams.from_rate(args.gamma, args.t)
    return channels.PhaseFlipParams(args.p)


def cmd_channel(args, stdout):
    kind = MeasureKind.parse(args.measure)
    x = _require_x(kind, _parse_x(args.x))
    pf = _phase_flip_from_args(args)
    state = _state_from_args(args)
    method = args.method or ("numeric" if state.family == "raw" else "closed")
    evolved = channels.apply_channel(state, channels.phase_flip_channel(pf))
    closed = numeric = None
    if method in ("closed", "both"):
        if state.family == "werner":
            closed = channels.channel_measure_werner(kind, state.params[0], x, pf)
        elif state.family == "bell_diagonal":
            if kind in (MeasureKind.DISCORD, MeasureKind.SUPER_DISCORD):
                closed = channels.channel_measure_bell(kind, state.params, x, pf)
            else:
                closed = correlations.bell_measure(kind, channels.evolved_bell_params(state.params, pf), x)
        else:
            raise ValueError("closed forms need a werner or bell_diagonal state; use --method numeric")
    if method in ("numeric", "both"):
        numeric = correlations.measure_numeric(kind, evolved, x, _opts(args))
    _emit(_results_output(evolved, kind, x, closed, numeric, args), args, stdout)
    return 0


def cmd_sweep(args, stdout):
    kinds = [MeasureKind.parse(k) for k in args.measures.split(",")]
    xs = geometry.parse_range(args.x) if args.x else [PROJECTIVE]
    if any(k.is_weak for k in kinds) and not args.x:
        raise UsageError("--x is required when sweeping weak measures")
    ps = geometry.parse_range(args.p) if args.p is not None else None
    if args.family == "werner":
        if args.c is not None:
            raise UsageError("--c applies to the bell_diagonal family only")
        zs = geometry.parse_range(args.z if args.z is not None else "0:1:0.01")
        table = geometry.sweep(kinds, "werner", z=zs, x=xs, p=ps, threads=args.threads)
    else:
        if args.c is None or args.z is not None:
            raise UsageError("bell_diagonal sweeps need --c and no --z")
        c = [float(v) for v in args.c.split(",")]
        table = geometry.sweep(kinds, "bell_diagonal", c=c, x=xs, p=ps, threads=args.threads)
    text = table.to_json() + "\n" if args.format == "json" else table.to_csv()
    _emit(text, args, stdout)
    return 0


def cmd_surface(args, stdout):
    kind = MeasureKind.parse(args.measure)
    x = _require_x(kind, _parse_x(args.x)) or PROJECTIVE
    req = geometry.SurfaceRequest(kind, args.target, x, args.resolution)
    cloud = geometry.level_surface(req, spot_check_fraction=args.spot_check)
    text = cloud.to_json(args.edges) + "\n" if args.format == "json" else cloud.to_csv(args.edges)
    _emit(text, args, stdout)
    print(f"{len(cloud)} points; diagnostics {json.dumps(cloud.diagnostics)}", file=args.stderr)
    return 0


def selfcheck(samples: int, x: float, seed: int = 0, threads: int = 1, opts: OptimizerOptions | None = None):
    """Max |closed form - numeric| per kind over random physical Bell-diagonal states."""
    rng = np.random.default_rng(seed)
    params = states.random_bell_params(rng, samples)
    opts = opts or OptimizerOptions()

    def one(c):
        st = states.bell_diagonal(c)
        out = {}
        for kind in MeasureKind:
            xx = x if kind.is_weak else None
            closed = correlations.bell_measure(kind, c, xx).value
            numeric = correlations.measure_numeric(kind, st, xx, opts).value
            out[kind.value] = abs(closed - numeric)
        return out

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            devs = list(ex.map(one, params))
    else:
        devs = [one(c) for c in params]
    return {k.value: max((d[k.value] for d in devs), default=0.0) for k in MeasureKind}


def cmd_selfcheck(args, stdout):
    x = _parse_x(args.x) if args.x is not None else 1.0
    devs = selfcheck(args.samples, x, args.seed, args.threads, _opts(args))
    worst = max(devs.values())
    ok = worst <= args.tolerance
    if args.format == "json":
        text = json.dumps({"samples": args.samples, "x": "inf" if x == PROJECTIVE else x, "seed": args.seed,
                           "max_deviation": devs, "worst": worst, "passed": ok}) + "\n"
    else:
        lines = [f"{k} max|closed-numeric| {fmt(v)}" for k, v in devs.items()]
        lines.append(f"worst {fmt(worst)} tolerance {fmt(args.tolerance)} {'PASS' if ok else 'FAIL'}")
        text = "\n".join(lines) + "\n"
    _emit(text, args, stdout)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qcorr", description="Quantum and super-quantum correlations of two-qubit states.")
    sub = parser.add_subparsers(dest="command", required=True)
    measures = [k.value for k in MeasureKind]

    def common(p):
        _add_output_args(p)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--grid-theta", type=int, default=64, help="optimizer coarse grid, polar points")
        p.add_argument("--grid-phi", type=int, default=64, help="optimizer coarse grid, azimuthal points")

    p = sub.add_parser("compute", help="evaluate one measure of one state")
    _add_state_args(p)
    p.add_argument("--measure", required=True, choices=measures)
    p.add_argument("--x", help="measurement strength (float or 'inf')")
    p.add_argument("--basis", help="nx,ny,nz: evaluate at this fixed basis instead of minimizing")
    p.add_argument("--method", choices=["closed", "numeric", "both"])
    common(p)
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("channel", help="evaluate a measure after phase flip on both qubits")
    _add_state_args(p)
    p.add_argument("--measure", required=True, choices=measures)
    p.add_argument("--x")
    p.add_argument("--p", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--t", type=float)
    p.add_argument("--method", choices=["closed", "numeric", "both"])
    common(p)
    p.set_defaults(func=cmd_channel)

    p = sub.add_parser("sweep", help="tabulate measures over a parameter grid")
    p.add_argument("--family", choices=["werner", "bell_diagonal"], default="werner")
    p.add_argument("--measures", default=",".join(measures))
    p.add_argument("--z", help="z range 'start:stop:step' or list (default 0:1:0.01)")
    p.add_argument("--c", metavar="C1,C2,C3")
    p.add_argument("--x", help="x range or list")
    p.add_argument("--p", help="p range or list; omit for no decoherence")
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("surface", help="level surface of a Bell-diagonal measure")
    p.add_argument("--measure", required=True, choices=measures)
    p.add_argument("--target", type=float, required=True)
    p.add_argument("--x")
    p.add_argument("--resolution", type=int, default=64)
    p.add_argument("--edges", action="store_true", help="include the grid edge of each point")
    p.add_argument("--spot-check", type=float, default=0.01, help="fraction of points re-checked numerically")
    common(p)
    p.set_defaults(func=cmd_surface)

    p = sub.add_parser("selfcheck", help="closed forms vs numeric oracle on random Bell-diagonal states")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--x", help="strength for the weak measures (default 1.0)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tolerance", type=float, default=1e-6)
    common(p)
    p.set_defaults(func=cmd_selfcheck)
    return parser


def run(argv, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "threads", 1) < 1:
        print("qcorr: --threads must be >= 1", file=stderr)
        return 2
    args.stderr = stderr
    try:
        return args.func(args, stdout)
    except UsageError as exc:
        print(f"qcorr: {exc}", file=stderr)
        return 2
    except (ValueError, RuntimeError) as exc:
        print(f"qcorr: error: {exc}", file=stderr)
        return 1


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
