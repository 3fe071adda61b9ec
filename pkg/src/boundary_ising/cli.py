"""Command-line front end.

    boundary-ising profile --lambda 2 --t-min 0.01 --t-max 10 --points 100
    boundary-ising phi --r 14
    boundary-ising ff --t 2 --lambda 1 --kmax 3
    boundary-ising verify [--quick]

Exit codes: 0 success, 1 numerical or verification failure, 2 usage error.
All numbers are written with 15 significant digits and LF line endings, so
identical flags give byte-identical files.  The wall-clock time goes only
into the sidecar manifest (``<output>.manifest.json``, or stderr when
writing to stdout).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
import time
import warnings

import numpy as np

from .boundary import solve_fixed_highT, solve_metastable, solve_u
from .errors import DomainError, QuadratureError, RangeError, SolverError
from .formfactor import MAX_ORDER, ff_magnetization
from .painleve import SolverConfig, eval_phi, solve_phi
from .specfun import sigma0
from .verify import format_report, run_suite

NUM = "{:.14e}"
_FIELDS = {f.name: f.type for f in dataclasses.fields(SolverConfig)}


class UsageError(Exception):
    pass


def _num(x: float) -> str:
    return NUM.format(x)


def read_config_file(path: str) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from None
    for n, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip().replace("-", "_"), value.strip()
        if not sep or key not in _FIELDS:
            raise UsageError(f"{path}:{n}: unknown setting {line!r}")
        try:
            if value.lower() == "none" and key == "t0":
                out[key] = None
            elif "int" in str(_FIELDS[key]):
                out[key] = int(value)
            else:
                out[key] = float(value)
        except ValueError:
            raise UsageError(f"{path}:{n}: bad value for {key}: {value!r}") from None
    return out


def resolve_config(args) -> SolverConfig:
    """defaults < config file < flags."""
    values = read_config_file(args.config) if args.config else {}
    flags = {"r_max": args.r_max, "t0": args.t0, "rel_tol": args.tol,
             "ff_nodes": getattr(args, "nodes", None)}
    values.update({k: v for k, v in flags.items() if v is not None})
    t_min = getattr(args, "t_min", None)
    if t_min is not None and t_min < values.get("t_min", SolverConfig.t_min):
        values["t_min"] = t_min
    try:
        return SolverConfig(**values)
    except DomainError as exc:
        raise UsageError(str(exc)) from None


def _manifest(args, config: SolverConfig, extra: dict) -> dict:
    cfg = {k: v for k, v in dataclasses.asdict(config).items()}
    return {"subcommand": args.command, "config": cfg, "output": args.output or "-",
            "format": args.format, **extra}


def _emit(args, text: str, manifest: dict, seconds: float):
    timed = dict(manifest, duration_seconds=round(seconds, 3))
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        with open(args.output + ".manifest.json", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(json.dumps(timed, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(text)
        sys.stdout.flush()
        sys.stderr.write(json.dumps(timed, sort_keys=True) + "\n")


def _csv(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(_num(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _json(manifest, header, rows) -> str:
    body = {"manifest": manifest, "columns": list(header),
            "rows": [[float(_num(v)) for v in row] for row in rows]}
    return json.dumps(body, indent=2, sort_keys=True) + "\n"


def _check_finite(rows):
    if not np.all(np.isfinite(np.asarray(rows, dtype=float))):
        raise SolverError("non-finite value in output")


def cmd_profile(args) -> int:
    start = time.perf_counter()
    branch = args.branch
    if branch != "highT" and args.lam is None:
        raise UsageError("--lambda is required for this branch")
    if args.lam is not None and not args.lam >= 0:
        raise UsageError("--lambda must be >= 0")
    if args.points < 2:
        raise UsageError("--points must be >= 2")
    if args.mass is not None and not args.mass > 0:
        raise UsageError("--mass must be positive")
    config = resolve_config(args)
    t0 = config.seed_point
    t_lo = config.t_min if args.t_min is None else args.t_min
    t_hi = t0 if args.t_max is None else args.t_max
    if not 0 < t_lo < t_hi:
        raise UsageError("need 0 < --t-min < --t-max")
    if t_hi > t0 * (1 + 1e-12):
        raise UsageError(f"--t-max must not exceed the seed point t0 = {t0:g}")
    if args.grid == "log":
        ts = np.geomspace(t_lo, t_hi, args.points)
    else:
        ts = np.linspace(t_lo, t_hi, args.points)
    ts[0], ts[-1] = t_lo, t_hi

    table = solve_phi(config)
    if branch == "stable":
        prof = solve_u(table, args.lam, config, ts=ts)
    elif branch == "metastable":
        if not 0 < args.lam < 1:
            raise UsageError("metastable branch needs 0 < --lambda < 1")
        prof = solve_metastable(table, args.lam, config, ts=ts)
    else:
        prof = solve_fixed_highT(table, config, ts=ts)

    header = ["t", "u", "sigma_ratio", "sigma_abs"]
    mass = 1.0 if args.mass is None else args.mass
    columns = [prof.ts, prof.u, prof.sigma_ratio, prof.sigma_ratio * sigma0(mass)]
    if args.mass is not None:
        header.append("y")
        columns.append(prof.ts / (2.0 * mass))
    rows = np.column_stack(columns)
    _check_finite(rows)

    grid = {"kind": args.grid, "t_min": t_lo, "t_max": t_hi, "points": args.points}
    manifest = _manifest(args, config, {
        "branch": prof.branch, "lambda": None if branch == "highT" else args.lam,
        "mass": mass, "grid": grid, "seed": prof.meta["seed"],
        "seed_order": prof.meta["seed_order"], "t0": prof.t0})
    text = _json(manifest, header, rows) if args.format == "json" else _csv(header, rows)
    _emit(args, text, manifest, time.perf_counter() - start)
    return 0


def cmd_phi(args) -> int:
    start = time.perf_counter()
    config = resolve_config(args)
    table = solve_phi(config)
    if args.r:
        r = np.asarray(args.r, dtype=float)
        try:
            phi, dphi, _ = eval_phi(table, r)
        except RangeError as exc:
            raise UsageError(str(exc)) from None
    else:
        r, phi, dphi = table.knots, table.values, table.derivs
    rows = np.column_stack([r, phi, dphi])
    _check_finite(rows)
    header = ["r", "phi", "dphi"]
    manifest = _manifest(args, config, {"points": int(r.size)})
    text = _json(manifest, header, rows) if args.format == "json" else _csv(header, rows)
    _emit(args, text, manifest, time.perf_counter() - start)
    return 0


def cmd_ff(args) -> int:
    start = time.perf_counter()
    if not args.t > 0 or not args.lam >= 0:
        raise UsageError("need --t > 0 and --lambda >= 0")
    if not 1 <= args.kmax <= MAX_ORDER:
        raise UsageError(f"--kmax must be in 1..{MAX_ORDER}")
    nodes = 64 if args.nodes is None else args.nodes
    if nodes < 2:
        raise UsageError("--nodes must be >= 2")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RuntimeWarning)
        est = ff_magnetization(args.t, args.lam, K=args.kmax, nodes=nodes)
    for w in caught:
        sys.stderr.write(f"warning: {w.message}\n")

    names = [f"f{k}" for k in range(1, est.K + 1)] + ["value", "trunc_bound"]
    values = list(est.terms) + [est.value, est.trunc_bound]
    if not all(math.isfinite(v) for v in values):
        raise SolverError("non-finite form-factor output")
    manifest = {"subcommand": "ff", "t": args.t, "lambda": args.lam, "K": est.K,
                "nodes": nodes, "output": args.output or "-", "format": args.format}
    if args.format == "json":
        body = {"manifest": manifest, **{n: float(_num(v)) for n, v in zip(names, values)},
                "warning": est.warning}
        text = json.dumps(body, indent=2, sort_keys=True) + "\n"
    else:
        lines = ["quantity,value"] + [f"{n},{_num(v)}" for n, v in zip(names, values)]
        lines.append(f"warning,{int(est.warning)}")
        text = "\n".join(lines) + "\n"
    _emit(args, text, manifest, time.perf_counter() - start)
    return 0


def cmd_verify(args) -> int:
    start = time.perf_counter()
    config = resolve_config(args)
    checks = run_suite(config, quick=args.quick)
    text = format_report(checks)
    passed = sum(c.passed for c in checks)
    manifest = _manifest(args, config, {"quick": args.quick, "passed": passed,
                                        "failed": len(checks) - passed})
    if args.output:
        sys.stdout.write(text)
    _emit(args, text, manifest, time.perf_counter() - start)
    return 0 if passed == len(checks) else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--r-max", type=float, help="matching radius of the phi solve (default 14)")
    common.add_argument("--t0", type=float, help="seed point of the u equation (default r_max)")
    common.add_argument("--tol", type=float, help="ODE relative tolerance (default 1e-12)")
    common.add_argument("--config", help="flat key=value file with solver settings")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--output", "-o", help="output file (default stdout)")

    parser = argparse.ArgumentParser(
        prog="boundary-ising",
        description="Local magnetization of the boundary Ising model in a boundary field.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", parents=[common], help="magnetization profile on a t grid")
    p.add_argument("--lambda", dest="lam", type=float, help="boundary coupling 4 pi h^2 / m")
    p.add_argument("--branch", choices=("stable", "metastable", "highT"), default="stable")
    p.add_argument("--t-min", type=float)
    p.add_argument("--t-max", type=float)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--grid", choices=("log", "linear"), default="log")
    p.add_argument("--mass", type=float, help="report sigma_abs and y = t/(2m) for this mass")
    p.add_argument("--nodes", type=int, help="form-factor nodes used for the seed")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("phi", parents=[common], help="tabulate phi and phi'")
    p.add_argument("--r", type=float, nargs="+", help="radii (default: every knot)")
    p.set_defaults(func=cmd_phi)

    p = sub.add_parser("ff", parents=[common], help="form-factor terms and truncation bound")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p.add_argument("--kmax", type=int, default=3)
    p.add_argument("--nodes", type=int)
    p.set_defaults(func=cmd_ff)

    p = sub.add_parser("verify", parents=[common], help="run the acceptance checks")
    p.add_argument("--quick", action="store_true", help="skip the slow oracle comparisons")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"{parser.prog}: error: {exc}\n")
        return 2
    except (SolverError, QuadratureError, DomainError, RangeError) as exc:
        sys.stderr.write(f"{parser.prog}: {type(exc).__name__}: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
