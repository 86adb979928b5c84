"""Command-line frontend for the simulation library.

Subcommands: sweep (gamma x alpha second-moment table), verify
(statistical checks against closed forms), constants (limiting values as
JSON), sample-path (dump one path as CSV), z0 (Brownian-limit reference
run), zinf (large-gamma-limit reference run).

Exit codes: 0 success, 1 numerical or check failure, 2 usage error.
Output files are written atomically and are byte-identical across
re-runs and worker counts at a fixed seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .densities import NumericalError, get_density, list_densities
from .montecarlo import (CellError, SweepConfig, estimate_second_moment,
                         format_sweep_csv, format_sweep_json, make_stream,
                         run_sweep, write_text_atomic)
from .path import (TruncationError, TruncationPolicy, path_csv_text,
                   sample_path)
from .reference import Z0Config, constants, sample_z0_many, sample_zinf_many, zeta3
from .verify import format_report_line, reports_to_json, run_verify_suite

WORKERS_ENV_VAR = "CPMC_WORKERS"

SWEEP_DEFAULTS = {
    "density": "gaussian",
    "gamma_grid": tuple(np.geomspace(0.1, 10.0, 13)),
    "alphas": (0.0, 0.25, 0.5),
    "reps": 100_000,
    "seed": 12345,
    "gap_T": 30.0,
    "max_events": 10_000_000,
    "workers": None,  # resolved from CPMC_WORKERS, else 1
    "format": "csv",
}


def _float_list(text: str) -> tuple:
    try:
        return tuple(float(part) for part in str(text).split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected a comma-separated list of numbers, got {text!r}")


_SWEEP_FIELD_TYPES = {
    "density": str,
    "gamma_grid": _float_list,
    "alphas": _float_list,
    "reps": int,
    "seed": int,
    "gap_T": float,
    "max_events": int,
    "workers": int,
    "out": str,
    "format": str,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cpmc",
        description="Monte Carlo for limiting likelihood-ratio processes "
                    "in change-point models.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    sweep = sub.add_parser(
        "sweep", help="second-moment table over a gamma x alpha grid",
        description="Estimate B, M^alpha and E^alpha over a gamma grid and "
                    "write one CSV/JSON row per (gamma, alpha) pair. "
                    "Precedence: flags > --config file > defaults.")
    sweep.add_argument("--config", metavar="FILE",
                       help="plain key=value file with any of the flags below "
                            "(keys use underscores, e.g. gamma_grid=0.5,1)")
    sweep.add_argument("--density", default=argparse.SUPPRESS,
                       help=f"jump density name, one of {list_densities()} "
                            "(default gaussian)")
    sweep.add_argument("--gamma-grid", type=_float_list, metavar="G1,G2,...",
                       default=argparse.SUPPRESS,
                       help="comma-separated gamma values (default: 13 "
                            "log-spaced points in [0.1, 10])")
    sweep.add_argument("--alphas", type=_float_list, metavar="A1,A2,...",
                       default=argparse.SUPPRESS,
                       help="comma-separated alpha values in [0, 1] "
                            "(default 0,0.25,0.5)")
    sweep.add_argument("--reps", type=int, default=argparse.SUPPRESS,
                       help="replications per gamma (default 100000)")
    sweep.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                       help="base seed for the replication streams "
                            "(default 12345)")
    sweep.add_argument("--gap-T", type=float, default=argparse.SUPPRESS,
                       help="stop a side once it falls this far below its "
                            "running maximum, in log units (default 30)")
    sweep.add_argument("--max-events", type=int, default=argparse.SUPPRESS,
                       help="per-side event cap; hitting it fails the "
                            "replication (default 10^7)")
    sweep.add_argument("--workers", type=int, default=argparse.SUPPRESS,
                       help="worker processes; default from the "
                            f"{WORKERS_ENV_VAR} environment variable, else 1")
    sweep.add_argument("--out", required=True, metavar="FILE",
                       help="output file path")
    sweep.add_argument("--format", choices=("csv", "json"),
                       default=argparse.SUPPRESS,
                       help="output format (default csv)")

    ver = sub.add_parser(
        "verify", help="statistical checks against closed-form identities",
        description="Run every verification check and print one report "
                    "line each; exits 1 if any check fails.")
    ver.add_argument("--seed", type=int, default=12345)
    ver.add_argument("--scale", type=float, default=1.0,
                     help="multiplier on the default replication counts "
                          "(default 1.0; use small values for smoke runs)")
    ver.add_argument("--density", default="gaussian",
                     help=f"jump density name, one of {list_densities()}")
    ver.add_argument("--json-out", metavar="FILE",
                     help="also write the reports as JSON to this file")

    con = sub.add_parser(
        "constants", help="closed-form limiting constants as JSON",
        description="Print zeta(3), B0 = 16 zeta(3), M0 = 26, E0 = B0/M0, "
                    "B_inf = 1/2 and the alpha-dependent M_inf, E_inf.")
    con.add_argument("--alphas", type=_float_list, default=(0.0, 0.25, 0.5),
                     metavar="A1,A2,...",
                     help="alphas for the M_inf/E_inf tables "
                          "(default 0,0.25,0.5)")
    con.add_argument("--out", metavar="FILE",
                     help="also write the JSON to this file")

    sp = sub.add_parser(
        "sample-path", help="dump one simulated path as CSV",
        description="Sample the two-sided compound Poisson path for one "
                    "replication and write rows side,index,event_time,cum_sum.")
    sp.add_argument("--gamma", type=float, required=True)
    sp.add_argument("--density", default="gaussian")
    sp.add_argument("--seed", type=int, default=12345)
    sp.add_argument("--rep", type=int, default=0,
                    help="replication index within the seed (default 0)")
    sp.add_argument("--gap-T", type=float, default=30.0)
    sp.add_argument("--max-events", type=int, default=10_000_000)
    sp.add_argument("--out", metavar="FILE",
                    help="output file (default: stdout)")

    z0 = sub.add_parser(
        "z0", help="Brownian-limit reference run",
        description="Simulate the small-gamma limit process on a grid and "
                    "report second moments of its estimator variables.")
    z0.add_argument("--grid-step", type=float, default=1e-3)
    z0.add_argument("--gap-T", type=float, default=10.0)
    z0.add_argument("--max-steps", type=int, default=100_000_000)
    z0.add_argument("--reps", type=int, default=100_000)
    z0.add_argument("--seed", type=int, default=12345)
    z0.add_argument("--out", metavar="FILE", help="output file (optional)")
    z0.add_argument("--format", choices=("csv", "json"), default="csv")

    zi = sub.add_parser(
        "zinf", help="large-gamma-limit reference run",
        description="Sample the two-exponentials limit process and report "
                    "second moments per alpha.")
    zi.add_argument("--alphas", type=_float_list, default=(0.0, 0.25, 0.5),
                    metavar="A1,A2,...")
    zi.add_argument("--reps", type=int, default=1_000_000)
    zi.add_argument("--seed", type=int, default=12345)
    zi.add_argument("--out", metavar="FILE", help="output file (optional)")
    zi.add_argument("--format", choices=("csv", "json"), default="csv")
    return parser


def _load_config_file(file_path: str) -> dict:
    values = {}
    with open(file_path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            key = key.strip().replace("-", "_")
            if not sep or not key:
                raise ValueError(
                    f"{file_path}:{lineno}: expected key=value, got {line!r}")
            if key not in _SWEEP_FIELD_TYPES:
                raise ValueError(
                    f"{file_path}:{lineno}: unknown key {key!r} (known: "
                    f"{', '.join(sorted(_SWEEP_FIELD_TYPES))})")
            values[key] = _SWEEP_FIELD_TYPES[key](value.strip())
    return values


def _resolve_sweep_settings(args: argparse.Namespace) -> dict:
    """Merge sweep settings: flags > config file > environment > defaults."""
    settings = dict(SWEEP_DEFAULTS)
    if settings["workers"] is None:
        settings["workers"] = int(os.environ.get(WORKERS_ENV_VAR, "1"))
    if getattr(args, "config", None):
        settings.update(_load_config_file(args.config))
    for key in _SWEEP_FIELD_TYPES:
        if hasattr(args, key):
            settings[key] = getattr(args, key)
    settings["out"] = args.out
    return settings


def _cmd_sweep(args) -> int:
    settings = _resolve_sweep_settings(args)
    config = SweepConfig(
        gamma_grid=settings["gamma_grid"], alphas=settings["alphas"],
        reps=settings["reps"], seed=settings["seed"],
        density_name=settings["density"],
        trunc=TruncationPolicy(gap_T=settings["gap_T"],
                               max_events=settings["max_events"]),
        workers=settings["workers"])

    def progress(row):
        print(f"gamma={row.gamma:g} alpha={row.alpha:g} "
              f"B_hat={row.B_hat:.6g} (se {row.B_se:.2g}) "
              f"M_hat={row.M_hat:.6g} (se {row.M_se:.2g}) "
              f"E_hat={row.E_hat:.6g} failures={row.trunc_failures}")

    rows = run_sweep(config, progress=progress)
    text = (format_sweep_csv(rows) if settings["format"] == "csv"
            else format_sweep_json(rows))
    write_text_atomic(text, settings["out"])
    print(f"wrote {len(rows)} rows to {settings['out']}")
    return 0


def _cmd_verify(args) -> int:
    d = get_density(args.density)
    reports = run_verify_suite(seed=args.seed, scale=args.scale, d=d)
    for report in reports:
        print(format_report_line(report))
    if args.json_out:
        write_text_atomic(reports_to_json(reports), args.json_out)
    failed = [r for r in reports if not r.passed]
    if failed:
        print(f"{len(failed)} of {len(reports)} checks failed", file=sys.stderr)
        return 1
    print(f"all {len(reports)} checks passed")
    return 0


def _constants_payload(alphas) -> dict:
    c = constants()
    return {
        "zeta3": zeta3(),
        "B0": c.B0,
        "M0": c.M0,
        "E0": c.E0,
        "B_inf": c.B_inf,
        "M_inf": {repr(float(a)): c.M_inf(a) for a in alphas},
        "E_inf": {repr(float(a)): c.E_inf(a) for a in alphas},
    }


def _cmd_constants(args) -> int:
    text = json.dumps(_constants_payload(args.alphas), indent=2) + "\n"
    sys.stdout.write(text)
    if args.out:
        write_text_atomic(text, args.out)
    return 0


def _cmd_sample_path(args) -> int:
    d = get_density(args.density)
    policy = TruncationPolicy(gap_T=args.gap_T, max_events=args.max_events)
    path = sample_path(d, args.gamma, policy, make_stream(args.seed, args.rep))
    text = path_csv_text(path)
    if args.out:
        write_text_atomic(text, args.out)
        print(f"wrote {len(path.plus.event_times) + len(path.minus.event_times)}"
              f" events to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


_SUMMARY_FIELDS = ("B_hat", "B_se", "M_hat", "M_se", "E_hat", "reps", "seed")


def _summary_text(rows: list, key_field: str, fmt: str) -> str:
    fields = (key_field,) + _SUMMARY_FIELDS
    if fmt == "json":
        return json.dumps([dict(zip(fields, row)) for row in rows],
                          indent=2) + "\n"
    lines = [",".join(fields)]
    for row in rows:
        lines.append(",".join(repr(v) if isinstance(v, float) else str(v)
                              for v in row))
    return "\n".join(lines) + "\n"


def _cmd_z0(args) -> int:
    config = Z0Config(grid_step=args.grid_step, gap_T=args.gap_T,
                      max_steps=args.max_steps)
    result = sample_z0_many(config, args.reps, make_stream(args.seed, 0))
    b_hat, b_se = estimate_second_moment(result.zeta)
    m_hat, m_se = estimate_second_moment(result.xi)
    rows = [(args.grid_step, b_hat, b_se, m_hat, m_se, b_hat / m_hat,
             args.reps, args.seed)]
    text = _summary_text(rows, "grid_step", args.format)
    print(f"grid_step={args.grid_step:g} B_hat={b_hat:.6g} (se {b_se:.2g}) "
          f"M_hat={m_hat:.6g} (se {m_se:.2g}) E_hat={b_hat / m_hat:.6g}")
    if args.out:
        write_text_atomic(text, args.out)
    return 0


def _cmd_zinf(args) -> int:
    zeta_arr, tau = sample_zinf_many(0.0, args.reps, make_stream(args.seed, 0))
    eta = tau - 2.0 * zeta_arr
    b_hat, b_se = estimate_second_moment(zeta_arr)
    rows = []
    for alpha in args.alphas:
        if not (0.0 <= alpha <= 1.0):
            raise ValueError(f"alpha values must lie in [0, 1], got {alpha}")
        xi = (1.0 - alpha) * tau - alpha * eta
        m_hat, m_se = estimate_second_moment(xi)
        rows.append((float(alpha), b_hat, b_se, m_hat, m_se, b_hat / m_hat,
                     args.reps, args.seed))
        print(f"alpha={alpha:g} B_hat={b_hat:.6g} (se {b_se:.2g}) "
              f"M_hat={m_hat:.6g} (se {m_se:.2g}) E_hat={b_hat / m_hat:.6g}")
    text = _summary_text(rows, "alpha", args.format)
    if args.out:
        write_text_atomic(text, args.out)
    return 0


_COMMANDS = {
    "sweep": _cmd_sweep,
    "verify": _cmd_verify,
    "constants": _cmd_constants,
    "sample-path": _cmd_sample_path,
    "z0": _cmd_z0,
    "zinf": _cmd_zinf,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.subcommand](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, TruncationError, CellError) as exc:
        print(f"failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
