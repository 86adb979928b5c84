"""make-figures: render the standard figures from a sweep CSV.

Usage: make-figures SWEEP_CSV OUTDIR [--format png|pdf|svg]
                    [--constants-json FILE]

Limiting constants come from `cpmc constants` unless --constants-json
points at a saved copy of its output.  Exit codes: 0 success, 1 the
constants or rendering step failed, 2 usage or schema error.
"""

from __future__ import annotations

import argparse
import sys

from .reference import fetch_constants, parse_constants
from .render import render_all
from .sweep_data import SchemaError, load_sweep


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="make-figures",
        description="Render the moment and efficiency figures from a "
                    "changepoint-mc sweep CSV.")
    parser.add_argument("sweep_csv", help="sweep results in the cpmc CSV schema")
    parser.add_argument("outdir", help="directory for figures and manifest.json")
    parser.add_argument("--format", choices=("png", "pdf", "svg"),
                        default="png")
    parser.add_argument("--constants-json", metavar="FILE",
                        help="saved `cpmc constants` output to use instead "
                             "of invoking cpmc")
    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        table = load_sweep(args.sweep_csv)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        if args.constants_json:
            with open(args.constants_json) as fh:
                consts = parse_constants(fh.read())
        else:
            consts = fetch_constants(table.alphas)
        manifest = render_all(table, consts, args.outdir, args.sweep_csv,
                              fmt=args.format)
    except (RuntimeError, ValueError, KeyError, OSError) as exc:
        print(f"failure: {exc}", file=sys.stderr)
        return 1
    for entry in manifest["figures"]:
        print(f"wrote {entry['file']}")
    print(f"wrote manifest.json ({len(manifest['figures'])} figures, "
          f"{manifest['rows']} sweep rows)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
