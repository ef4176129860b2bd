"""Command line front end: pick a figure kind, a sweep CSV, an output file."""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

from .figures import EmptyGroup, FigureSpec, SchemaError, render

_KIND_FLAGS = {
    "box-vs-sigma": "box_vs_sigma",
    "line-vs-load": "line_vs_load",
    "line-vs-dn": "line_vs_dn",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fluidsched-plot",
        description="Render simulator sweep CSVs as box or line figures.",
    )
    parser.add_argument("--kind", required=True, choices=sorted(_KIND_FLAGS))
    parser.add_argument("--csv", required=True, help="sweep CSV produced by fluidsched")
    parser.add_argument("--out", required=True, help="output figure (.pdf or .png)")
    parser.add_argument(
        "--schedulers", help="comma-separated subset of schedulers to draw"
    )
    parser.add_argument(
        "--linear-y", action="store_true", help="linear instead of log sojourn axis"
    )
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(
        kind=_KIND_FLAGS[args.kind],
        input_csv=args.csv,
        output=args.out,
        schedulers=tuple(s.strip() for s in args.schedulers.split(","))
        if args.schedulers
        else None,
        y_log=not args.linear_y,
    )
    try:
        render(spec)
    except (SchemaError, EmptyGroup, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
