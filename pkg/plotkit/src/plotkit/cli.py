"""Command-line figure renderer for pentadrive CSV artifacts."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .figures import FigureKind, FigureSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plotkit",
        description="Render figures from pentadrive metrics/trace/table CSVs")
    parser.add_argument("--kind", required=True,
                        choices=[k.value for k in FigureKind] + ["sweep"],
                        help="figure layout (sweep is an alias for "
                             "five_row_sweep)")
    parser.add_argument("--in", dest="csv_path", required=True,
                        help="input CSV path")
    parser.add_argument("--out", required=True,
                        help="output image path (PNG and SVG are written)")
    parser.add_argument("--variant", action="append", default=[],
                        help="restrict sweep panels to these variant keys "
                             "(repeatable); default: all in the file")
    return parser


def parse_and_dispatch(argv: list[str]) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    kind = "five_row_sweep" if args.kind == "sweep" else args.kind
    spec = FigureSpec(csv_path=Path(args.csv_path), kind=FigureKind(kind),
                      out_path=Path(args.out), variants=tuple(args.variant))
    try:
        png, svg = render(spec)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {png} and {svg}")
    return 0


def main() -> None:
    sys.exit(parse_and_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
