"""cimeta-plot: render a cimeta CSV as a PNG.

Usage: cimeta-plot {grid_heatmap,pair_matrix,region_diagram} in.csv -o out.png
Exit codes: 0 success, 1 usage/schema/IO error.
"""

from __future__ import annotations

import argparse
import sys

from .io import SchemaError, margin_stamp, read_grid_csv, read_pair_csv
from .render import render_grid_heatmap, render_pair_matrix, render_region_diagram

KINDS = ("grid_heatmap", "pair_matrix", "region_diagram")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cimeta-plot", description=__doc__)
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("input", help="grid or pair-matrix CSV")
    parser.add_argument("-o", "--out", required=True, help="output PNG path")
    parser.add_argument("--bound", type=float,
                        help="color-scale bound (default: max |value|)")
    parser.add_argument("--alpha1", type=float, default=0.5,
                        help="alpha1 used for the region-diagram contour overlay")
    parser.add_argument("--title")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        stamp = margin_stamp(args.input)
        if args.kind == "pair_matrix":
            render_pair_matrix(read_pair_csv(args.input), args.out,
                               stamp=stamp, bound=args.bound, title=args.title)
        elif args.kind == "region_diagram":
            render_region_diagram(read_grid_csv(args.input), args.out,
                                  alpha1=args.alpha1, stamp=stamp,
                                  bound=args.bound, title=args.title)
        else:
            render_grid_heatmap(read_grid_csv(args.input), args.out,
                                stamp=stamp, bound=args.bound, title=args.title)
    except (SchemaError, ValueError) as exc:
        print(f"cimeta-plot: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"cimeta-plot: io error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
