"""Command line entry point.

    driftfield-plots --indir runs/trajectories --kind trajectory-grid --out fig.svg

Exit codes: 0 on success, 1 on configuration problems (bad kind, missing
or malformed input directory).
"""

from __future__ import annotations

import argparse
import sys

from .figures import FigureKind, FigureSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="driftfield-plots",
        description="Render figures from driftfield run directories.",
    )
    parser.add_argument("--indir", required=True,
                        help="run directory holding summary.json and cell subdirectories")
    parser.add_argument("--kind", required=True,
                        choices=[k.value for k in FigureKind],
                        help="figure to render")
    parser.add_argument("--out", default=None,
                        help="output image path; suffix picks the format "
                             "(default: <indir>/<kind>.svg)")
    parser.add_argument("--raster", action="store_true",
                        help="write PNG instead of SVG when --out does not say otherwise")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = FigureSpec(indir=args.indir, kind=args.kind, out=args.out,
                          raster=args.raster)
        out = render(spec)
    except (FileNotFoundError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
