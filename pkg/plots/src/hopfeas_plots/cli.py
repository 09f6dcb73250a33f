"""Command-line renderer: hopfeas-plots render --csv ... --figure ... --out ..."""

from __future__ import annotations

import argparse
import sys

from .figures import FIGURE_IDS, FigureSpec, SchemaMismatch, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="hopfeas-plots", description="Regenerate figures from hopfeas CSV outputs"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    rp = sub.add_parser("render", help="render one figure from a CSV")
    rp.add_argument("--csv", required=True, help="source CSV path")
    rp.add_argument("--figure", required=True, choices=FIGURE_IDS)
    rp.add_argument("--out", required=True, help="output image path (.svg/.pdf/.png)")
    rp.add_argument("--alpha-crit", type=float, default=25.0,
                    help="threshold marker position for fig1_sweep")
    rp.add_argument("--mu", type=float, default=0.7,
                    help="friction-cone line for fig3_slip")
    args = parser.parse_args(argv)

    spec = FigureSpec(source_csv=args.csv, figure_id=args.figure, output=args.out)
    try:
        render(spec, alpha_crit=args.alpha_crit, mu=args.mu)
    except (SchemaMismatch, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
