"""Command-line figure rendering: one subcommand per figure kind."""
from __future__ import annotations

import argparse
import sys

from .figures import FigureRequest, render
from .io import InputError

_KIND_HELP = {
    "heatmap": "archive occupant fitness on the feature grid (one archive JSON)",
    "convergence": "median + quartile band of a metric across seed runs",
    "ablation_bars": "final-metric bars from a sweep_summary.csv",
    "loss_bars": "corrected-metric loss bars from correction_report.json files",
    "distance_curve": "parent-offspring distance quartiles over generations",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="esqd-plots", description="Render figures from esqd run outputs."
    )
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind, help_text in _KIND_HELP.items():
        p = sub.add_parser(kind.replace("_", "-"), help=help_text)
        p.add_argument("inputs", nargs="+", help="input file path(s)")
        p.add_argument("--out", required=True, help="output image path")
        p.add_argument(
            "--metric",
            default="qd_score",
            help="metric column to plot where applicable (default: qd_score)",
        )
        p.add_argument("--title", default="", help="figure title")
        p.add_argument(
            "--label",
            action="append",
            default=[],
            help="legend label per input (repeatable)",
        )
        p.set_defaults(kind=kind)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        request = FigureRequest(
            kind=args.kind,
            inputs=tuple(args.inputs),
            output=args.out,
            metric=args.metric,
            title=args.title,
            labels=tuple(args.label),
        )
        out = render(request)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(str(out))
    return 0


if __name__ == "__main__":
    sys.exit(main())
