"""Plot CLI: `recycle-opt-plot <kind> --in sweep.csv --out figure.png`."""

import argparse
import sys

from .figures import KINDS, FigureSpec, render


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="recycle-opt-plot",
        description="Render figures from recycle-opt CSV outputs.",
    )
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("--in", dest="inputs", action="append", required=True,
                        help="input CSV (repeatable)")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--m", dest="epoch_length", type=int,
                        help="epoch length for trajectory gridlines")
    parser.add_argument("--x-scale", choices=["linear", "log"])
    parser.add_argument("--y-scale", choices=["linear", "log"])
    parser.add_argument("--target", dest="targets", action="append", type=float,
                        default=[], help="runtime_vs_c target accuracy (repeatable)")
    return parser


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    spec = FigureSpec(
        kind=args.kind,
        inputs=args.inputs,
        out=args.out,
        epoch_length=args.epoch_length,
        x_scale=args.x_scale,
        y_scale=args.y_scale,
        targets=args.targets,
    )
    try:
        render(spec)
    except (OSError, ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    print("wrote %s" % spec.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
