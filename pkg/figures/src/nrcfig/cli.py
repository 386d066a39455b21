"""Command line entry point: render a preset figure from a results CSV."""

import argparse
import sys

from .render import render
from .specs import PRESET_NAMES, make_spec

EXIT_CONFIG = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nrcfig",
        description="Render simulation-result CSV files as figures")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render one preset figure")
    p.add_argument("--preset", required=True, choices=PRESET_NAMES)
    p.add_argument("--in", dest="csv_path", required=True,
                   help="input CSV produced by the simulation harness")
    p.add_argument("--out", dest="out_path", required=True,
                   help="output image path (png)")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else 0
    try:
        spec = make_spec(args.preset, args.csv_path, args.out_path)
        path = render(spec)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
