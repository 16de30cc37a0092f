"""render_figures <csv> --out <path> [--no-band]

Exit codes: 0 on success, 1 on schema problems or empty input.
"""

from __future__ import annotations

import argparse
import sys

from .plotting import PlotSpec, SchemaError, render


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="render_figures", description="Plot regret comparison figures")
    p.add_argument("csv", help="trace CSV produced by the simulator")
    p.add_argument("--out", required=True, help="output image path (.png, .pdf, .svg)")
    p.add_argument("--no-band", action="store_true", help="skip standard-error bands")
    p.add_argument("--panels", help="comma list of noise names (default: all in CSV)")
    p.add_argument("--curves", help="comma list of algorithms (default: all in CSV)")
    p.add_argument("--dpi", type=int, default=120)
    return p


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(parser.format_usage(), file=sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    spec = PlotSpec(
        input_csv=args.csv,
        output=args.out,
        panels=tuple(args.panels.split(",")) if args.panels else (),
        curves=tuple(args.curves.split(",")) if args.curves else (),
        band=not args.no_band,
        dpi=args.dpi,
    )
    try:
        render(spec)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {spec.output}")
    return 0


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
