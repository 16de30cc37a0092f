#!/usr/bin/env python3
"""Reproduce the default comparison experiment and render its figure.

Equivalent to:

    heavytail-bandits --out regret.csv --workers 2
    render_figures regret.csv --out regret.png

Takes several minutes at the default horizon.
"""

import sys

from heavytail_bandits.cli import cli_main


def main() -> int:
    args = sys.argv[1:] or ["--out", "regret.csv", "--workers", "2"]
    code = cli_main(args)
    if code != 0:
        return code
    try:
        from regret_figures.cli import cli_main as render_main
    except ImportError:
        print("regret-figures not installed; skipping the figure", file=sys.stderr)
        return 0
    out = "regret.csv"
    if "--out" in args:
        out = args[args.index("--out") + 1]
    return render_main([out, "--out", out.rsplit(".", 1)[0] + ".png"])


if __name__ == "__main__":
    sys.exit(main())
