"""Command-line front end.

Exit codes: 0 success, 1 invalid configuration or flags, 2 I/O failure.
A config file is a flat `key=value` text file mirroring the flag names
(# starts a comment); explicit flags override file entries.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields

from .harness import (
    ALGOS,
    NOISES,
    ExperimentConfig,
    aggregate,
    replace,
    run_experiment,
    write_csv,
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="heavytail-bandits", description="Heavy-tailed linear bandit simulator")
    p.add_argument("--algos", help=f"comma list from {{{','.join(ALGOS)}}}")
    p.add_argument("--noise", help=f"comma list from {{{','.join(NOISES)}}}")
    p.add_argument("--d", type=int, help="feature dimension")
    p.add_argument("--K", type=int, help="number of arms")
    p.add_argument("--T", type=int, help="pull budget per run")
    p.add_argument("--eps", type=float, help="moment order parameter in (0,1]")
    p.add_argument("--delta", type=float, help="confidence level in (0,1)")
    p.add_argument("--v-central", type=float, help="central moment bound override")
    p.add_argument("--v-raw", type=float, help="raw moment bound override")
    p.add_argument("--reps", type=int, help="independent repetitions")
    p.add_argument("--seed", type=int, help="base seed")
    p.add_argument("--fixed-contexts", action=argparse.BooleanOptionalAction,
                   default=None,
                   help="draw one context set per run instead of per round")
    p.add_argument("--centered-pareto", action="store_true", default=None,
                   help="subtract the Pareto noise mean")
    p.add_argument("--width-scale", type=float,
                   help="common scale on every algorithm's exploration width")
    p.add_argument("--explore-rule", choices=["widest", "ucb"],
                   help="which qualifying arm the master explores")
    p.add_argument("--workers", type=int, help="process pool size")
    p.add_argument("--full-trace", action="store_true", default=None,
                   help="write every pull instead of ~1000 samples per trace")
    p.add_argument("--out", help="output CSV path")
    p.add_argument("--config", help="key=value config file; flags take precedence")
    return p


# config-file / flag name -> ExperimentConfig field
_KEY_MAP = {
    "algos": "algos",
    "noise": "noise",
    "d": "d",
    "k": "K",
    "t": "T",
    "eps": "eps",
    "delta": "delta",
    "v_central": "v_central",
    "v_raw": "v_raw",
    "reps": "reps",
    "seed": "base_seed",
    "fixed_contexts": "fixed_contexts",
    "centered_pareto": "centered_pareto",
    "width_scale": "width_scale",
    "explore_rule": "explore_rule",
    "workers": "workers",
    "full_trace": "full_trace",
    "out": "out_path",
}

_BOOL_KEYS = {"fixed_contexts", "centered_pareto", "full_trace"}
_INT_KEYS = {"d", "k", "t", "reps", "seed", "workers"}
_FLOAT_KEYS = {"eps", "delta", "v_central", "v_raw", "width_scale"}


def parse_config_file(path: str) -> dict:
    values = {}
    with open(path) as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw.rstrip()!r}")
            key, _, value = line.partition("=")
            key = key.strip().lower().replace("-", "_")
            value = value.strip()
            if key not in _KEY_MAP:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            if key in _BOOL_KEYS:
                parsed = value.lower() in ("1", "true", "yes", "on")
            elif key in _INT_KEYS:
                parsed = int(value)
            elif key in _FLOAT_KEYS:
                parsed = float(value)
            else:
                parsed = value
            values[_KEY_MAP[key]] = parsed
    return values


def _split_list(value: str) -> tuple[str, ...]:
    return tuple(s.strip() for s in value.split(",") if s.strip())


def resolve_settings(args: argparse.Namespace) -> tuple[dict, tuple[str, ...]]:
    """Merge config file and flags; returns (field overrides, noise list)."""
    settings: dict = {}
    if args.config is not None:
        settings.update(parse_config_file(args.config))

    flag_values = {
        "algos": args.algos,
        "noise": args.noise,
        "d": args.d,
        "K": args.K,
        "T": args.T,
        "eps": args.eps,
        "delta": args.delta,
        "v_central": args.v_central,
        "v_raw": args.v_raw,
        "reps": args.reps,
        "base_seed": args.seed,
        "fixed_contexts": args.fixed_contexts,
        "centered_pareto": args.centered_pareto,
        "width_scale": args.width_scale,
        "explore_rule": args.explore_rule,
        "workers": args.workers,
        "full_trace": args.full_trace,
        "out_path": args.out,
    }
    settings.update({k: v for k, v in flag_values.items() if v is not None})

    if "algos" in settings and isinstance(settings["algos"], str):
        settings["algos"] = _split_list(settings["algos"])

    noises = ("student_t", "pareto")
    if "noise" in settings:
        raw = settings.pop("noise")
        noises = _split_list(raw) if isinstance(raw, str) else tuple(raw)
    return settings, noises


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        settings, noises = resolve_settings(args)
        unknown = set(noises) - set(NOISES)
        if unknown:
            raise ValueError(f"unknown noise models: {sorted(unknown)}")
        configs = [ExperimentConfig(**settings, noise=noise) for noise in noises]
    except _UsageError as exc:
        print(parser.format_usage(), file=sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, TypeError, OSError) as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return 1

    traces = []
    for config in configs:
        traces.extend(run_experiment(config))

    out_path = configs[0].out_path
    try:
        write_csv(traces, out_path, full=configs[0].full_trace)
    except OSError as exc:
        print(f"error: cannot write {out_path}: {exc}", file=sys.stderr)
        return 2

    for config in configs:
        for algo in config.algos:
            group = [t for t in traces if t.algo == algo and t.noise == config.noise]
            mean, stderr = aggregate(group)
            print(
                f"{config.noise:>10} {algo:>8}: final regret "
                f"{mean[-1]:10.2f} +- {stderr[-1]:.2f} ({len(group)} reps)"
            )
    print(f"wrote {out_path}")
    return 0


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
