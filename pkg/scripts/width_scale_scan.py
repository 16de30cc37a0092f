#!/usr/bin/env python3
"""Scan the shared exploration-width scale and print the regime table.

For each (width_scale, explore_rule) this reports every algorithm's mean
final regret and its growth ratio cum(T)/cum(T/4); a ratio near 4 means
the trace is still a straight line (pure exploration), values near 2 are
what square-root-like growth looks like. This is the tool that produced
the evidence in docs/ACCEPTANCE.md.

    python scripts/width_scale_scan.py --scales 1.0,0.1,0.01,0.003 --reps 3
"""

import argparse
import sys
import time

import numpy as np

from heavytail_bandits.harness import ALGOS, ExperimentConfig, run_one


def scan(noise, scale, rule, reps, fixed, T):
    cfg = ExperimentConfig(
        noise=noise,
        reps=reps,
        T=T,
        width_scale=scale,
        explore_rule=rule,
        fixed_contexts=fixed,
    )
    cells = []
    for algo in ALGOS:
        traces = [run_one(cfg, algo, r) for r in range(reps)]
        finals = np.array([t.final for t in traces])
        ratios = np.array([t.final / t.at_pull(cfg.T // 4) for t in traces])
        cells.append(f"{algo}:{finals.mean():7.1f}~{ratios.mean():4.2f}")
    return " | ".join(cells)


def main() -> int:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--scales", default="1.0,0.1,0.01,0.003")
    p.add_argument("--rules", default="greedy")
    p.add_argument("--noise", default="student_t")
    p.add_argument("--reps", type=int, default=3)
    p.add_argument("--T", type=int, default=10**4)
    p.add_argument("--fresh-contexts", action="store_true")
    args = p.parse_args()

    for rule in args.rules.split(","):
        for scale in (float(s) for s in args.scales.split(",")):
            t0 = time.time()
            row = scan(args.noise, scale, rule, args.reps, not args.fresh_contexts, args.T)
            print(
                f"{args.noise:9s} k={scale:<6g} {rule:6s} ({time.time() - t0:4.0f}s) {row}",
                flush=True,
            )
    return 0


if __name__ == "__main__":
    sys.exit(main())
