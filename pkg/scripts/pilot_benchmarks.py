"""Benchmark pilot: every algorithm with and without OBL on sphere, Rastrigin
and Rosenbrock, then a per-cell summary on stdout.

    python scripts/pilot_benchmarks.py [--config configs/bench.json] [--out results/bench] [--runs N]
"""
import argparse
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from obldamp.config import load_config
from obldamp.experiments import cmd_bench

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=ROOT / "configs" / "bench.json")
    ap.add_argument("--out", default=None)
    ap.add_argument("--runs", type=int, default=None)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    cfg = load_config(args.config)
    if args.runs:
        cfg = replace(cfg, bench=replace(cfg.bench, runs=args.runs))
    out = args.out or cfg.output
    start = time.perf_counter()
    cells = cmd_bench(cfg, out, args.threads)
    print(f"{'function':<11} {'algorithm':<5} {'obl':<4} {'mean':>12} {'median':>12} {'best':>12} {'evals':>8}")
    for c in cells:
        print(f"{c.function:<11} {c.algorithm:<5} {int(c.obl):<4} {c.values.mean():12.4e} "
              f"{np.median(c.values):12.4e} {c.values.min():12.4e} {c.evaluations.mean():8.0f}")
    print(f"wrote {Path(out) / 'bench.csv'} in {time.perf_counter() - start:.0f} s")


if __name__ == "__main__":
    main()
