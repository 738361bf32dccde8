"""Damper-placement campaign on the 40-story frame followed by a short report.

    python scripts/run_case_study.py                          # desk scale, minutes
    python scripts/run_case_study.py --config configs/case_study.json   # 30 runs x 500 iterations
"""
import argparse
import csv
import time
from pathlib import Path

from obldamp.config import load_config
from obldamp.experiments import cmd_optimize

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=ROOT / "configs" / "desk.json")
    ap.add_argument("--out", default=None)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    cfg = load_config(args.config)
    out = Path(args.out or cfg.output)
    start = time.perf_counter()
    _, problem = cmd_optimize(cfg, out, args.threads)
    elapsed = time.perf_counter() - start

    with open(out / "statistics.csv") as fh:
        for row in csv.DictReader(fh):
            diff = f"  diff {float(row['diff_pct']):+.2f}%" if row["diff_pct"] else ""
            print(f"{row['method']:<10} f_best {float(row['f_best']):.4f}  f_ave {float(row['f_ave']):.4f}"
                  f"  sigma {float(row['sigma']):.4f}  iter_best {row['iter_best']}{diff}")
    with open(out / "indices.csv") as fh:
        for row in csv.DictReader(fh):
            js = " ".join(f"{float(row[f'J{i}']):.3f}" for i in range(1, 7))
            print(f"{row['record']:<16} {row['method']:<10} J1..J6 {js}")
    print(f"{problem.distinct_evaluations} distinct layouts simulated in {elapsed:.0f} s; results in {out}")


if __name__ == "__main__":
    main()
