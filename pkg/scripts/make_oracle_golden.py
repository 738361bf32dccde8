"""Exhaustively evaluate every layout of the 5-story toy frame and store the
optimum as a test fixture.

    python scripts/make_oracle_golden.py [--config configs/oracle.json] [--out tests/fixtures/oracle_golden.json]
"""
import argparse
import json
from pathlib import Path

from obldamp.config import load_config
from obldamp.experiments import oracle_problem
from obldamp.placement import count_layouts, enumerate_layouts

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=ROOT / "configs" / "oracle.json")
    ap.add_argument("--out", default=ROOT / "tests" / "fixtures" / "oracle_golden.json")
    args = ap.parse_args()

    cfg = load_config(args.config)
    spec = cfg.oracle
    problem = oracle_problem(cfg)
    values = {layout.counts: problem.evaluate_layout(layout)
              for layout in enumerate_layouts(problem.model.n, spec.total, spec.max_per_story)}
    best = min(values, key=lambda k: (values[k], k))
    record = cfg.records[cfg.design_record]
    golden = {
        "stories": problem.model.n,
        "total": spec.total,
        "max_per_story": spec.max_per_story,
        "damper_mode": spec.damper_mode,
        "record": {"seed": record.seed, "duration": record.duration, "dt": record.dt,
                   "cutoff_hz": record.cutoff_hz, "target_pga": record.target_pga},
        "layout_count": count_layouts(problem.model.n, spec.total, spec.max_per_story),
        "optimum_layout": list(best),
        "optimum_value": values[best],
        "all_values": [[list(k), v] for k, v in values.items()],
    }
    Path(args.out).write_text(json.dumps(golden, indent=1) + "\n")
    print(f"{len(values)} layouts; optimum {best} = {values[best]!r}")


if __name__ == "__main__":
    main()
