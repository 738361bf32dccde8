"""Campaign drivers behind the command-line subcommands.

Each ``cmd_*`` function takes an :class:`~obldamp.config.ExperimentConfig`
and an output directory, writes CSV files there and returns the in-memory
results. Everything written is a pure function of the configuration and
master seed; wall-clock information goes to ``run.log`` only.

Output files
------------
baseline
    ``baseline_summary.csv``: record, scaling, pga, samples, dt, peak_drift,
    peak_acceleration, peak_base_shear. ``baseline_<record>.csv``: the
    uncontrolled response history (time, drift_i, acc_i, base_shear).
optimize
    ``statistics.csv``: method, algorithm, obl, runs, f_best, diff_pct, f_ave,
    sigma, iter_best, status. ``diff_pct`` is filled on OBL rows only.
    ``convergence.csv``: iteration then one best-so-far column per method
    (the method's best run). ``layouts.csv``: story then one count column
    per method; ``layouts/<method>.csv``: story, count. ``indices.csv``: the
    indices table below for each method's best layout. ``runs/<method>/
    run_<k>.json``: one file per run.
indices
    ``indices.csv``: record, method, scaling, J1..J6.
oracle
    ``oracle.csv``: method, runs, hits, hit_rate, best_value, gap, layout.
    The first row is the exhaustive optimum itself.
bench
    ``bench.csv``: algorithm, obl, function, dim, runs, mean, median, best,
    sigma, mean_evaluations, obl_delta_pct.

Floating values in the statistics, oracle and bench tables are written with
``repr`` so they round-trip exactly.
"""
from __future__ import annotations

import datetime
import json
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .benchmarks import benchmark_suite
from .case_study import PlacementProblem
from .config import ExperimentConfig, dump_config, run_seed
from .core import RunConfig, RunResult, aggregate_runs, run
from .errors import DegenerateRecordError, InputError
from .placement import DamperLayout, oracle_optimum, read_layout
from .simulation import integrate, performance_indices


class CampaignError(RuntimeError):
    """One or more cells failed; the others were still written."""

    def __init__(self, failed: dict):
        self.failed = failed
        super().__init__("failed cells: " + "; ".join(f"{k}: {v}" for k, v in failed.items()))


def _num(value) -> str:
    return "" if value is None else repr(float(value))


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def _table(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(str(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _safe(name: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in name)


class _Log:
    def __init__(self, out: Path):
        self.path = out / "run.log"
        out.mkdir(parents=True, exist_ok=True)

    def __call__(self, message: str):
        stamp = datetime.datetime.now().isoformat(timespec="seconds")
        with open(self.path, "a") as fh:
            fh.write(f"{stamp} {message}\n")


def diff_percent(f_std_best: float, f_obl_best: float) -> float:
    """Relative improvement of the OBL best over the standard best, in percent."""
    return 100.0 * (f_std_best - f_obl_best) / f_std_best


# ---------------------------------------------------------------- baseline

def cmd_baseline(cfg: ExperimentConfig, out) -> list[dict]:
    out = Path(out)
    log = _Log(out)
    model = cfg.load_model()
    rows, degenerate = [], []
    for spec in cfg.records:
        motion = spec.load()
        hist = integrate(model, None, motion, cfg.damper, cfg.law)
        row = {
            "record": spec.name, "scaling": spec.scaling, "pga": motion.pga,
            "samples": hist.steps, "dt": hist.dt,
            "peak_drift": float(np.max(np.abs(hist.drifts))),
            "peak_acceleration": float(np.max(np.abs(hist.absolute_accelerations))),
            "peak_base_shear": float(np.max(np.abs(hist.base_shear))),
        }
        rows.append(row)
        _write(out / f"baseline_{_safe(spec.name)}.csv", hist.to_csv())
        log(f"baseline {spec.name}: {hist.steps} samples")
        if min(row["peak_drift"], row["peak_acceleration"], row["peak_base_shear"]) == 0:
            degenerate.append(spec.name)
    header = ["record", "scaling", "pga", "samples", "dt", "peak_drift", "peak_acceleration", "peak_base_shear"]
    _write(out / "baseline_summary.csv", _table(header, [
        [r["record"], r["scaling"], _num(r["pga"]), r["samples"], _num(r["dt"]),
         _num(r["peak_drift"]), _num(r["peak_acceleration"]), _num(r["peak_base_shear"])] for r in rows]))
    if degenerate:
        raise DegenerateRecordError(f"zero uncontrolled normalizers for record(s): {', '.join(degenerate)}")
    return rows


# ----------------------------------------------------------------- indices

def indices_table(cfg: ExperimentConfig, layouts: dict, model=None) -> list[tuple]:
    """``(record, method, scaling, PerformanceIndices)`` for every record x layout."""
    model = model or cfg.load_model()
    rows = []
    for spec in cfg.records:
        motion = spec.load()
        unc = integrate(model, None, motion, cfg.damper, cfg.law)
        for method, layout in layouts.items():
            ctrl = integrate(model, layout, motion, cfg.damper, cfg.law)
            rows.append((spec.name, method, spec.scaling, performance_indices(ctrl, unc)))
    return rows


def _indices_csv(rows) -> str:
    header = ["record", "method", "scaling", "J1", "J2", "J3", "J4", "J5", "J6"]
    return _table(header, [[r, m, s] + [_num(j) for j in idx.as_tuple()] for r, m, s, idx in rows])


def check_layout(cfg: ExperimentConfig, layout: DamperLayout, n: int) -> DamperLayout:
    if layout.n != n:
        raise InputError(f"layout has {layout.n} stories, the building has {n}")
    if layout.total > cfg.total_dampers:
        raise InputError(f"layout places {layout.total} dampers, more than the total of {cfg.total_dampers}")
    return layout


def cmd_indices(cfg: ExperimentConfig, out, layout_paths) -> list[tuple]:
    out = Path(out)
    _Log(out)("indices")
    model = cfg.load_model()
    layouts = {}
    for path in layout_paths:
        layout = read_layout(path, None, cfg.max_per_story)
        layouts[Path(path).stem] = check_layout(cfg, layout, model.n)
    if not layouts:
        raise InputError("indices needs at least one --layout file")
    rows = indices_table(cfg, layouts, model)
    _write(out / "indices.csv", _indices_csv(rows))
    return rows


# ---------------------------------------------------------------- optimize

@dataclass
class CellResult:
    method: str
    template: RunConfig
    results: list
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def statistics(self):
        return aggregate_runs(self.results)

    def best(self) -> RunResult:
        return self.results[self.statistics().best_run]


def cell_seed(master_seed: int, template: RunConfig, run_index: int, tag: str = "optimize") -> int:
    return run_seed(master_seed, tag, template.algorithm.value, int(template.obl is not None), run_index)


def _run_cell(method, template, problem, runs, master_seed, threads, tag) -> CellResult:
    configs = [replace(template, seed=cell_seed(master_seed, template, k, tag)) for k in range(runs)]
    try:
        if threads > 1 and runs > 1:
            with ThreadPoolExecutor(threads) as pool:
                results = list(pool.map(lambda c: run(c, problem, problem.bounds), configs))
        else:
            results = [run(c, problem, problem.bounds) for c in configs]
    except Exception as exc:  # the cell is aborted, the campaign goes on
        return CellResult(method, template, [], f"{type(exc).__name__}: {exc}\n{traceback.format_exc()}")
    return CellResult(method, template, results)


def statistics_rows(cells: list[CellResult]) -> list[list]:
    std_best = {c.template.algorithm: c.statistics().f_best
                for c in cells if c.ok and c.template.obl is None}
    rows = []
    for c in cells:
        obl = int(c.template.obl is not None)
        if not c.ok:
            rows.append([c.method, c.template.algorithm.value, obl, 0, "", "", "", "", "", "failed"])
            continue
        s = c.statistics()
        diff = ""
        if obl and c.template.algorithm in std_best:
            diff = _num(diff_percent(std_best[c.template.algorithm], s.f_best))
        rows.append([c.method, c.template.algorithm.value, obl, s.n_runs, _num(s.f_best), diff,
                     _num(s.f_ave), _num(s.sigma), s.iter_best + 1, "ok"])
    return rows


STATISTICS_HEADER = ["method", "algorithm", "obl", "runs", "f_best", "diff_pct", "f_ave", "sigma", "iter_best", "status"]


def cmd_optimize(cfg: ExperimentConfig, out, threads: int = 1, problem: PlacementProblem | None = None):
    """Run every cell and write the report files; returns ``(cells, problem)``.

    Raises :class:`CampaignError` after writing everything if any cell failed.
    """
    out = Path(out)
    log = _Log(out)
    _write(out / "config.json", dump_config(cfg))
    model = cfg.load_model()
    design = cfg.records[cfg.design_record]
    if problem is None:
        problem = PlacementProblem(model, design.load(), cfg.damper, cfg.law,
                                   cfg.total_dampers, cfg.max_per_story)
    cells = []
    for method, template in cfg.cells():
        log(f"cell {method}: {cfg.runs} runs")
        cell = _run_cell(method, template, problem, cfg.runs, cfg.master_seed, threads, "optimize")
        cells.append(cell)
        cell_dir = out / "runs" / _safe(method)
        if not cell.ok:
            _write(cell_dir / "error.txt", cell.error)
            log(f"cell {method} failed: {cell.error.splitlines()[0]}")
            continue
        for k, result in enumerate(cell.results):
            record = result.to_dict()
            record["layout"] = list(problem.layout(result.best_position).counts)
            _write(cell_dir / f"run_{k:03d}.json", json.dumps(record, indent=1) + "\n")
        log(f"cell {method}: f_best {cell.statistics().f_best!r}")

    _write(out / "statistics.csv", _table(STATISTICS_HEADER, statistics_rows(cells)))
    good = [c for c in cells if c.ok]
    if good:
        iters = cfg.iterations
        conv = [[k + 1] + [_num(c.best().convergence[k]) for c in good] for k in range(iters)]
        _write(out / "convergence.csv", _table(["iteration"] + [c.method for c in good], conv))
        layouts = {c.method: problem.layout(c.best().best_position) for c in good}
        rows = [[i + 1] + [layouts[m].counts[i] for m in layouts] for i in range(model.n)]
        _write(out / "layouts.csv", _table(["story"] + list(layouts), rows))
        for method, layout in layouts.items():
            _write(out / "layouts" / f"{_safe(method)}.csv", layout.to_csv())
        _write(out / "indices.csv", _indices_csv(indices_table(cfg, layouts, model)))
    log(f"distinct layouts simulated: {problem.distinct_evaluations}")
    failed = {c.method: c.error.splitlines()[0] for c in cells if not c.ok}
    if failed:
        raise CampaignError(failed)
    return cells, problem


# ------------------------------------------------------------------ oracle

@dataclass
class OracleReport:
    layout: DamperLayout
    value: float
    rows: list  # (method, runs, hits, best_value, best_layout)


def oracle_problem(cfg: ExperimentConfig) -> PlacementProblem:
    spec = cfg.oracle
    model = cfg.load_model() if cfg.stories == spec.stories else \
        replace(cfg, stories=spec.stories).load_model()
    damper = cfg.damper.with_mode(spec.damper_mode)
    motion = cfg.records[cfg.design_record].load()
    return PlacementProblem(model, motion, damper, cfg.law, spec.total, spec.max_per_story)


def cmd_oracle(cfg: ExperimentConfig, out, threads: int = 1) -> OracleReport:
    out = Path(out)
    log = _Log(out)
    spec = cfg.oracle
    problem = oracle_problem(cfg)
    best, value = oracle_optimum(problem.model.n, spec.total, spec.max_per_story, problem.evaluate_layout)
    log(f"oracle optimum {best.counts} = {value!r}")
    rows = []
    for method, template in cfg.cells():
        template = replace(template, population_size=spec.population_size, max_iterations=spec.iterations)
        cell = _run_cell(method, template, problem, spec.n_seeds, cfg.master_seed, threads, "oracle")
        if not cell.ok:
            raise RuntimeError(f"oracle cell {method} failed: {cell.error}")
        layouts = [problem.layout(r.best_position) for r in cell.results]
        hits = sum(layout == best for layout in layouts)
        i = int(np.argmin([r.best_fitness for r in cell.results]))
        rows.append((method, len(layouts), hits, cell.results[i].best_fitness, layouts[i]))
    body = [["oracle", "", "", "", _num(value), _num(0.0), " ".join(map(str, best.counts))]]
    for method, n, hits, found, layout in rows:
        body.append([method, n, hits, _num(hits / n), _num(found), _num(found - value),
                     " ".join(map(str, layout.counts))])
    _write(out / "oracle.csv", _table(["method", "runs", "hits", "hit_rate", "best_value", "gap", "layout"], body))
    return OracleReport(best, value, rows)


# ------------------------------------------------------------------- bench

@dataclass
class BenchCell:
    algorithm: str
    obl: bool
    function: str
    values: np.ndarray
    evaluations: np.ndarray
    convergence_monotone: bool


def run_bench(cfg: ExperimentConfig, threads: int = 1, log=None) -> list[BenchCell]:
    spec = cfg.bench
    cells = []
    for fname in spec.functions:
        bench = benchmark_suite(fname, spec.dim)
        for method, template in cfg.cells():
            template = replace(template, population_size=spec.population_size, max_iterations=spec.iterations)
            # standard and OBL variants share one seed set per (function, algorithm)
            configs = [replace(template, seed=run_seed(cfg.master_seed, "bench", fname, template.algorithm.value, k))
                       for k in range(spec.runs)]
            if threads > 1:
                with ThreadPoolExecutor(threads) as pool:
                    results = list(pool.map(lambda c: run(c, bench, bench.bounds), configs))
            else:
                results = [run(c, bench, bench.bounds) for c in configs]
            monotone = all(bool(np.all(np.diff(r.convergence) <= 0)) for r in results)
            cells.append(BenchCell(template.algorithm.value, template.obl is not None, fname,
                                   np.array([r.best_fitness for r in results]),
                                   np.array([r.fitness_evaluations for r in results]), monotone))
            if log:
                log(f"bench {fname} {method}: mean {cells[-1].values.mean()!r}")
    return cells


def cmd_bench(cfg: ExperimentConfig, out, threads: int = 1) -> list[BenchCell]:
    out = Path(out)
    log = _Log(out)
    cells = run_bench(cfg, threads, log)
    std_mean = {(c.algorithm, c.function): c.values.mean() for c in cells if not c.obl}
    rows = []
    for c in cells:
        delta = ""
        base = std_mean.get((c.algorithm, c.function))
        if c.obl and base is not None and base != 0:
            delta = _num(100.0 * (base - c.values.mean()) / base)
        rows.append([c.algorithm, int(c.obl), c.function, cfg.bench.dim, c.values.size,
                     _num(c.values.mean()), _num(np.median(c.values)), _num(c.values.min()),
                     _num(c.values.std()), _num(c.evaluations.mean()), delta])
    header = ["algorithm", "obl", "function", "dim", "runs", "mean", "median", "best", "sigma",
              "mean_evaluations", "obl_delta_pct"]
    _write(out / "bench.csv", _table(header, rows))
    return cells


__all__ = ["cmd_baseline", "cmd_optimize", "cmd_indices", "cmd_oracle", "cmd_bench", "run_bench",
           "diff_percent", "CampaignError", "CellResult", "OracleReport", "BenchCell", "indices_table"]
