"""Algorithm-agnostic optimization scaffolding.

Every run owns a single ``numpy.random.Generator`` seeded from
``RunConfig.seed``. Draws happen in this fixed order:

1. initial positions, ``(N, D)`` uniform in the bounds;
2. algorithm initialization draws (PSO: initial velocities);
3. per iteration: the algorithm's own update draws, then one uniform
   draw deciding whether opposition jumping fires (only when OBL is on).

Iterations are generations. OBL adds objective evaluations but never
iterations, so a run always records exactly ``max_iterations`` entries in
its convergence series.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import InputError, NonFiniteFitnessError

Objective = Callable[[np.ndarray], float]


class Algorithm(str, enum.Enum):
    PSO = "PSO"
    GSA = "GSA"
    BBBC = "BBBC"


@dataclass(frozen=True)
class Bounds:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lower.shape != upper.shape or lower.ndim != 1:
            raise InputError("lower and upper bounds must be 1-D vectors of equal length")
        if np.any(lower > upper):
            raise InputError("every lower bound must be <= its upper bound")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def uniform(cls, lower: float, upper: float, dim: int) -> "Bounds":
        return cls(np.full(dim, float(lower)), np.full(dim, float(upper)))

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def span(self) -> np.ndarray:
        return self.upper - self.lower

    def contains(self, x) -> bool:
        x = np.asarray(x)
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))

    def sample(self, rng, n: int) -> np.ndarray:
        return self.lower + rng.random((n, self.dim)) * self.span


def clamp_to_bounds(position, bounds: Bounds) -> np.ndarray:
    """Clip ``position`` (a vector or an ``(N, D)`` stack) into ``bounds``."""
    x = np.asarray(position, dtype=float)
    if x.shape[-1] != bounds.dim:
        raise InputError(f"position has dimension {x.shape[-1]}, bounds have {bounds.dim}")
    return np.clip(x, bounds.lower, bounds.upper)


@dataclass
class Individual:
    position: np.ndarray
    velocity: np.ndarray = None
    fitness: float = math.nan

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float)
        if self.velocity is None:
            self.velocity = np.zeros_like(self.position)
        else:
            self.velocity = np.asarray(self.velocity, dtype=float)
        if self.velocity.shape != self.position.shape:
            raise InputError("position and velocity must have the same length")

    @property
    def evaluated(self) -> bool:
        return not math.isnan(self.fitness)


@dataclass
class Population:
    """Row-stacked individuals; row ``i`` of each array is one individual."""

    positions: np.ndarray
    velocities: np.ndarray = None
    fitness: np.ndarray = None

    def __post_init__(self):
        self.positions = np.atleast_2d(np.asarray(self.positions, dtype=float))
        n = self.positions.shape[0]
        if self.velocities is None:
            self.velocities = np.zeros_like(self.positions)
        if self.fitness is None:
            self.fitness = np.full(n, np.nan)
        self.velocities = np.asarray(self.velocities, dtype=float)
        self.fitness = np.asarray(self.fitness, dtype=float)

    @classmethod
    def from_individuals(cls, individuals: Sequence[Individual]) -> "Population":
        return cls(
            np.array([ind.position for ind in individuals]),
            np.array([ind.velocity for ind in individuals]),
            np.array([ind.fitness for ind in individuals], dtype=float),
        )

    def to_individuals(self) -> list[Individual]:
        return [self[i] for i in range(len(self))]

    def __len__(self):
        return self.positions.shape[0]

    def __getitem__(self, i) -> Individual:
        return Individual(self.positions[i].copy(), self.velocities[i].copy(), float(self.fitness[i]))

    def copy(self) -> "Population":
        return Population(self.positions.copy(), self.velocities.copy(), self.fitness.copy())

    def take(self, index) -> "Population":
        return Population(self.positions[index], self.velocities[index], self.fitness[index])

    def best_index(self) -> int:
        # np.argmin returns the first minimum: lowest index wins ties
        return int(np.argmin(self.fitness))


class Evaluator:
    """Counts objective calls and enforces the feasibility/finiteness contract.

    With ``threads > 1`` a batch is evaluated concurrently; results are
    collected in row order so the outcome does not depend on scheduling.
    """

    def __init__(self, problem: Objective, bounds: Bounds, threads: int = 1):
        self.problem = problem
        self.bounds = bounds
        self.threads = max(1, int(threads))
        self.count = 0

    def __call__(self, positions) -> np.ndarray:
        x = np.atleast_2d(np.asarray(positions, dtype=float))
        if not self.bounds.contains(x):
            raise InputError("attempted to evaluate a position outside the bounds")
        if self.threads > 1 and len(x) > 1:
            with ThreadPoolExecutor(self.threads) as pool:
                values = list(pool.map(self.problem, list(x)))
        else:
            values = [self.problem(row) for row in x]
        self.count += len(x)
        out = np.array(values, dtype=float)
        bad = np.flatnonzero(~np.isfinite(out))
        if bad.size:
            raise NonFiniteFitnessError(x[bad[0]], out[bad[0]])
        return out


def as_evaluator(problem, bounds: Bounds) -> Evaluator:
    return problem if isinstance(problem, Evaluator) else Evaluator(problem, bounds)


@dataclass
class RunConfig:
    algorithm: Algorithm = Algorithm.PSO
    population_size: int = 40
    max_iterations: int = 500
    seed: int = 0
    obl: Optional["OblConfig"] = None  # noqa: F821 - defined in obl
    params: object = None  # PsoParams / GsaParams / BbbcParams; defaults when None

    def __post_init__(self):
        self.algorithm = Algorithm(self.algorithm)
        if self.max_iterations < 1:
            raise InputError("max_iterations must be >= 1")
        if self.population_size < 2:
            raise InputError("population_size must be >= 2")
        if not 0 <= int(self.seed) < 2**64:
            raise InputError("seed must fit in an unsigned 64-bit integer")

    @property
    def label(self) -> str:
        name = self.algorithm.value if self.algorithm is not Algorithm.BBBC else "BB-BC"
        return f"OBL-{name}" if self.obl is not None else name


@dataclass
class RunResult:
    best_position: np.ndarray
    best_fitness: float
    convergence: np.ndarray
    iteration_of_best: int
    fitness_evaluations: int
    seed: int = 0
    label: str = ""

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "seed": int(self.seed),
            "best_fitness": float(self.best_fitness),
            "best_position": [float(v) for v in self.best_position],
            "iteration_of_best": int(self.iteration_of_best),
            "fitness_evaluations": int(self.fitness_evaluations),
            "convergence": [float(v) for v in self.convergence],
        }


@dataclass
class RunStatistics:
    f_best: float
    f_ave: float
    sigma: float
    iter_best: int
    n_runs: int
    best_run: int = field(default=0, repr=False)


def run(config: RunConfig, problem: Objective, bounds: Bounds, *, threads: int = 1) -> RunResult:
    """Minimize ``problem`` over ``bounds`` with the configured algorithm."""
    from .algorithms import make_algorithm
    from .obl import generation_jump, opposition_init

    rng = np.random.default_rng(int(config.seed))
    evaluate = Evaluator(problem, bounds, threads)
    algo = make_algorithm(config.algorithm, config.params)
    n = config.population_size

    if config.obl is not None and config.obl.use_opposition_init:
        pop = opposition_init(n, bounds, evaluate, rng)
    else:
        positions = bounds.sample(rng, n)
        pop = Population(positions, fitness=evaluate(positions))
    algo.initialize(pop, bounds, rng)

    i = pop.best_index()
    best_x, best_f = pop.positions[i].copy(), float(pop.fitness[i])
    convergence = np.empty(config.max_iterations)
    iteration_of_best = 0

    for k in range(1, config.max_iterations + 1):
        pop = algo.propose(pop, k, config.max_iterations, bounds, rng)
        pop.fitness = evaluate(pop.positions)
        algo.accept(pop)
        if config.obl is not None:
            pop, source = generation_jump(pop, bounds, evaluate, rng, config.obl, return_source=True)
            algo.reseed(pop, source)
        i = pop.best_index()
        if pop.fitness[i] < best_f:
            best_x, best_f = pop.positions[i].copy(), float(pop.fitness[i])
            iteration_of_best = k - 1
        convergence[k - 1] = best_f

    return RunResult(best_x, best_f, convergence, iteration_of_best, evaluate.count,
                     seed=int(config.seed), label=config.label)


def aggregate_runs(results: Sequence[RunResult]) -> RunStatistics:
    if not results:
        raise InputError("cannot aggregate an empty list of runs")
    values = np.array([r.best_fitness for r in results], dtype=float)
    best = int(np.argmin(values))
    return RunStatistics(
        f_best=float(values[best]),
        # rounding in the mean can dip one ulp below an all-equal minimum
        f_ave=max(float(values.mean()), float(values[best])),
        sigma=float(values.std(ddof=0)),
        iter_best=int(results[best].iteration_of_best),
        n_runs=len(results),
        best_run=best,
    )
