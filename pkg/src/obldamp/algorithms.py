"""PSO, GSA and BB-BC population updates.

Each algorithm exposes a pure ``*_step`` function plus a small adapter class
used by :func:`obldamp.core.run`. Iteration numbers passed to the step
functions are 1-based (``1 .. max_iterations``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Algorithm, Bounds, Population, clamp_to_bounds
from .errors import InputError


# --------------------------------------------------------------------- PSO

@dataclass(frozen=True)
class PsoParams:
    inertia_start: float = 0.9
    inertia_end: float = 0.4
    c1: float = 2.0
    c2: float = 2.0
    v_max_fraction: float = 0.5

    def __post_init__(self):
        if self.c1 < 0 or self.c2 < 0:
            raise InputError("c1 and c2 must be non-negative")
        if not 0 < self.v_max_fraction <= 1:
            raise InputError("v_max_fraction must lie in (0, 1]")


@dataclass
class PsoState:
    pbest_positions: np.ndarray
    pbest_fitness: np.ndarray
    gbest_position: np.ndarray = field(init=False)
    gbest_fitness: float = field(init=False)

    def __post_init__(self):
        self.pbest_positions = np.array(self.pbest_positions, dtype=float)
        self.pbest_fitness = np.array(self.pbest_fitness, dtype=float)
        self._refresh_gbest()

    @classmethod
    def from_population(cls, pop: Population) -> "PsoState":
        return cls(pop.positions.copy(), pop.fitness.copy())

    def _refresh_gbest(self):
        g = int(np.argmin(self.pbest_fitness))
        self.gbest_position = self.pbest_positions[g].copy()
        self.gbest_fitness = float(self.pbest_fitness[g])

    def update(self, pop: Population):
        """Fold freshly evaluated positions into the personal/global memory."""
        better = pop.fitness < self.pbest_fitness
        self.pbest_positions[better] = pop.positions[better]
        self.pbest_fitness[better] = pop.fitness[better]
        self._refresh_gbest()


def pso_inertia(params: PsoParams, iteration: int, max_iterations: int) -> float:
    frac = iteration / max_iterations
    return params.inertia_start + (params.inertia_end - params.inertia_start) * frac


def pso_step(pop: Population, state: PsoState, params: PsoParams, iteration: int,
             max_iterations: int, bounds: Bounds, rng) -> Population:
    """Velocity/position update. Returns an unevaluated population.

    ``r1`` then ``r2`` are drawn as ``(N, D)`` uniforms.
    """
    n, d = pop.positions.shape
    w = pso_inertia(params, iteration, max_iterations)
    r1 = rng.random((n, d))
    r2 = rng.random((n, d))
    x = pop.positions
    v = (w * pop.velocities
         + params.c1 * r1 * (state.pbest_positions - x)
         + params.c2 * r2 * (state.gbest_position - x))
    vmax = params.v_max_fraction * bounds.span
    v = np.clip(v, -vmax, vmax)
    return Population(clamp_to_bounds(x + v, bounds), v)


class Pso:
    name = Algorithm.PSO

    def __init__(self, params: PsoParams | None = None):
        self.params = params or PsoParams()
        self.state: PsoState | None = None

    def initialize(self, pop: Population, bounds: Bounds, rng):
        vmax = self.params.v_max_fraction * bounds.span
        pop.velocities = (2.0 * rng.random(pop.positions.shape) - 1.0) * vmax
        self.state = PsoState.from_population(pop)

    def propose(self, pop, iteration, max_iterations, bounds, rng):
        return pso_step(pop, self.state, self.params, iteration, max_iterations, bounds, rng)

    def accept(self, pop):
        self.state.update(pop)

    def reseed(self, pop: Population, source: np.ndarray):
        n = len(pop)
        if np.array_equal(source, np.arange(n)):
            return
        st = self.state
        pos = np.empty_like(st.pbest_positions)
        fit = np.empty_like(st.pbest_fitness)
        for slot, src in enumerate(source):
            if src < n:
                pos[slot], fit[slot] = st.pbest_positions[src], st.pbest_fitness[src]
            else:
                # a surviving opposite carries no history: its pbest is itself
                pos[slot], fit[slot] = pop.positions[slot], pop.fitness[slot]
        st.pbest_positions, st.pbest_fitness = pos, fit
        st._refresh_gbest()


# --------------------------------------------------------------------- GSA

@dataclass(frozen=True)
class GsaParams:
    g0: float = 100.0
    tau: float = 20.0
    epsilon: float = 1e-10
    kbest_start_fraction: float = 1.0
    kbest_end: int = 1
    v_max_fraction: float = 0.5
    rand_i_per_dimension: bool = False  # draw rand_i as (N, D) instead of one scalar per agent

    def __post_init__(self):
        if self.g0 <= 0 or self.tau <= 0 or self.epsilon <= 0:
            raise InputError("g0, tau and epsilon must be positive")
        if not 0 < self.kbest_start_fraction <= 1 or self.kbest_end < 1:
            raise InputError("invalid K-best schedule")
        if not 0 < self.v_max_fraction <= 1:
            raise InputError("v_max_fraction must lie in (0, 1]")


def gsa_masses(fitness) -> np.ndarray:
    """Normalized masses for minimization; uniform when all fitnesses tie."""
    f = np.asarray(fitness, dtype=float)
    best, worst = f.min(), f.max()
    if best == worst:
        return np.full(f.size, 1.0 / f.size)
    m = (f - worst) / (best - worst)
    return m / m.sum()


def gsa_gravity(iteration: int, max_iterations: int, params: GsaParams | None = None) -> float:
    params = params or GsaParams()
    return params.g0 * math.exp(-params.tau * iteration / max_iterations)


def gsa_kbest(iteration: int, max_iterations: int, n: int, params: GsaParams) -> int:
    frac = iteration / max_iterations
    start = params.kbest_start_fraction * n
    k = math.floor(start + (params.kbest_end - start) * frac + 0.5)
    return min(n, max(1, k))


def gsa_step(pop: Population, params: GsaParams, iteration: int, max_iterations: int,
             bounds: Bounds, rng) -> Population:
    """One gravitational update on an evaluated population.

    Draws ``rand_j`` as an ``(N, K)`` uniform matrix (one scalar per
    attracted/attracting pair), then ``rand_i`` as ``N`` uniforms (``(N, D)``
    with ``rand_i_per_dimension``).
    Acceleration uses the mass-cancelled form, so zero-mass agents still move.
    """
    x = pop.positions
    n = x.shape[0]
    masses = gsa_masses(pop.fitness)
    g = gsa_gravity(iteration, max_iterations, params)
    k = gsa_kbest(iteration, max_iterations, n, params)
    kbest = np.argsort(pop.fitness, kind="stable")[:k]

    rand_j = rng.random((n, k))
    rand_i = rng.random((n, x.shape[1])) if params.rand_i_per_dimension else rng.random(n)[:, None]

    diff = x[kbest][None, :, :] - x[:, None, :]          # (N, K, D)
    dist = np.sqrt(np.einsum("ijd,ijd->ij", diff, diff))
    weight = rand_j * g * masses[kbest][None, :] / (dist + params.epsilon)
    weight[kbest[None, :] == np.arange(n)[:, None]] = 0.0
    accel = np.einsum("ij,ijd->id", weight, diff)

    vmax = params.v_max_fraction * bounds.span
    v = np.clip(rand_i * pop.velocities + accel, -vmax, vmax)
    return Population(clamp_to_bounds(x + v, bounds), v)


class Gsa:
    name = Algorithm.GSA

    def __init__(self, params: GsaParams | None = None):
        self.params = params or GsaParams()

    def initialize(self, pop, bounds, rng):
        pop.velocities = np.zeros_like(pop.positions)

    def propose(self, pop, iteration, max_iterations, bounds, rng):
        return gsa_step(pop, self.params, iteration, max_iterations, bounds, rng)

    def accept(self, pop):
        pass

    def reseed(self, pop, source):
        pass


# ------------------------------------------------------------------- BB-BC

@dataclass(frozen=True)
class BbbcParams:
    alpha: float = 1.0
    use_best_instead_of_com: bool = False

    def __post_init__(self):
        if self.alpha < 0:
            raise InputError("alpha must be non-negative")


def bbbc_center_of_mass(positions, fitness) -> np.ndarray:
    """Inverse-fitness weighted mean of ``positions``.

    Fitnesses are shifted by ``1 - min`` first whenever the minimum is not
    strictly positive, so every weight is finite.
    """
    x = np.atleast_2d(np.asarray(positions, dtype=float))
    f = np.asarray(fitness, dtype=float)
    fmin = f.min()
    if fmin <= 0:
        f = f + (1.0 - fmin)
    w = 1.0 / f
    return (w[:, None] * x).sum(axis=0) / w.sum()


def bbbc_step(pop: Population, params: BbbcParams, iteration: int, bounds: Bounds, rng) -> Population:
    """Big crunch on ``pop`` followed by a fresh big bang of the same size.

    ``r`` is drawn as an ``(N, D)`` standard-normal matrix.
    """
    if iteration < 1:
        raise InputError("iteration is 1-based")
    if params.use_best_instead_of_com:
        center = pop.positions[pop.best_index()]
    else:
        center = bbbc_center_of_mass(pop.positions, pop.fitness)
    r = rng.standard_normal(pop.positions.shape)
    candidates = center + r * params.alpha * bounds.span / iteration
    return Population(clamp_to_bounds(candidates, bounds))


class Bbbc:
    name = Algorithm.BBBC

    def __init__(self, params: BbbcParams | None = None):
        self.params = params or BbbcParams()

    def initialize(self, pop, bounds, rng):
        pass

    def propose(self, pop, iteration, max_iterations, bounds, rng):
        return bbbc_step(pop, self.params, iteration, bounds, rng)

    def accept(self, pop):
        pass

    def reseed(self, pop, source):
        pass


_REGISTRY = {Algorithm.PSO: (Pso, PsoParams), Algorithm.GSA: (Gsa, GsaParams),
             Algorithm.BBBC: (Bbbc, BbbcParams)}


def default_params(algorithm):
    return _REGISTRY[Algorithm(algorithm)][1]()


def make_algorithm(algorithm, params=None):
    cls, param_cls = _REGISTRY[Algorithm(algorithm)]
    if params is not None and not isinstance(params, param_cls):
        raise InputError(f"{cls.__name__} expects {param_cls.__name__}, got {type(params).__name__}")
    return cls(params)
