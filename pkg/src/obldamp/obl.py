"""Opposition-based learning: opposite points, opposition initialization and
generation jumping over the static search box."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Bounds, Population, as_evaluator
from .errors import InputError


@dataclass(frozen=True)
class OblConfig:
    use_opposition_init: bool = True
    jump_rate: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.jump_rate <= 1.0:
            raise InputError("jump_rate must lie in [0, 1]")


def opposite_point(x, bounds: Bounds) -> np.ndarray:
    """Mirror ``x`` about the box midpoint: ``lower + upper - x``.

    Accepts a single vector or an ``(N, D)`` stack. The result is clipped
    so floating rounding can never push it outside the box, and the bounds
    themselves are exchanged exactly.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != bounds.dim:
        raise InputError(f"point has dimension {x.shape[-1]}, bounds have {bounds.dim}")
    if not bounds.contains(x):
        raise InputError("point lies outside the bounds")
    xo = np.clip((bounds.lower + bounds.upper) - x, bounds.lower, bounds.upper)
    # (a + b) - b can lose a to rounding; the end points map onto each other exactly
    xo = np.where(x == bounds.lower, bounds.upper, xo)
    return np.where(x == bounds.upper, bounds.lower, xo)


def _best_half(union: Population, n: int) -> np.ndarray:
    # stable sort: originals come first in the union, so they win ties
    order = np.argsort(union.fitness, kind="stable")
    return np.sort(order[:n])


def opposition_init(n: int, bounds: Bounds, problem, rng) -> Population:
    """Draw ``n`` uniform points, add their opposites, keep the best ``n``."""
    if n < 1:
        raise InputError("n must be >= 1")
    evaluate = as_evaluator(problem, bounds)
    x = bounds.sample(rng, n)
    xo = opposite_point(x, bounds)
    both = np.vstack([x, xo])
    union = Population(both, fitness=evaluate(both))
    return union.take(_best_half(union, n))


def generation_jump(population: Population, bounds: Bounds, problem, rng, config: OblConfig,
                    *, return_source: bool = False):
    """Opposition jump over a whole evaluated population.

    One uniform draw decides whether the jump fires. If it does, every member
    is mirrored, the mirrors are evaluated, and the best ``len(population)``
    of the union survive in union order (originals first). Surviving
    opposites start with zero velocity.

    With ``return_source=True`` also returns, per survivor, its index in the
    union: values below ``len(population)`` are originals, the rest are
    opposites of member ``source - len(population)``.
    """
    n = len(population)
    if n == 0:
        raise InputError("population must not be empty")
    fire = rng.random() < config.jump_rate
    if not fire:
        out, source = population, np.arange(n)
    else:
        evaluate = as_evaluator(problem, bounds)
        xo = opposite_point(population.positions, bounds)
        union = Population(
            np.vstack([population.positions, xo]),
            np.vstack([population.velocities, np.zeros_like(xo)]),
            np.concatenate([population.fitness, evaluate(xo)]),
        )
        source = _best_half(union, n)
        out = union.take(source)
    return (out, source) if return_source else out
