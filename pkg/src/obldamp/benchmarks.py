"""Standard test functions with a known global minimum of zero."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import Bounds
from .errors import InputError


def sphere(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.dot(x, x))


def rastrigin(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(10.0 * x.size + np.sum(x * x - 10.0 * np.cos(2.0 * np.pi * x)))


def rosenbrock(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2))


@dataclass(frozen=True)
class Benchmark:
    name: str
    function: Callable[[np.ndarray], float]
    bounds: Bounds
    optimum: np.ndarray
    optimum_value: float = 0.0

    def __call__(self, x) -> float:
        return self.function(x)


_SUITE = {
    "sphere": (sphere, -5.12, 5.12, 0.0),
    "rastrigin": (rastrigin, -5.12, 5.12, 0.0),
    "rosenbrock": (rosenbrock, -2.048, 2.048, 1.0),
}

BENCHMARK_NAMES = tuple(_SUITE)


def benchmark_suite(name: str, dim: int) -> Benchmark:
    if name not in _SUITE:
        raise InputError(f"unknown benchmark {name!r}; choose from {', '.join(_SUITE)}")
    if dim < 1:
        raise InputError("dimension must be >= 1")
    func, lo, hi, opt = _SUITE[name]
    return Benchmark(name, func, Bounds.uniform(lo, hi, dim), np.full(dim, opt))
