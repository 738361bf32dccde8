from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

FIXTURES = Path(__file__).parent / "fixtures"
ROOT = Path(__file__).parents[1]


@pytest.fixture
def fixtures():
    return FIXTURES


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


class ForcedRng:
    """Stands in for ``numpy.random.Generator`` with fixed draws."""

    def __init__(self, uniform=0.5, normal=1.0):
        self.uniform = uniform
        self.normal = normal

    def random(self, size=None):
        return self.uniform if size is None else np.full(size, self.uniform, dtype=float)

    def standard_normal(self, size=None):
        return self.normal if size is None else np.full(size, self.normal, dtype=float)


# one line per acceptance criterion, printed after the run
ACCEPTANCE: dict = {}


def report(criterion: int, ok: bool, detail: str) -> bool:
    ACCEPTANCE[criterion] = f"criterion {criterion:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
