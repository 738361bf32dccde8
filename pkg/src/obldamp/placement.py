"""Damper layouts: decoding continuous vectors into feasible per-story counts,
exhaustive enumeration of bounded compositions, and the brute-force oracle.

Layout CSV format: header ``story,count`` then one row per story, story
numbered from 1 at the ground.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterator

import numpy as np

from .errors import InputError

ORACLE_LIMIT = 1_000_000


@dataclass(frozen=True)
class DamperLayout:
    counts: tuple
    total: int
    max_per_story: int = 5

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        object.__setattr__(self, "counts", counts)
        for story, c in enumerate(counts, start=1):
            if not 0 <= c <= self.max_per_story:
                raise InputError(f"story {story} has {c} dampers; allowed range is 0..{self.max_per_story}")
        if sum(counts) != self.total:
            raise InputError(f"layout places {sum(counts)} dampers; the total must be {self.total}")

    @property
    def n(self) -> int:
        return len(self.counts)

    def as_array(self) -> np.ndarray:
        return np.array(self.counts, dtype=float)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("story,count\n")
        for story, c in enumerate(self.counts, start=1):
            buf.write(f"{story},{c}\n")
        return buf.getvalue()


def _check_feasible(n: int, total: int, max_per_story: int):
    if n < 1:
        raise InputError("need at least one story")
    if max_per_story < 0 or total < 0:
        raise InputError("total and max_per_story must be non-negative")
    if total > n * max_per_story:
        raise InputError(f"cannot place {total} dampers in {n} stories with at most {max_per_story} each")


def decode(x, total: int, max_per_story: int) -> DamperLayout:
    """Round half up, then repair to the exact total by largest remainder.

    Surplus is removed from the story whose count overshoots its real value
    the most (ties: highest story); a deficit is filled at the story that
    undershoots the most (ties: lowest story). Remainders are updated after
    every unit move.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise InputError("x must be a vector")
    _check_feasible(x.size, total, max_per_story)
    if not np.all(np.isfinite(x)) or np.any(x < 0) or np.any(x > max_per_story):
        raise InputError(f"every entry of x must lie in [0, {max_per_story}]")
    counts = np.minimum(np.floor(x + 0.5), max_per_story).astype(int)
    remainder = x - counts
    surplus = int(counts.sum()) - total
    while surplus > 0:
        # most negative remainder among stories that still hold a damper; ties -> highest index
        masked = np.where(counts > 0, remainder, np.inf)
        i = x.size - 1 - int(np.argmin(masked[::-1]))
        counts[i] -= 1
        remainder[i] += 1.0
        surplus -= 1
    while surplus < 0:
        masked = np.where(counts < max_per_story, remainder, -np.inf)
        i = int(np.argmax(masked))
        counts[i] += 1
        remainder[i] -= 1.0
        surplus += 1
    return DamperLayout(tuple(counts), total, max_per_story)


@lru_cache(maxsize=None)
def count_layouts(n: int, total: int, max_per_story: int) -> int:
    """Number of bounded compositions of ``total`` into ``n`` parts in [0, max]."""
    if n == 0:
        return 1 if total == 0 else 0
    return sum(count_layouts(n - 1, total - c, max_per_story)
               for c in range(min(total, max_per_story) + 1))


def enumerate_layouts(n: int, total: int, max_per_story: int) -> Iterator[DamperLayout]:
    """Every feasible layout exactly once, in lexicographic order of counts."""
    _check_feasible(n, total, max_per_story)
    counts = [0] * n

    def fill(i, remaining):
        if i == n - 1:
            counts[i] = remaining
            yield DamperLayout(tuple(counts), total, max_per_story)
            return
        capacity_after = (n - 1 - i) * max_per_story
        for c in range(max(0, remaining - capacity_after), min(remaining, max_per_story) + 1):
            counts[i] = c
            yield from fill(i + 1, remaining - c)

    yield from fill(0, total)


def oracle_optimum(n: int, total: int, max_per_story: int,
                   objective: Callable[[DamperLayout], float]) -> tuple[DamperLayout, float]:
    """Exhaustive argmin; ties go to the lexicographically smallest layout."""
    _check_feasible(n, total, max_per_story)
    size = count_layouts(n, total, max_per_story)
    if size > ORACLE_LIMIT:
        raise InputError(f"oracle refused: {size} layouts exceeds the limit of {ORACLE_LIMIT}")
    best, best_value = None, math.inf
    for layout in enumerate_layouts(n, total, max_per_story):
        value = float(objective(layout))
        if value < best_value:
            best, best_value = layout, value
    return best, best_value


def parse_layout_csv(text: str, total: int | None = None, max_per_story: int = 5) -> DamperLayout:
    """Read a ``story,count`` table. ``total`` defaults to the sum of counts."""
    rows = list(csv.DictReader(line for line in text.splitlines() if line.strip()))
    try:
        pairs = sorted((int(r["story"]), int(r["count"])) for r in rows)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"layout CSV needs integer 'story' and 'count' columns: {exc}") from exc
    stories = [s for s, _ in pairs]
    if stories != list(range(1, len(stories) + 1)):
        raise InputError("layout CSV must list stories 1..n exactly once")
    counts = tuple(c for _, c in pairs)
    return DamperLayout(counts, sum(counts) if total is None else total, max_per_story)


def read_layout(path, total: int | None = None, max_per_story: int = 5) -> DamperLayout:
    with open(path) as fh:
        return parse_layout_csv(fh.read(), total, max_per_story)
