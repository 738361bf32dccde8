"""The damper-placement objective: continuous vector -> layout -> drift-ratio sum."""
from __future__ import annotations

import threading

import numpy as np

from .building import BuildingModel, ControlLaw, MrDamperParams
from .core import Bounds
from .ground_motion import GroundMotion
from .placement import DamperLayout, decode
from .simulation import drift_ratio_sum, peak_drifts


class PlacementProblem:
    """Callable objective over the box ``[0, max_per_story]^n``.

    Values are cached per decoded layout, so repeated layouts (common once
    a population has converged) cost one dictionary lookup. The cache never
    changes a value, only whether it is recomputed.
    """

    def __init__(self, model: BuildingModel, motion: GroundMotion, damper: MrDamperParams | None = None,
                 law=ControlLaw.PASSIVE_ON, total: int = 40, max_per_story: int = 5):
        self.model = model
        self.motion = motion
        self.damper = damper or MrDamperParams()
        self.law = ControlLaw(law)
        self.total = int(total)
        self.max_per_story = int(max_per_story)
        self.bounds = Bounds.uniform(0.0, self.max_per_story, model.n)
        self.uncontrolled_peaks = peak_drifts(model, None, motion, self.damper, self.law)
        drift_ratio_sum(self.uncontrolled_peaks, self.uncontrolled_peaks)  # degenerate-record check
        self._cache: dict[tuple, float] = {}
        self._lock = threading.Lock()
        self.calls = 0

    def layout(self, x) -> DamperLayout:
        return decode(x, self.total, self.max_per_story)

    def evaluate_layout(self, layout: DamperLayout) -> float:
        key = layout.counts
        value = self._cache.get(key)
        if value is None:
            peaks = peak_drifts(self.model, layout, self.motion, self.damper, self.law)
            value = drift_ratio_sum(peaks, self.uncontrolled_peaks)
            with self._lock:
                self._cache[key] = value
        return value

    def __call__(self, x) -> float:
        with self._lock:
            self.calls += 1
        return self.evaluate_layout(self.layout(x))

    @property
    def layouts_seen(self) -> list[tuple]:
        """Every distinct layout evaluated so far, in first-seen order."""
        with self._lock:
            return list(self._cache)

    @property
    def distinct_evaluations(self) -> int:
        return len(self._cache)

    def zero_layout_value(self) -> float:
        return float(self.model.n)

    def counts_array(self, x) -> np.ndarray:
        return self.layout(x).as_array()
