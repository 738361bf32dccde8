"""Time-history response of the controlled frame, the drift-ratio objective and
the J1-J6 performance indices."""
from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .building import BuildingModel, ControlLaw, MrDamperParams
from .errors import DegenerateRecordError, InputError, SimulationError
from .ground_motion import GroundMotion

MAX_STEP = 0.005
FORCE_TOL = 1e-8
MAX_FIXED_POINT = 50


@dataclass(eq=False)
class ResponseHistory:
    dt: float
    displacements: np.ndarray          # (steps, n)
    velocities: np.ndarray             # (steps, n)
    absolute_accelerations: np.ndarray  # (steps, n)
    damper_forces: np.ndarray          # (steps, n) net device force per story
    masses: np.ndarray

    @property
    def n(self) -> int:
        return self.displacements.shape[1]

    @property
    def steps(self) -> int:
        return self.displacements.shape[0]

    @property
    def time(self) -> np.ndarray:
        return np.arange(self.steps) * self.dt

    @property
    def drifts(self) -> np.ndarray:
        return np.diff(self.displacements, axis=1, prepend=0.0)

    @property
    def relative_velocities(self) -> np.ndarray:
        return np.diff(self.velocities, axis=1, prepend=0.0)

    @property
    def base_shear(self) -> np.ndarray:
        return self.absolute_accelerations @ self.masses

    def peak_drifts(self) -> np.ndarray:
        return np.max(np.abs(self.drifts), axis=0)

    def to_csv(self) -> str:
        """One row per record sample: time, drift_1..n, acc_1..n, base_shear."""
        n = self.n
        header = (["time"] + [f"drift_{i}" for i in range(1, n + 1)]
                  + [f"acc_{i}" for i in range(1, n + 1)] + ["base_shear"])
        table = np.column_stack([self.time, self.drifts, self.absolute_accelerations, self.base_shear])
        buf = io.StringIO()
        buf.write(",".join(header) + "\n")
        np.savetxt(buf, table, delimiter=",", fmt="%.10e")
        return buf.getvalue()


def _counts(layout, n: int) -> np.ndarray:
    counts = getattr(layout, "counts", layout)
    counts = np.zeros(n) if counts is None else np.asarray(counts, dtype=float)
    if counts.shape != (n,):
        raise InputError(f"layout has {counts.size} entries, model has {n} stories")
    return np.ascontiguousarray(counts)


def _fine_excitation(motion: GroundMotion, max_step: float):
    """Linearly interpolated excitation at a step no coarser than ``max_step``."""
    stride = max(1, math.ceil(motion.dt / max_step - 1e-9))
    a = motion.accel
    if stride == 1:
        return np.ascontiguousarray(a, dtype=float), motion.dt, 1
    frac = np.arange(stride) / stride
    fine = (a[:-1, None] + (a[1:] - a[:-1])[:, None] * frac[None, :]).ravel()
    fine = np.append(fine, a[-1])
    return fine, motion.dt / stride, stride


def _run(model, counts, ag, dt, stride, damper, law, x0, v0, store):
    law = ControlLaw(law)
    law_code = _kernels.LAW_PASSIVE_ON if law is ControlLaw.PASSIVE_ON else _kernels.LAW_CLIPPED
    mass, kd, ko, cd, co = model.tridiagonal()
    status, step, xs, vs, aa, fs, peak = _kernels.newmark(
        mass, kd, ko, cd, co, counts, ag, float(dt), int(stride),
        np.ascontiguousarray(x0, dtype=float), np.ascontiguousarray(v0, dtype=float),
        *damper.kernel_args(), law_code, FORCE_TOL, MAX_FIXED_POINT, store)
    if status == _kernels.STATUS_NO_CONVERGENCE:
        raise SimulationError(f"damper force iteration did not converge in {MAX_FIXED_POINT} passes", step)
    if status == _kernels.STATUS_NON_FINITE:
        raise SimulationError("non-finite response", step)
    if store:
        return ResponseHistory(dt * stride, xs, vs, aa, fs, mass)
    if not np.all(np.isfinite(peak)):
        raise SimulationError("non-finite response")
    return peak


def integrate(model: BuildingModel, layout, motion: GroundMotion, damper: MrDamperParams | None = None,
              law=ControlLaw.PASSIVE_ON, *, max_step: float = MAX_STEP) -> ResponseHistory:
    """Simulate the frame from rest under ``motion``.

    ``layout`` is a :class:`~obldamp.placement.DamperLayout`, a count
    vector, or ``None`` for the uncontrolled frame. Responses are reported
    at the record's own sampling times.
    """
    damper = damper or MrDamperParams()
    counts = _counts(layout, model.n)
    ag, dt, stride = _fine_excitation(motion, max_step)
    zeros = np.zeros(model.n)
    return _run(model, counts, ag, dt, stride, damper, law, zeros, zeros, True)


def peak_drifts(model: BuildingModel, layout, motion: GroundMotion, damper: MrDamperParams | None = None,
                law=ControlLaw.PASSIVE_ON, *, max_step: float = MAX_STEP) -> np.ndarray:
    """Per-story peak |drift|; the same computation as :func:`integrate` without the histories."""
    damper = damper or MrDamperParams()
    counts = _counts(layout, model.n)
    ag, dt, stride = _fine_excitation(motion, max_step)
    zeros = np.zeros(model.n)
    return _run(model, counts, ag, dt, stride, damper, law, zeros, zeros, False)


def _free_response(model: BuildingModel, x0, dt: float, steps: int, v0=None, ag=None) -> ResponseHistory:
    # test hook: non-zero initial conditions, no dampers, optional excitation
    ag = np.zeros(steps + 1) if ag is None else np.asarray(ag, dtype=float)
    v0 = np.zeros(model.n) if v0 is None else v0
    return _run(model, np.zeros(model.n), ag, dt, 1, MrDamperParams(mode="linear_viscous"),
                ControlLaw.PASSIVE_ON, x0, v0, True)


def drift_ratio_sum(controlled_peaks, uncontrolled_peaks) -> float:
    ctrl = np.asarray(controlled_peaks, dtype=float)
    unc = np.asarray(uncontrolled_peaks, dtype=float)
    if ctrl.shape != unc.shape:
        raise InputError("controlled and uncontrolled responses have different story counts")
    if np.any(unc == 0):
        story = int(np.flatnonzero(unc == 0)[0]) + 1
        raise DegenerateRecordError(f"uncontrolled peak drift is zero at story {story}")
    return float(np.sum(ctrl / unc))


def objective_value(controlled: ResponseHistory, uncontrolled: ResponseHistory) -> float:
    """Sum over stories of controlled / uncontrolled peak inter-story drift."""
    return drift_ratio_sum(controlled.peak_drifts(), uncontrolled.peak_drifts())


def response_norm(series, dt: float) -> float:
    """Time-averaged L2 (RMS) norm along the first axis."""
    x = np.asarray(series, dtype=float)
    if x.shape[0] == 0:
        raise InputError("series must be non-empty")
    duration = x.shape[0] * dt
    return np.sqrt(np.sum(x * x, axis=0) * dt / duration)


@dataclass(frozen=True)
class PerformanceIndices:
    j1: float
    j2: float
    j3: float
    j4: float
    j5: float
    j6: float

    def as_tuple(self):
        return (self.j1, self.j2, self.j3, self.j4, self.j5, self.j6)


def _ratio(num, den, what):
    if den == 0:
        raise DegenerateRecordError(f"uncontrolled {what} is zero")
    return float(num / den)


def performance_indices(controlled: ResponseHistory, uncontrolled: ResponseHistory,
                        masses=None) -> PerformanceIndices:
    """J1-J3 compare peaks, J4-J6 compare RMS norms (largest story norm for drift
    and floor acceleration). All normalizers come from ``uncontrolled``."""
    if controlled.displacements.shape != uncontrolled.displacements.shape:
        raise InputError("histories must come from the same model and record")
    if masses is None:
        masses = uncontrolled.masses
    masses = np.asarray(masses, dtype=float)
    dt = uncontrolled.dt

    def parts(h):
        drift = h.drifts
        acc = h.absolute_accelerations
        shear = acc @ masses
        return drift, acc, shear

    dc, ac, sc = parts(controlled)
    du, au, su = parts(uncontrolled)
    return PerformanceIndices(
        _ratio(np.max(np.abs(dc)), np.max(np.abs(du)), "peak drift"),
        _ratio(np.max(np.abs(ac)), np.max(np.abs(au)), "peak floor acceleration"),
        _ratio(np.max(np.abs(sc)), np.max(np.abs(su)), "peak base shear"),
        _ratio(np.max(response_norm(dc, dt)), np.max(response_norm(du, dt)), "drift norm"),
        _ratio(np.max(response_norm(ac, dt)), np.max(response_norm(au, dt)), "floor acceleration norm"),
        _ratio(response_norm(sc, dt), response_norm(su, dt), "base shear norm"),
    )
