"""Planar shear-frame model and the MR damper device model.

Units are SI throughout (kg, N/m, N s/m, m, s).

The damper constitutive law and the control law are modelling choices of
this package, not data: the default Bouc-Wen parameters below were picked so
that a single device noticeably but modestly affects one 9.8e5 kg story.
"""
from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import InputError


@dataclass(frozen=True)
class StoryParams:
    mass: float
    stiffness: float
    damping: float
    inertia: float = 0.0    # carried from the data table; the planar model ignores it
    elevation: float = 0.0  # carried from the data table; the planar model ignores it


@dataclass(frozen=True, eq=False)
class BuildingModel:
    stories: tuple
    M: np.ndarray
    C: np.ndarray
    K: np.ndarray

    @property
    def n(self) -> int:
        return len(self.stories)

    @property
    def masses(self) -> np.ndarray:
        return np.diag(self.M).copy()

    def tridiagonal(self):
        """``(mass, k_diag, k_off, c_diag, c_off)`` as contiguous vectors."""
        k_off = np.diag(self.K, 1).copy() if self.n > 1 else np.zeros(0)
        c_off = np.diag(self.C, 1).copy() if self.n > 1 else np.zeros(0)
        return (self.masses, np.diag(self.K).copy(), k_off, np.diag(self.C).copy(), c_off)

    def with_stories(self, count: int) -> "BuildingModel":
        return assemble_model(self.stories[:count])


def _shear_matrix(values: np.ndarray) -> np.ndarray:
    n = values.size
    mat = np.zeros((n, n))
    for i in range(n):
        mat[i, i] = values[i] + (values[i + 1] if i + 1 < n else 0.0)
        if i + 1 < n:
            mat[i, i + 1] = mat[i + 1, i] = -values[i + 1]
    return mat


def assemble_model(stories) -> BuildingModel:
    stories = tuple(stories)
    if not stories:
        raise InputError("a building needs at least one story")
    for idx, s in enumerate(stories, start=1):
        if s.mass <= 0 or s.stiffness <= 0:
            raise InputError(f"story {idx}: mass and stiffness must be positive")
        if s.damping < 0:
            raise InputError(f"story {idx}: damping must be non-negative")
    m = np.array([s.mass for s in stories], dtype=float)
    k = np.array([s.stiffness for s in stories], dtype=float)
    c = np.array([s.damping for s in stories], dtype=float)
    return BuildingModel(stories, np.diag(m), _shear_matrix(c), _shear_matrix(k))


def read_story_table(path=None) -> list[StoryParams]:
    """Read a story CSV (tonnes, MN/m, MN s/m, kg m^2, m) into SI story records.

    Without ``path`` the bundled 40-story table is used.
    """
    if path is None:
        text = resources.files("obldamp").joinpath("data", "table1.csv").read_text()
    else:
        text = Path(path).read_text()
    rows = csv.DictReader(line for line in text.splitlines() if line.strip() and not line.startswith("#"))
    stories = []
    for row in rows:
        try:
            stories.append(StoryParams(
                mass=float(row["mass_t"]) * 1e3,
                stiffness=float(row["stiffness_MN_per_m"]) * 1e6,
                damping=float(row["damping_MNs_per_m"]) * 1e6,
                inertia=float(row.get("inertia_kgm2") or 0.0),
                elevation=float(row.get("elevation_m") or 0.0),
            ))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad story row {row!r}: {exc}") from exc
    return stories


def load_building(path=None, stories: int | None = None) -> BuildingModel:
    table = read_story_table(path)
    if stories is not None:
        if not 1 <= stories <= len(table):
            raise InputError(f"requested {stories} stories, table has {len(table)}")
        table = table[:stories]
    return assemble_model(table)


# ---------------------------------------------------------------- dampers

class DamperMode(str, enum.Enum):
    LINEAR_VISCOUS = "linear_viscous"
    BOUC_WEN = "bouc_wen"


class ControlLaw(str, enum.Enum):
    PASSIVE_ON = "passive_on"
    CLIPPED_ON_OFF = "clipped_on_off"


@dataclass(frozen=True)
class MrDamperParams:
    mode: DamperMode = DamperMode.BOUC_WEN
    c0: float = 2.0e5
    alpha: float = 8.0e5
    gamma: float = 300.0
    beta: float = 300.0
    A_bw: float = 120.0
    n_bw: float = 2.0
    f_max: float = 1.0e6

    def __post_init__(self):
        object.__setattr__(self, "mode", DamperMode(self.mode))
        values = (self.c0, self.alpha, self.gamma, self.beta, self.A_bw, self.n_bw, self.f_max)
        if not np.all(np.isfinite(values)):
            raise InputError("damper parameters must be finite")
        if self.f_max <= 0:
            raise InputError("f_max must be positive")
        if self.n_bw < 1:
            raise InputError("n_bw must be >= 1")

    def steady_bound(self) -> float:
        """Analytic bound on |z| for non-negative ``gamma + beta``."""
        return (self.A_bw / (self.gamma + self.beta)) ** (1.0 / self.n_bw)

    def kernel_args(self):
        mode = _kernels.MODE_LINEAR if self.mode is DamperMode.LINEAR_VISCOUS else _kernels.MODE_BOUC_WEN
        return (mode, float(self.c0), float(self.alpha), float(self.gamma), float(self.beta),
                float(self.A_bw), float(self.n_bw), float(self.f_max))

    def with_mode(self, mode) -> "MrDamperParams":
        return replace(self, mode=DamperMode(mode))


@dataclass
class DamperState:
    z: np.ndarray

    @classmethod
    def zeros(cls, n: int = 1) -> "DamperState":
        return cls(np.zeros(n))


def damper_force(relative_velocity, relative_displacement, state: DamperState, params: MrDamperParams,
                 dt: float, command=1.0, *, substeps: int = 0):
    """Force of one device per location, and the advanced hysteretic state.

    Arguments may be scalars or per-location arrays. ``relative_displacement``
    is accepted for interface symmetry; neither mode depends on it.
    ``substeps=0`` picks the RK4 sub-step count adaptively.
    """
    if dt <= 0:
        raise InputError("dt must be positive")
    v = np.atleast_1d(np.asarray(relative_velocity, dtype=float))
    z = np.atleast_1d(np.asarray(state.z, dtype=float))
    cmd = np.broadcast_to(np.asarray(command, dtype=float), v.shape)
    z = np.broadcast_to(z, v.shape)
    args = params.kernel_args()
    force = np.empty_like(v)
    z_new = np.empty_like(v)
    for i in range(v.size):
        force[i], z_new[i] = _kernels.single_damper(v[i], z[i], float(dt), cmd[i], *args, int(substeps))
    if np.ndim(relative_velocity) == 0:
        return float(force[0]), DamperState(z_new)
    return force, DamperState(z_new)


def control_command(relative_velocity, relative_displacement, law=ControlLaw.PASSIVE_ON) -> np.ndarray:
    """Command in [0, 1] per damper location."""
    law = ControlLaw(law)
    v = np.atleast_1d(np.asarray(relative_velocity, dtype=float))
    d = np.atleast_1d(np.asarray(relative_displacement, dtype=float))
    if not (np.all(np.isfinite(v)) and np.all(np.isfinite(d))):
        raise InputError("responses must be finite")
    if law is ControlLaw.PASSIVE_ON:
        return np.ones(np.broadcast(v, d).shape)
    return (v * d > 0).astype(float)
