"""Experiment configuration, read from a single JSON file.

Input paths inside the file (building table, record files) are resolved
against the file's directory; the output directory is taken as given.
Every key is optional; missing keys take the defaults below. See
``configs/case_study.json`` for a fully spelled-out example.
"""
from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

from .algorithms import BbbcParams, GsaParams, PsoParams
from .building import BuildingModel, ControlLaw, MrDamperParams, load_building
from .core import Algorithm, RunConfig
from .errors import InputError
from .ground_motion import G, GroundMotion, generate_white_noise, read_record, scale_to_pga
from .obl import OblConfig

_PARAM_TYPES = {Algorithm.PSO: PsoParams, Algorithm.GSA: GsaParams, Algorithm.BBBC: BbbcParams}


def _member(enum_cls, value, what):
    try:
        return enum_cls(value)
    except ValueError:
        choices = ", ".join(m.value for m in enum_cls)
        raise InputError(f"unknown {what} {value!r}; choose one of {choices}") from None


@dataclass
class RecordSpec:
    """Either ``kind="white_noise"`` (seeded synthetic) or ``kind="file"``."""

    kind: str = "white_noise"
    seed: int = 1
    duration: float = 20.0
    dt: float = 0.01
    cutoff_hz: float = 25.0
    target_pga: Optional[float] = 0.4 * G  # m/s^2, or a string like "0.4g"; None keeps a file's raw amplitude
    path: Optional[str] = None
    format: str = "peer_at2"
    label: Optional[str] = None

    def __post_init__(self):
        if isinstance(self.target_pga, str):
            text = self.target_pga.strip().lower()
            try:
                self.target_pga = float(text[:-1]) * G if text.endswith("g") else float(text)
            except ValueError:
                raise InputError(f"cannot read target_pga {self.target_pga!r}") from None
        if self.kind not in ("white_noise", "file"):
            raise InputError(f"record kind must be 'white_noise' or 'file', got {self.kind!r}")
        if self.kind == "file" and not self.path:
            raise InputError("file records need a 'path'")

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        if self.kind == "white_noise":
            return f"white_noise_s{self.seed}"
        return Path(self.path).stem

    @property
    def scaling(self) -> str:
        if self.kind == "white_noise":
            return "synthetic"
        return "raw" if self.target_pga is None else f"scaled_to_{self.target_pga:.6g}"

    def load(self) -> GroundMotion:
        if self.kind == "white_noise":
            return generate_white_noise(self.seed, self.duration, self.dt, self.target_pga, self.cutoff_hz)
        motion = read_record(self.path, self.format, self.name)
        if self.target_pga is not None:
            motion = scale_to_pga(motion, self.target_pga)
        return motion


@dataclass
class AlgorithmSpec:
    name: Algorithm
    params: object = None

    def __post_init__(self):
        self.name = _member(Algorithm, self.name, "algorithm")
        cls = _PARAM_TYPES[self.name]
        if self.params is None:
            self.params = cls()
        elif isinstance(self.params, dict):
            try:
                self.params = cls(**self.params)
            except TypeError as exc:
                raise InputError(f"bad {self.name.value} parameters: {exc}") from exc


@dataclass
class OracleSpec:
    stories: int = 5
    total: int = 4
    max_per_story: int = 2
    damper_mode: str = "linear_viscous"
    population_size: int = 20
    iterations: int = 200
    n_seeds: int = 10


@dataclass
class BenchSpec:
    functions: tuple = ("sphere", "rastrigin", "rosenbrock")
    dim: int = 10
    population_size: int = 40
    iterations: int = 500
    runs: int = 20


@dataclass
class ExperimentConfig:
    building: Optional[str] = None          # story CSV; None uses the bundled 40-story table
    stories: Optional[int] = None           # keep only the first n rows of the table
    damper: MrDamperParams = field(default_factory=MrDamperParams)
    law: ControlLaw = ControlLaw.PASSIVE_ON
    records: list = field(default_factory=lambda: [RecordSpec()])
    design_record: int = 0                  # index into records used by the objective
    algorithms: list = field(default_factory=lambda: [AlgorithmSpec(a) for a in Algorithm])
    obl: OblConfig = field(default_factory=OblConfig)
    obl_modes: tuple = (False, True)        # which cells to run: standard and/or OBL
    runs: int = 30
    iterations: int = 500
    population_size: int = 40
    total_dampers: int = 40
    max_per_story: int = 5
    output: str = "results"
    master_seed: int = 0
    oracle: OracleSpec = field(default_factory=OracleSpec)
    bench: BenchSpec = field(default_factory=BenchSpec)

    def __post_init__(self):
        self.law = _member(ControlLaw, self.law, "control law")
        if self.runs < 1:
            raise InputError("runs must be >= 1")
        if not self.records:
            raise InputError("at least one record is required")
        if not 0 <= self.design_record < len(self.records):
            raise InputError("design_record must index into records")
        if not self.algorithms:
            raise InputError("at least one algorithm is required")
        self.obl_modes = tuple(bool(m) for m in self.obl_modes)
        if not self.obl_modes:
            raise InputError("obl_modes must not be empty")

    def load_model(self) -> BuildingModel:
        return load_building(self.building, self.stories)

    def cells(self):
        """``(label, RunConfig template)`` per algorithm x OBL mode, standard first."""
        out = []
        for spec in self.algorithms:
            for use_obl in self.obl_modes:
                cfg = RunConfig(spec.name, self.population_size, self.iterations, 0,
                                self.obl if use_obl else None, spec.params)
                out.append((cfg.label, cfg))
        return out

    def to_dict(self) -> dict:
        def plain(value):
            if isinstance(value, enum.Enum):
                return value.value
            if hasattr(value, "__dataclass_fields__"):
                return {f.name: plain(getattr(value, f.name)) for f in fields(value)}
            if isinstance(value, (list, tuple)):
                return [plain(v) for v in value]
            return value
        return plain(self)


def run_seed(master_seed: int, *parts) -> int:
    """Stable 63-bit seed from the master seed and any identifying parts.

    The parts are joined as text with ``:`` and hashed with BLAKE2b, so the
    mapping is independent of Python's hash randomization and platform.
    """
    text = ":".join(str(p) for p in (int(master_seed),) + parts)
    digest = hashlib.blake2b(text.encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little") >> 1


def _build(cls, data, where):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise InputError(f"{where} must be an object")
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise InputError(f"unknown keys in {where}: {', '.join(sorted(unknown))}")
    try:
        return cls(**data)
    except TypeError as exc:
        raise InputError(f"bad {where}: {exc}") from exc


def config_from_dict(data: dict, base_dir=".") -> ExperimentConfig:
    base = Path(base_dir)
    data = dict(data)
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(data) - known
    if unknown:
        raise InputError(f"unknown config keys: {', '.join(sorted(unknown))}")

    def resolve(p):
        return None if p is None else str((base / p) if not Path(p).is_absolute() else Path(p))

    if "building" in data:
        data["building"] = resolve(data["building"])
        if data["building"] is not None and not Path(data["building"]).is_file():
            raise InputError(f"building file not found: {data['building']}")
    if "damper" in data:
        data["damper"] = _build(MrDamperParams, data["damper"], "damper")
    if "records" in data:
        records = []
        for i, r in enumerate(data["records"]):
            spec = _build(RecordSpec, r, f"records[{i}]")
            if spec.kind == "file":
                spec.path = resolve(spec.path)
                if not Path(spec.path).is_file():
                    raise InputError(f"record file not found: {spec.path}")
            records.append(spec)
        data["records"] = records
    if "algorithms" in data:
        algos = []
        for i, a in enumerate(data["algorithms"]):
            if isinstance(a, str):
                a = {"name": a}
            algos.append(_build(AlgorithmSpec, a, f"algorithms[{i}]"))
        data["algorithms"] = algos
    if "obl" in data:
        data["obl"] = _build(OblConfig, data["obl"], "obl")
    if "oracle" in data:
        data["oracle"] = _build(OracleSpec, data["oracle"], "oracle")
    if "bench" in data:
        bench = _build(BenchSpec, data["bench"], "bench")
        bench.functions = tuple(bench.functions)
        data["bench"] = bench
    return ExperimentConfig(**data)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise InputError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    cfg = config_from_dict(data, path.parent)
    # parse every record up front so a bad file fails before any work starts
    for spec in cfg.records:
        spec.load()
    return cfg


def dump_config(cfg: ExperimentConfig) -> str:
    return json.dumps(cfg.to_dict(), indent=2, sort_keys=False) + "\n"


__all__ = ["ExperimentConfig", "RecordSpec", "AlgorithmSpec", "OracleSpec", "BenchSpec",
           "load_config", "config_from_dict", "dump_config", "run_seed"]
