"""Ground-acceleration records: seeded filtered white noise and text-file ingestion.

File formats
------------
``peer_at2``
    Free-text header lines, one of which carries the sample count and time
    step as ``NPTS= 2000, DT= .0100 SEC`` (the older ``2000 .0100 NPTS, DT``
    ordering is accepted too). Every following line holds whitespace
    separated accelerations in units of g.
``two_column``
    One ``time acceleration`` pair per line, acceleration in m/s^2. Blank
    lines and lines starting with ``#`` are ignored. The time step is taken
    from the first two samples and every later step must agree within 1e-6 s.
"""
from __future__ import annotations

import io
import math
import re
from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from .errors import InputError, ParseError

G = 9.81
DT_TOLERANCE = 1e-6


@dataclass(frozen=True, eq=False)
class GroundMotion:
    dt: float
    accel: np.ndarray
    label: str = ""
    pga: float = field(init=False)

    def __post_init__(self):
        a = np.asarray(self.accel, dtype=float)
        if a.ndim != 1 or a.size == 0:
            raise InputError("acceleration series must be a non-empty vector")
        if not self.dt > 0:
            raise InputError("dt must be positive")
        if not np.all(np.isfinite(a)):
            raise InputError("acceleration series must be finite")
        a.setflags(write=False)
        object.__setattr__(self, "accel", a)
        object.__setattr__(self, "pga", float(np.max(np.abs(a))))

    @property
    def duration(self) -> float:
        return self.dt * self.accel.size

    @property
    def time(self) -> np.ndarray:
        return np.arange(self.accel.size) * self.dt


def generate_white_noise(seed: int, duration: float = 20.0, dt: float = 0.01,
                         target_pga: float = 0.4 * G, cutoff_hz: float = 25.0) -> GroundMotion:
    """Gaussian white noise, zero-phase 2nd-order Butterworth low-pass, scaled to ``target_pga``."""
    if not (duration > 0 and dt > 0):
        raise InputError("duration and dt must be positive")
    nyquist = 0.5 / dt
    if not 0 < cutoff_hz < nyquist:
        raise InputError(f"cutoff {cutoff_hz} Hz must lie in (0, {nyquist}) Hz")
    if not target_pga > 0:
        raise InputError("target_pga must be positive")
    n = int(round(duration / dt))
    if n < 16:
        raise InputError("record too short for zero-phase filtering")
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal(n)
    sos = signal.butter(2, cutoff_hz, btype="low", fs=1.0 / dt, output="sos")
    filtered = signal.sosfiltfilt(sos, raw)
    accel = _rescale(filtered, target_pga)
    label = f"white_noise(seed={seed}, T={duration}s, dt={dt}s, fc={cutoff_hz}Hz, pga={target_pga:.6g})"
    return GroundMotion(dt, accel, label)


def _rescale(accel: np.ndarray, target_pga: float) -> np.ndarray:
    # multiply, then pin the peak sample so max |a| equals the target exactly
    peak = int(np.argmax(np.abs(accel)))
    out = np.clip(accel * (target_pga / abs(accel[peak])), -target_pga, target_pga)
    out[peak] = math.copysign(target_pga, accel[peak])
    return out


def scale_to_pga(motion: GroundMotion, target_pga: float) -> GroundMotion:
    """Uniform rescaling; the peak sample is set to exactly ``target_pga``."""
    if motion.pga == 0:
        raise InputError("cannot scale a zero-amplitude record")
    if not target_pga > 0:
        raise InputError("target_pga must be positive")
    if target_pga == motion.pga:
        return motion
    return GroundMotion(motion.dt, _rescale(motion.accel, target_pga), motion.label)


_NPTS_DT = re.compile(r"NPTS\s*=\s*(\d+)\s*,?\s*DT\s*=\s*([0-9.eE+-]+)", re.IGNORECASE)
_NPTS_DT_OLD = re.compile(r"^\s*(\d+)\s+([0-9.eE+-]+)\s+NPTS\s*,\s*DT", re.IGNORECASE)


def _parse_at2(lines, label):
    header_line = None
    for idx, line in enumerate(lines):
        m = _NPTS_DT.search(line) or _NPTS_DT_OLD.search(line)
        if m:
            npts, dt = int(m.group(1)), float(m.group(2))
            header_line = idx
            break
    if header_line is None:
        raise ParseError("no 'NPTS=..., DT=...' header line found", line=1)
    values = []
    for idx in range(header_line + 1, len(lines)):
        for token in lines[idx].split():
            try:
                values.append(float(token))
            except ValueError:
                raise ParseError(f"non-numeric token {token!r}", line=idx + 1) from None
    if not values:
        raise ParseError("record has no acceleration values", line=header_line + 2)
    if len(values) != npts:
        raise ParseError(f"header declares NPTS={npts} but {len(values)} values were read",
                         line=header_line + 1)
    if not dt > 0:
        raise ParseError(f"DT must be positive, got {dt}", line=header_line + 1)
    return GroundMotion(dt, np.array(values) * G, label)


def _parse_two_column(lines, label):
    times, accel, where = [], [], []
    for idx, line in enumerate(lines):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        parts = text.replace(",", " ").split()
        if len(parts) != 2:
            raise ParseError(f"expected 2 columns, found {len(parts)}", line=idx + 1)
        try:
            t, a = float(parts[0]), float(parts[1])
        except ValueError:
            raise ParseError(f"non-numeric token in {text!r}", line=idx + 1) from None
        times.append(t)
        accel.append(a)
        where.append(idx + 1)
    if not accel:
        raise ParseError("record has no samples", line=len(lines) or 1)
    if len(accel) < 2:
        raise ParseError("need at least two samples to infer dt", line=where[0])
    dt = times[1] - times[0]
    if not dt > 0:
        raise ParseError("time must increase", line=where[1])
    for k in range(2, len(times)):
        step = times[k] - times[k - 1]
        if abs(step - dt) > DT_TOLERANCE:
            raise ParseError(f"non-uniform time step {step:.9g} s (expected {dt:.9g} s)", line=where[k])
    return GroundMotion(dt, np.array(accel), label)


def parse_record(text, format: str = "peer_at2", label: str = "") -> GroundMotion:
    """Parse a record from a string or text stream."""
    if hasattr(text, "read"):
        text = text.read()
    lines = text.splitlines()
    if format == "peer_at2":
        return _parse_at2(lines, label)
    if format == "two_column":
        return _parse_two_column(lines, label)
    raise InputError(f"unknown record format {format!r}")


def read_record(path, format: str = "peer_at2", label: str | None = None) -> GroundMotion:
    with open(path) as fh:
        try:
            return parse_record(fh, format, label if label is not None else str(path))
        except ParseError as exc:
            exc.path = str(path)
            raise


def to_two_column(motion: GroundMotion) -> str:
    buf = io.StringIO()
    for k, a in enumerate(motion.accel):
        buf.write(f"{k * motion.dt!r} {float(a)!r}\n")
    return buf.getvalue()


def to_at2(motion: GroundMotion, title: str = "") -> str:
    buf = io.StringIO()
    buf.write("PEER STRONG MOTION RECORD\n")
    buf.write((title or motion.label or "synthetic") + "\n")
    buf.write("ACCELERATION TIME SERIES IN UNITS OF G\n")
    buf.write(f"NPTS= {motion.accel.size}, DT= {motion.dt!r} SEC\n")
    values = motion.accel / G
    for start in range(0, values.size, 5):
        buf.write("".join(f"{float(v)!r:>26}" for v in values[start:start + 5]) + "\n")
    return buf.getvalue()
