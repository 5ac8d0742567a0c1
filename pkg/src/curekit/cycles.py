"""Air-temperature cure cycles: construction, evaluation, timing, metrics,
and process-specification checks.

A cycle is a continuous piecewise-linear program built from ramps (given as a
positive rate magnitude plus a target) and dwells, ending with a cool-down
ramp back to the start temperature.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Union

import numpy as np
import yaml

from .errors import ParseError, ValidationError

TARGET_RANGE_C = (20.0, 200.0)


@dataclass(frozen=True)
class Ramp:
    """Linear ramp to ``target`` (degC) at ``rate`` (degC/min, magnitude)."""

    rate: float
    target: float


@dataclass(frozen=True)
class Dwell:
    """Constant-temperature hold for ``minutes``."""

    minutes: float


Segment = Union[Ramp, Dwell]


@dataclass(frozen=True)
class CureCycle:
    """Piecewise ramp/dwell air-temperature program.

    ``params`` keeps the named-constructor arguments when the cycle was built
    by :func:`one_hold` or :func:`two_hold`; it is carried for serialization
    and tie-breaking and does not participate in equality.
    """

    start_temperature: float
    segments: tuple[Segment, ...]
    params: dict | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        lo, hi = TARGET_RANGE_C
        if not np.isfinite(self.start_temperature) or not lo <= self.start_temperature <= hi:
            raise ValidationError(f"start temperature must lie in [{lo}, {hi}] degC")
        if not self.segments:
            raise ValidationError("cycle needs at least one segment")
        for seg in self.segments:
            if isinstance(seg, Ramp):
                if not np.isfinite(seg.rate) or seg.rate <= 0.0:
                    raise ValidationError(f"ramp rate must be positive, got {seg.rate!r}")
                if not np.isfinite(seg.target) or not lo <= seg.target <= hi:
                    raise ValidationError(f"ramp target must lie in [{lo}, {hi}] degC, got {seg.target!r}")
            elif isinstance(seg, Dwell):
                if not np.isfinite(seg.minutes) or seg.minutes < 0.0:
                    raise ValidationError(f"dwell duration must be non-negative, got {seg.minutes!r}")
            else:
                raise ValidationError(f"unknown segment type {type(seg).__name__}")

    @cached_property
    def breakpoints(self) -> tuple[np.ndarray, np.ndarray]:
        """(times_min, temps_C) knots of the piecewise-linear program."""
        times = [0.0]
        temps = [self.start_temperature]
        for seg in self.segments:
            if isinstance(seg, Ramp):
                times.append(times[-1] + abs(seg.target - temps[-1]) / seg.rate)
                temps.append(seg.target)
            else:
                times.append(times[-1] + seg.minutes)
                temps.append(temps[-1])
        t = np.asarray(times)
        v = np.asarray(temps)
        t.setflags(write=False)
        v.setflags(write=False)
        return t, v

    @cached_property
    def final_hold_temperature(self) -> float:
        """Temperature of the last dwell (the final hold); falls back to the
        hottest program point for dwell-free cycles."""
        last = None
        level = self.start_temperature
        for seg in self.segments:
            if isinstance(seg, Ramp):
                level = seg.target
            else:
                last = level
        if last is None:
            return float(self.breakpoints[1].max())
        return last


def two_hold(rate1: float, rate2: float, T1: float, t1: float, T2: float, t2: float,
             cooldown_rate: float, start: float) -> CureCycle:
    """Two-hold program: ramp to T1, dwell t1, ramp to T2, dwell t2, cool to start.

    Rates in degC/min (positive magnitudes), temperatures in degC, times in
    minutes.  Raises ValidationError outside the documented ranges.
    """
    segments = (Ramp(rate1, T1), Dwell(t1), Ramp(rate2, T2), Dwell(t2), Ramp(cooldown_rate, start))
    params = {"type": "two_hold", "rate1": rate1, "rate2": rate2, "T1": T1, "t1": t1,
              "T2": T2, "t2": t2, "cooldown_rate": cooldown_rate, "start": start}
    return CureCycle(start_temperature=start, segments=segments, params=params)


def one_hold(rate: float, T_hold: float, t_hold: float, cooldown_rate: float, start: float) -> CureCycle:
    """Single-hold program: ramp to T_hold, dwell t_hold, cool to start."""
    segments = (Ramp(rate, T_hold), Dwell(t_hold), Ramp(cooldown_rate, start))
    params = {"type": "one_hold", "rate": rate, "hold_temperature": T_hold,
              "hold_minutes": t_hold, "cooldown_rate": cooldown_rate, "start": start}
    return CureCycle(start_temperature=start, segments=segments, params=params)


def air_temperature(cycle: CureCycle, t):
    """Program temperature (degC) at time ``t`` (minutes, scalar or array).

    Past the end of the cycle the program sits at the start temperature.
    """
    if np.any(np.asarray(t) < 0.0):
        raise ValueError("time must be non-negative")
    times, temps = cycle.breakpoints
    out = np.interp(t, times, temps)
    return float(out) if np.ndim(t) == 0 else out


def total_time(cycle: CureCycle) -> float:
    """Total program duration in minutes, cool-down included."""
    return float(cycle.breakpoints[0][-1])


@dataclass(frozen=True)
class CycleMetrics:
    """Scalar outcomes of one simulated cure: peak part temperature (degC)
    and part heating rate (degC/min) when the air program first reaches its
    final hold temperature."""

    max_part_temperature: float
    part_rate_at_final_hold: float

    def __post_init__(self):
        if not (np.isfinite(self.max_part_temperature) and np.isfinite(self.part_rate_at_final_hold)):
            raise ValidationError("cycle metrics must be finite")


@dataclass(frozen=True)
class ProcessSpecs:
    """Manufacturing limits: peak part temperature below the limit, and the
    transition heating rate strictly inside (rate_lower, rate_upper)."""

    max_part_temperature_limit: float
    rate_lower: float
    rate_upper: float

    def __post_init__(self):
        if not self.rate_lower < self.rate_upper:
            raise ValidationError("rate_lower must be below rate_upper")


@dataclass(frozen=True)
class SpecCheck:
    passed: bool
    violations: tuple[str, ...]


def check_specs(metrics: CycleMetrics, specs: ProcessSpecs) -> SpecCheck:
    """Strict-inequality check of metrics against specs; ties fail.

    Returns the violated-constraint names: 'max_part_temperature',
    'rate_lower', 'rate_upper'.
    """
    violations = []
    if not metrics.max_part_temperature < specs.max_part_temperature_limit:
        violations.append("max_part_temperature")
    if not specs.rate_lower < metrics.part_rate_at_final_hold:
        violations.append("rate_lower")
    if not metrics.part_rate_at_final_hold < specs.rate_upper:
        violations.append("rate_upper")
    return SpecCheck(passed=not violations, violations=tuple(violations))


def metrics_from_trace(times_min: np.ndarray, part_c: np.ndarray, air_c: np.ndarray,
                       final_hold_c: float) -> CycleMetrics:
    """Extract cycle metrics from a part trace sampled on the output grid.

    The rate is a centred finite difference at the first sample where the air
    program has reached the final hold temperature (one-sided at the ends).
    """
    reached = np.nonzero(air_c >= final_hold_c - 1e-9)[0]
    if reached.size == 0:
        raise ValueError("air program never reaches its final hold temperature on this grid")
    i = int(reached[0])
    lo = max(i - 1, 0)
    hi = min(i + 1, len(times_min) - 1)
    rate = (part_c[hi] - part_c[lo]) / (times_min[hi] - times_min[lo])
    return CycleMetrics(float(np.max(part_c)), float(rate))


def cycle_to_document(cycle: CureCycle) -> dict:
    """Key-value form mirroring the constructor parameters."""
    if cycle.params is not None:
        return dict(cycle.params)
    segments = []
    for seg in cycle.segments:
        if isinstance(seg, Ramp):
            segments.append({"ramp": seg.rate, "target": seg.target})
        else:
            segments.append({"dwell": seg.minutes})
    return {"type": "segments", "start": cycle.start_temperature, "segments": segments}


def cycle_from_document(doc: dict) -> CureCycle:
    """Inverse of :func:`cycle_to_document`."""
    if not isinstance(doc, dict) or "type" not in doc:
        raise ParseError("cycle document must be a mapping with a 'type' key")
    kind = doc["type"]
    try:
        if kind == "two_hold":
            return two_hold(doc["rate1"], doc["rate2"], doc["T1"], doc["t1"],
                            doc["T2"], doc["t2"], doc["cooldown_rate"], doc["start"])
        if kind == "one_hold":
            return one_hold(doc["rate"], doc["hold_temperature"], doc["hold_minutes"],
                            doc["cooldown_rate"], doc["start"])
        if kind == "segments":
            segments = []
            for item in doc["segments"]:
                if "ramp" in item:
                    segments.append(Ramp(item["ramp"], item["target"]))
                elif "dwell" in item:
                    segments.append(Dwell(item["dwell"]))
                else:
                    raise ParseError(f"unknown segment entry {item!r}")
            return CureCycle(start_temperature=doc["start"], segments=tuple(segments))
    except KeyError as exc:
        raise ParseError(f"cycle document is missing key {exc}") from exc
    raise ParseError(f"unknown cycle type {kind!r}")


def dump_cycle(cycle: CureCycle) -> str:
    return yaml.safe_dump(cycle_to_document(cycle), sort_keys=False)


def parse_cycle(text: str) -> CureCycle:
    doc = yaml.safe_load(text)
    return cycle_from_document(doc)
