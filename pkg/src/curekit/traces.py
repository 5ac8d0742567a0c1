"""Time-stamped temperature histories and their columnar text formats."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TraceOverlapError, ValidationError


@dataclass(frozen=True, eq=False)
class TemperatureTrace:
    """One probe's history: times in minutes (strictly increasing), values in degC."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or v.ndim != 1 or t.size != v.size:
            raise ValidationError("trace times and values must be 1-d arrays of equal length")
        if t.size == 0:
            raise ValidationError("trace must not be empty")
        if not np.all(np.diff(t) > 0.0):
            raise ValidationError("trace times must be strictly increasing")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
            raise ValidationError("trace entries must be finite")
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.times.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, TemperatureTrace):
            return NotImplemented
        return np.array_equal(self.times, other.times) and np.array_equal(self.values, other.values)

    def window(self, t_start: float, t_end: float) -> "TemperatureTrace":
        """Sub-trace with times in [t_start, t_end]."""
        mask = (self.times >= t_start) & (self.times <= t_end)
        if not mask.any():
            raise TraceOverlapError(f"no samples in [{t_start}, {t_end}] min")
        return TemperatureTrace(self.times[mask], self.values[mask])

    def at(self, times) -> np.ndarray:
        """Linear interpolation of the trace onto the given times (minutes)."""
        return np.interp(times, self.times, self.values)


def trace_error(predicted: TemperatureTrace, measured: TemperatureTrace) -> float:
    """Worst absolute mismatch (degC) between a prediction and measured data.

    The prediction is interpolated onto the measurement timestamps (never the
    reverse) and compared over the overlapping window only.
    """
    lo = max(predicted.times[0], measured.times[0])
    hi = min(predicted.times[-1], measured.times[-1])
    if lo > hi:
        raise TraceOverlapError("prediction and measurement share no time window")
    mask = (measured.times >= lo) & (measured.times <= hi)
    if not mask.any():
        raise TraceOverlapError("no measurement samples inside the overlap window")
    resampled = predicted.at(measured.times[mask])
    return float(np.max(np.abs(resampled - measured.values[mask])))


def write_tc_stream(path, trace: TemperatureTrace) -> None:
    """Write a thermocouple stream: columns (time_min, temperature_C)."""
    data = np.column_stack([trace.times, trace.values])
    np.savetxt(path, data, fmt="%.6f", header="time_min temperature_C", comments="")


def read_tc_stream(path) -> TemperatureTrace:
    data = np.loadtxt(path, skiprows=1, ndmin=2)
    if data.shape[1] != 2:
        raise ValidationError(f"TC stream must have 2 columns, found {data.shape[1]}")
    return TemperatureTrace(data[:, 0], data[:, 1])
