"""Transient 1-d finite-element solver for the coupled conduction/cure system
over a part-on-tool stack with convective boundaries.

Discretisation: linear elements, lumped mass, backward Euler in time with the
cure source taken from the start-of-step state.  The tool occupies
[-L2, 0], the part [0, L1]; the interface node is shared, which enforces
temperature continuity and flux balance.  The 1-d system is tridiagonal and
is solved by a direct factorisation, done once per case since the matrix is
constant in time.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import _kernels
from .cycles import CureCycle
from .errors import SolverError, ValidationError
from .material import MaterialPair
from .traces import TemperatureTrace

KELVIN_OFFSET = _kernels.KELVIN_OFFSET

DEFAULT_ELEMENTS_PER_LAYER = 10


@dataclass(frozen=True)
class ThermalStack:
    """One part-on-tool configuration: [h1, L1, L2, h2].

    h1: convective coefficient above the part (W/m^2 K)
    L1: part thickness (m)
    L2: tool thickness (m)
    h2: convective coefficient below the tool (W/m^2 K)
    """

    h1: float
    L1: float
    L2: float
    h2: float

    def __post_init__(self):
        for name in ("h1", "L1", "L2", "h2"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValidationError(f"{name} must be positive, got {v!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.h1, self.L1, self.L2, self.h2])


@dataclass(frozen=True)
class Mesh:
    """Node layout over [-L2, L1] with the interface node exactly at z = 0."""

    node_positions: np.ndarray
    element_material_tags: tuple[str, ...]
    interface_node_index: int

    def __post_init__(self):
        z = np.asarray(self.node_positions, dtype=float)
        if not np.all(np.diff(z) > 0):
            raise ValidationError("mesh nodes must be strictly increasing")
        if z[self.interface_node_index] != 0.0:
            raise ValidationError("no mesh node lies exactly at the tool/part interface")
        z.setflags(write=False)
        object.__setattr__(self, "node_positions", z)

    @property
    def elements_per_layer(self) -> int:
        return self.interface_node_index

    @property
    def n_nodes(self) -> int:
        return self.node_positions.size


def build_mesh(L1: float, L2: float, elements_per_layer: int = DEFAULT_ELEMENTS_PER_LAYER) -> Mesh:
    """Uniform mesh with ``elements_per_layer`` elements in tool and part each."""
    if not (L1 > 0 and L2 > 0):
        raise ValueError(f"layer thicknesses must be positive, got L1={L1!r}, L2={L2!r}")
    if elements_per_layer < 1:
        raise ValueError("elements_per_layer must be at least 1")
    tool = np.linspace(-L2, 0.0, elements_per_layer + 1)
    part = np.linspace(0.0, L1, elements_per_layer + 1)
    nodes = np.concatenate([tool, part[1:]])
    tags = ("tool",) * elements_per_layer + ("part",) * elements_per_layer
    return Mesh(nodes, tags, elements_per_layer)


@dataclass(frozen=True)
class SolverConfig:
    """Time stepping and output controls.

    dt_s:                 implicit step (s); output_interval_s must be an
                          integer multiple of it
    elements_per_layer:   elements in tool and in part
    initial_temperature_c: uniform initial state (degC)
    output_interval_s:    recording grid for traces
    """

    dt_s: float = 5.0
    elements_per_layer: int = DEFAULT_ELEMENTS_PER_LAYER
    initial_temperature_c: float = 20.0
    output_interval_s: float = 30.0

    def __post_init__(self):
        if self.dt_s <= 0:
            raise ValidationError("dt_s must be positive")
        if self.elements_per_layer < 1:
            raise ValidationError("elements_per_layer must be at least 1")
        ratio = self.output_interval_s / self.dt_s
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise ValidationError("output_interval_s must be a positive integer multiple of dt_s")

    @property
    def record_every(self) -> int:
        return int(round(self.output_interval_s / self.dt_s))


DEFAULT_CONFIG = SolverConfig()


@dataclass(frozen=True)
class SolverState:
    """Instantaneous solver state: temperatures in K over all nodes and the
    degree of cure over the part nodes (interface included)."""

    time_s: float
    nodal_temperatures: np.ndarray
    nodal_degree_of_cure: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.nodal_temperatures, dtype=float)
        a = np.asarray(self.nodal_degree_of_cure, dtype=float)
        if not np.all(np.isfinite(t)):
            raise ValidationError("nodal temperatures must be finite")
        if np.any(a < 0.0) or np.any(a > 1.0):
            raise ValidationError("degree of cure must lie in [0, 1]")
        object.__setattr__(self, "nodal_temperatures", t)
        object.__setattr__(self, "nodal_degree_of_cure", a)


@dataclass(frozen=True)
class SimulationResult:
    """Traces on a shared output grid plus the scalar cycle metrics."""

    part_center_trace: TemperatureTrace
    tool_bottom_trace: TemperatureTrace
    air_trace: TemperatureTrace
    alpha_center: np.ndarray
    final_alpha_profile: np.ndarray
    max_part_temperature: float
    part_rate_at_final_hold: float


@dataclass(frozen=True)
class SimulationFailure:
    """Terminal failure of one batch entry; keeps the inputs and fail time."""

    stack: ThermalStack
    reason: str
    time_s: float


def _kinetics_args(materials: MaterialPair):
    part = materials.part
    k = part.kinetics
    return (part.thermal.volumetric_heat_capacity, part.thermal.conductivity,
            materials.tool.volumetric_heat_capacity, materials.tool.conductivity,
            part.thermal.density * k.total_heat_of_reaction,
            k.pre_exponential, k.activation_energy, k.order_m, k.order_n,
            k.diffusion_c, k.alpha_c0, k.alpha_ct, k.initial_degree_of_cure)


@dataclass(frozen=True)
class RawBatch:
    """Padded kernel outputs for a list of (stack, cycle) cases.

    Rows are padded with NaN beyond each case's ``n_out``.  ``times_min`` is
    the shared output grid of the longest case.
    """

    times_min: np.ndarray
    part: np.ndarray
    tool: np.ndarray
    air: np.ndarray
    alpha: np.ndarray
    final_alpha: np.ndarray
    n_out: np.ndarray
    status: np.ndarray
    fail_step: np.ndarray
    dt_s: float


def run_pairs(stacks: Sequence[ThermalStack], cycles: Sequence[CureCycle],
              materials: MaterialPair, config: SolverConfig = DEFAULT_CONFIG) -> RawBatch:
    """Solve one transient case per (stack, cycle) pair, in parallel."""
    if len(stacks) != len(cycles):
        raise ValueError("stacks and cycles must have equal length")
    if not stacks:
        raise ValueError("empty batch")
    n_cases = len(stacks)
    arr = np.array([s.as_array() for s in stacks])

    rec = config.record_every
    bp_list = [c.breakpoints for c in cycles]
    n_bp = np.array([t.size for t, _ in bp_list], dtype=np.int64)
    p_max = int(n_bp.max())
    bp_t = np.zeros((n_cases, p_max))
    bp_v = np.zeros((n_cases, p_max))
    n_steps = np.empty(n_cases, dtype=np.int64)
    for i, (t, v) in enumerate(bp_list):
        bp_t[i, : t.size] = t
        bp_v[i, : v.size] = v
        blocks = int(np.ceil(t[-1] * 60.0 / (config.dt_s * rec) - 1e-12))
        n_steps[i] = max(blocks, 1) * rec

    n_out = (n_steps // rec + 1).astype(np.int64)
    n_out_max = int(n_out.max())
    shape = (n_cases, n_out_max)
    out_part = np.full(shape, np.nan)
    out_tool = np.full(shape, np.nan)
    out_air = np.full(shape, np.nan)
    out_alpha = np.full(shape, np.nan)
    final_alpha = np.empty((n_cases, config.elements_per_layer + 1))
    status = np.empty(n_cases, dtype=np.int64)
    fail_step = np.empty(n_cases, dtype=np.int64)

    _kernels.run_cases(arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3],
                       *_kinetics_args(materials),
                       config.elements_per_layer, config.dt_s, config.initial_temperature_c,
                       bp_t, bp_v, n_bp, n_steps, rec,
                       out_part, out_tool, out_air, out_alpha,
                       final_alpha, status, fail_step)

    times = np.arange(n_out_max) * (config.output_interval_s / 60.0)
    return RawBatch(times, out_part, out_tool, out_air, out_alpha,
                    final_alpha, n_out, status, fail_step, config.dt_s)


def _result_from_raw(raw: RawBatch, i: int, cycle: CureCycle) -> SimulationResult:
    m = int(raw.n_out[i])
    times = raw.times_min[:m]
    part = raw.part[i, :m]
    air = raw.air[i, :m]
    reached = np.nonzero(air >= cycle.final_hold_temperature - 1e-9)[0]
    if reached.size:
        j = int(reached[0])
        lo, hi = max(j - 1, 0), min(j + 1, m - 1)
        rate = float((part[hi] - part[lo]) / (times[hi] - times[lo]))
    else:
        rate = float("nan")
    return SimulationResult(
        part_center_trace=TemperatureTrace(times, part),
        tool_bottom_trace=TemperatureTrace(times, raw.tool[i, :m]),
        air_trace=TemperatureTrace(times, air),
        alpha_center=raw.alpha[i, :m].copy(),
        final_alpha_profile=raw.final_alpha[i].copy(),
        max_part_temperature=float(np.max(part)),
        part_rate_at_final_hold=rate,
    )


def _failure_from_raw(raw: RawBatch, i: int, stack: ThermalStack) -> SimulationFailure:
    reasons = {
        _kernels.STATUS_NONFINITE: "solution became non-finite",
        _kernels.STATUS_SINGULAR: "tridiagonal solve hit a zero pivot",
    }
    t = float(raw.fail_step[i]) * raw.dt_s
    return SimulationFailure(stack, reasons.get(int(raw.status[i]), "unknown failure"), t)


def simulate(stack: ThermalStack, cycle: CureCycle, materials: MaterialPair,
             config: SolverConfig = DEFAULT_CONFIG) -> SimulationResult:
    """Run the full cycle for one stack.

    Raises SolverError (with the failing time stamp) if the solve breaks down.
    """
    out = simulate_batch([stack], cycle, materials, config)[0]
    if isinstance(out, SimulationFailure):
        raise SolverError(f"simulation failed at t={out.time_s:.1f}s: {out.reason}", time_s=out.time_s)
    return out


def simulate_batch(stacks: Sequence[ThermalStack], cycle: CureCycle, materials: MaterialPair,
                   config: SolverConfig = DEFAULT_CONFIG) -> list[SimulationResult | SimulationFailure]:
    """One independent simulation per stack under a shared cycle.

    Per-stack failures come back as SimulationFailure entries; the batch
    itself never aborts.
    """
    if not stacks:
        raise ValueError("empty stack list")
    raw = run_pairs(stacks, [cycle] * len(stacks), materials, config)
    results: list[SimulationResult | SimulationFailure] = []
    for i, stack in enumerate(stacks):
        if raw.status[i] == _kernels.STATUS_OK:
            results.append(_result_from_raw(raw, i, cycle))
        else:
            results.append(_failure_from_raw(raw, i, stack))
    return results


def metrics_for_pairs(stacks: Sequence[ThermalStack], cycles: Sequence[CureCycle],
                      materials: MaterialPair, config: SolverConfig = DEFAULT_CONFIG,
                      chunk: int = 2048) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised (T_max, rate, ok) per (stack, cycle) pair, trace storage
    kept to one chunk at a time."""
    n = len(stacks)
    tmax = np.full(n, np.nan)
    rate = np.full(n, np.nan)
    ok = np.zeros(n, dtype=bool)
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        raw = run_pairs(stacks[lo:hi], cycles[lo:hi], materials, config)
        holds = np.array([c.final_hold_temperature for c in cycles[lo:hi]])
        t, r, good = _metrics_from_raw(raw, holds)
        tmax[lo:hi] = t
        rate[lo:hi] = r
        ok[lo:hi] = good
    return tmax, rate, ok


def _metrics_from_raw(raw: RawBatch, holds: np.ndarray):
    b, m = raw.part.shape
    cols = np.arange(m)
    valid = cols[None, :] < raw.n_out[:, None]
    air = np.where(valid, raw.air, -np.inf)
    reached = air >= holds[:, None] - 1e-9
    has = reached.any(axis=1)
    idx = np.argmax(reached, axis=1)
    last = raw.n_out - 1
    lo = np.maximum(idx - 1, 0)
    hi = np.minimum(idx + 1, last)
    p_lo = np.take_along_axis(raw.part, lo[:, None], axis=1)[:, 0]
    p_hi = np.take_along_axis(raw.part, hi[:, None], axis=1)[:, 0]
    dt_min = raw.times_min[1] - raw.times_min[0] if m > 1 else 1.0
    span = np.maximum(hi - lo, 1) * dt_min
    rate = (p_hi - p_lo) / span
    with np.errstate(invalid="ignore"):
        tmax = np.nanmax(np.where(valid, raw.part, -np.inf), axis=1)
    good = (raw.status == _kernels.STATUS_OK) & has
    return tmax, rate, good


def step(state: SolverState, dt: float, air_temperature: float, stack: ThermalStack,
         mesh: Mesh, materials: MaterialPair) -> SolverState:
    """Advance one implicit step of ``dt`` seconds under a fixed air
    temperature (K).  Temperatures in the state are kelvin."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    n_el = mesh.elements_per_layer
    if state.nodal_temperatures.size != mesh.n_nodes:
        raise ValidationError("state size does not match mesh")
    if not (np.isclose(mesh.node_positions[-1], stack.L1) and np.isclose(mesh.node_positions[0], -stack.L2)):
        raise ValidationError("mesh extents do not match the stack thicknesses")

    temps = state.nodal_temperatures - KELVIN_OFFSET
    alpha = state.nodal_degree_of_cure.copy()
    air_c = air_temperature - KELVIN_OFFSET
    bp_t = np.array([0.0, 1.0])
    bp_v = np.array([air_c, air_c])
    out = np.empty(2)
    status, fail = _kernels._integrate(
        temps, alpha,
        stack.h1, stack.L1, stack.L2, stack.h2,
        *_kinetics_args(materials)[:-1],
        n_el, dt, state.time_s / 60.0,
        bp_t, bp_v, 2, 1, 1,
        out, out.copy(), out.copy(), out.copy())
    if status != _kernels.STATUS_OK:
        raise SolverError(f"step failed at t={state.time_s + dt:.1f}s", time_s=state.time_s + dt)
    return SolverState(state.time_s + dt, temps + KELVIN_OFFSET, alpha)


def initial_state(mesh: Mesh, materials: MaterialPair, temperature_k: float) -> SolverState:
    """Uniform-temperature state with the seed degree of cure."""
    alpha0 = materials.part.kinetics.initial_degree_of_cure
    return SolverState(0.0,
                       np.full(mesh.n_nodes, temperature_k),
                       np.full(mesh.elements_per_layer + 1, alpha0))


def export_result(result: SimulationResult, path) -> None:
    """Columnar plot file: time_s, T_air_C, T_part_C, T_tool_C, alpha_center."""
    data = np.column_stack([
        result.air_trace.times * 60.0,
        result.air_trace.values,
        result.part_center_trace.values,
        result.tool_bottom_trace.values,
        result.alpha_center,
    ])
    np.savetxt(path, data, fmt="%.6f",
               header="time_s T_air_C T_part_C T_tool_C alpha_center", comments="")
