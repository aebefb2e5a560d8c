"""Time integration of the interface equation and run-time monitors.

Schemes:
    rk4_explicit  classical four-stage Runge-Kutta on the full velocity
    imex_euler    backward Euler on the flat-interface linear part
                  -D |m| (D = k drho / 2 mu), forward Euler on the rest
    imex_cnab     Crank-Nicolson on the linear part, Adams-Bashforth 2
                  on the rest (bootstrapped with one imex_euler step)

The implicit multiplier is diagonal in Fourier space and leaves mode 0
untouched, so all schemes preserve the interface mean to the accuracy
of the velocity quadrature.  Optional step-doubling adaptivity compares
one dt step against two dt/2 steps and keeps the finer answer.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from . import operators
from .operators import OperatorWorkspace, PhysicalParams
from .spectral import (Grid, NonFiniteSamplesError, SpectralField,
                       integral_mean, sobolev_norm)

__all__ = [
    "SchemeConfig",
    "SimulationState",
    "MonitorSeries",
    "step",
    "run",
    "cfl_limit",
    "tail_slope_report",
    "blow_up_status",
]

_SCHEMES = ("rk4_explicit", "imex_euler", "imex_cnab")


@dataclass
class SchemeConfig:
    name: str = "rk4_explicit"
    dt: float = 1e-2
    adaptive: bool = False
    tol: float = 1e-8          # error per unit time for step doubling
    dt_min: float = 1e-10
    dt_max: float | None = None
    cfl_safety: float = 0.5

    def __post_init__(self):
        if self.name not in _SCHEMES:
            raise ValueError(
                f"unknown scheme {self.name!r}; choose from {_SCHEMES}")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.adaptive and self.name == "imex_cnab":
            raise ValueError(
                "step-doubling adaptivity is not supported for the "
                "two-step imex_cnab scheme")


@dataclass
class MonitorSeries:
    norm_orders: tuple[float, ...] = (1.75, 2.0)
    times: list = dc_field(default_factory=list)
    means: list = dc_field(default_factory=list)
    sobolev: dict = dc_field(default_factory=dict)
    tail_slopes: list = dc_field(default_factory=list)
    max_abs: list = dc_field(default_factory=list)

    def __post_init__(self):
        for s in self.norm_orders:
            self.sobolev.setdefault(s, [])

    def record(self, t: float, f: SpectralField):
        self.times.append(t)
        self.means.append(integral_mean(f))
        for s in self.norm_orders:
            self.sobolev[s].append(sobolev_norm(f, s))
        slope, _ = tail_slope_report(f)
        self.tail_slopes.append(slope)
        self.max_abs.append(float(np.max(np.abs(f.samples))))


@dataclass
class SimulationState:
    field: SpectralField
    t: float = 0.0
    step_index: int = 0
    dt: float = 1e-2
    termination: str | None = None
    monitors: MonitorSeries | None = None
    aux: dict = dc_field(default_factory=dict)


def cfl_limit(grid: Grid, params: PhysicalParams, cfl_safety: float) -> float:
    """Largest explicit step: cfl * (dx/2pi) * 4 pi mu / (k drho)."""
    return cfl_safety * (grid.spacing / (2.0 * np.pi)) * (
        4.0 * np.pi * params.viscosity
        / (params.permeability * params.delta_rho))


def _rhs(f, params, ws):
    return operators.decomposed_rhs(f, params, ws)


def _rk4(f, dt, params, ws):
    k1 = _rhs(f, params, ws)
    k2 = _rhs(f + (0.5 * dt) * k1, params, ws)
    k3 = _rhs(f + (0.5 * dt) * k2, params, ws)
    k4 = _rhs(f + dt * k3, params, ws)
    incr = (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return f + incr


def _explicit_spectrum(f, params, ws):
    """Raw spectrum of Psi(f) + D |m| f (the non-stiff remainder)."""
    n = f.grid.n_points
    m = np.arange(n // 2 + 1)
    rhs = _rhs(f, params, ws)
    return rhs.rspec + params.decay_coefficient * m * f.rspec


def _imex_euler(f, dt, params, ws, aux):
    n = f.grid.n_points
    m = np.arange(n // 2 + 1)
    expl = _explicit_spectrum(f, params, ws)
    new = (f.rspec + dt * expl) / (1.0 + dt * params.decay_coefficient * m)
    aux["prev_explicit"] = expl
    return SpectralField(f.grid, np.fft.irfft(new, n))


def _imex_cnab(f, dt, params, ws, aux):
    prev = aux.get("prev_explicit")
    if prev is None:
        return _imex_euler(f, dt, params, ws, aux)
    n = f.grid.n_points
    m = np.arange(n // 2 + 1)
    lam = params.decay_coefficient * m
    expl = _explicit_spectrum(f, params, ws)
    new = ((1.0 - 0.5 * dt * lam) * f.rspec
           + dt * (1.5 * expl - 0.5 * prev)) / (1.0 + 0.5 * dt * lam)
    aux["prev_explicit"] = expl
    return SpectralField(f.grid, np.fft.irfft(new, n))


def _advance(f, dt, cfg, params, ws, aux):
    if cfg.name == "rk4_explicit":
        return _rk4(f, dt, params, ws)
    if cfg.name == "imex_euler":
        return _imex_euler(f, dt, params, ws, aux)
    return _imex_cnab(f, dt, params, ws, aux)


def step(state: SimulationState, cfg: SchemeConfig, params: PhysicalParams,
         ws: OperatorWorkspace) -> SimulationState:
    """One accepted time step; returns a new state, t strictly increasing.

    With cfg.adaptive the step is accepted when the step-doubling error
    estimate is below tol*dt, halving on rejection; the accepted field
    is the two-half-step result.  dt falling below dt_min terminates.
    """
    f = state.field
    dt = state.dt
    aux = dict(state.aux)
    cap = cfg.dt_max
    if cfg.name == "rk4_explicit":
        cfl = cfl_limit(f.grid, params, cfg.cfl_safety)
        cap = cfl if cap is None else min(cap, cfl)

    if not cfg.adaptive:
        new_f = _advance(f, dt, cfg, params, ws, aux)
        return SimulationState(new_f, state.t + dt, state.step_index + 1,
                               dt, None, state.monitors, aux)

    while True:
        coarse = _advance(f, dt, cfg, params, ws, dict(aux))
        aux_fine = dict(aux)
        half = _advance(f, 0.5 * dt, cfg, params, ws, aux_fine)
        fine = _advance(half, 0.5 * dt, cfg, params, ws, aux_fine)
        err = sobolev_norm(coarse - fine, 0.0)
        budget = cfg.tol * dt
        if err <= budget or dt <= cfg.dt_min:
            next_dt = dt
            if err < 0.3 * budget:
                next_dt = 2.0 * dt
            elif err > 0.9 * budget:
                next_dt = 0.5 * dt
            if cap is not None:
                next_dt = min(next_dt, cap)
            next_dt = max(next_dt, cfg.dt_min)
            term = "dt_underflow" if (err > budget and dt <= cfg.dt_min) \
                else None
            return SimulationState(fine, state.t + dt, state.step_index + 1,
                                   next_dt, term, state.monitors, aux_fine)
        dt = max(0.5 * dt, cfg.dt_min)


def run(f0: SpectralField, t_end: float, cfg: SchemeConfig,
        params: PhysicalParams, ws: OperatorWorkspace | None = None,
        monitor_stride: int = 1, sinks=(),
        norm_orders: tuple[float, ...] = (1.75, 2.0)) -> SimulationState:
    """Integrate from f0 to t_end, recording monitors every monitor_stride
    accepted steps (plus the initial and final states).

    Terminates early with a recorded cause if samples stop being finite
    or the adaptive step underflows dt_min.
    """
    if ws is None:
        ws = OperatorWorkspace(f0.grid)
    if ws.grid.n_points != f0.grid.n_points:
        raise ValueError("workspace grid does not match the field")
    if cfg.name == "rk4_explicit":
        cfl = cfl_limit(f0.grid, params, cfg.cfl_safety)
        if cfg.dt > cfl * (1.0 + 1e-12):
            raise ValueError(
                f"dt={cfg.dt} exceeds the explicit stability limit {cfl:.3e}")

    monitors = MonitorSeries(norm_orders=tuple(norm_orders))
    state = SimulationState(f0, 0.0, 0, cfg.dt, None, monitors)
    monitors.record(state.t, state.field)
    for sink in sinks:
        sink(state)

    while state.termination is None and state.t < t_end - 1e-14:
        remaining = t_end - state.t
        took_partial = state.dt > remaining
        if took_partial:
            state = SimulationState(state.field, state.t, state.step_index,
                                    remaining, None, monitors, state.aux)
        try:
            new = step(state, cfg, params, ws)
        except NonFiniteSamplesError:
            # overflow inside the step; keep the last finite state
            state = SimulationState(state.field, state.t, state.step_index,
                                    state.dt, "nonfinite_samples", monitors,
                                    state.aux)
            break
        state = new
        if took_partial and not cfg.adaptive:
            state.dt = cfg.dt
        if state.step_index % monitor_stride == 0:
            monitors.record(state.t, state.field)
            for sink in sinks:
                sink(state)

    if state.termination is None:
        state.termination = "t_end"
    if not monitors.times or monitors.times[-1] != state.t:
        monitors.record(state.t, state.field)
        for sink in sinks:
            sink(state)
    return state


def tail_slope_report(f: SpectralField, floor: float = 1e-14):
    """Least-squares slope of log |c_m| over m in [n/8, n/4].

    Returns (slope, "ok"), or (None, "tail_below_floor") when any mode
    in the window sits below the floor and no meaningful fit exists.
    """
    n = f.grid.n_points
    lo, hi = n // 8, n // 4
    m, c = f.coeff_array()
    window = np.abs(c[lo:hi + 1])
    if window.size < 3 or np.any(window < floor):
        return None, "tail_below_floor"
    modes = m[lo:hi + 1].astype(float)
    slope = np.polyfit(modes, np.log(window), 1)[0]
    return float(slope), "ok"


def blow_up_status(state: SimulationState, s: float,
                   ceiling: float = 1e6, growth_factor: float = 10.0) -> str:
    """Classify the current H^s norm against a hard ceiling and against
    the previous monitored value ("ok" / "norm_ceiling" / "rapid_growth").

    s is restricted to (3/2, 2]: below that the norm does not control
    the solution class, above it nothing further is gained.
    """
    if not 1.5 < s <= 2.0:
        raise ValueError(f"Sobolev order must lie in (3/2, 2], got {s}")
    current = sobolev_norm(state.field, s)
    if not np.isfinite(current) or current > ceiling:
        return "norm_ceiling"
    mon = state.monitors
    if mon is not None and s in mon.sobolev and len(mon.sobolev[s]) >= 2:
        prev = mon.sobolev[s][-2]
        if prev > 0 and current / prev > growth_factor:
            return "rapid_growth"
    return "ok"
