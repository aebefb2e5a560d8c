"""Diagnostics: linearized rates, decay fits, localized frozen operators.

Three independent checks of the solver live here:

* the numerically extracted growth/decay rate of a single small mode,
  compared with the closed-form dispersion relation;
* least-squares exponential decay fits on monitored amplitude series;
* a smooth dyadic partition of unity used to measure how well the full
  nonlocal operator is approximated, window by window, by a
  drift-diffusion multiplier with coefficients frozen at the window
  center.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import operators
from .operators import OperatorWorkspace, PhysicalParams
from .spectral import SpectralField, sobolev_norm

__all__ = [
    "mode_amplitude",
    "linearized_rate",
    "SpectrumReport",
    "linearized_spectrum",
    "DecayFit",
    "fit_decay_rate",
    "PartitionOfUnity",
    "build_partition",
    "LocalizationReport",
    "localization_defect",
]


def mode_amplitude(f: SpectralField, m: int) -> float:
    """|c_m| + |c_-m| style amplitude, i.e. twice |c_m| for real fields."""
    if m == 0:
        return abs(float(f.coeff(0).real))
    return 2.0 * abs(f.coeff(m))


def linearized_rate(mode: int, params: PhysicalParams,
                    ws: OperatorWorkspace, eps: float = 1e-5) -> float:
    """Growth rate of cos(m x) under the linearization at the flat state.

    Evaluates the full nonlinear interface velocity on eps*cos(m x) and
    reads off the coefficient of cos(m x); for eps small this is the
    eigenvalue of the linearized evolution, -k drho m / (2 mu).  The
    one-sided difference is O(eps) accurate, so eps is confined to
    [1e-7, 1e-3].
    """
    n = ws.grid.n_points
    if not 1 <= mode <= n // 4:
        raise ValueError("mode must satisfy 1 <= mode <= n_points/4")
    if not 1e-7 <= eps <= 1e-3:
        raise ValueError("eps must lie in [1e-7, 1e-3]")
    f = SpectralField.from_modes(ws.grid, [(mode, eps, 0.0)])
    psi = operators.decomposed_rhs(f, params, ws)
    return 2.0 * float(psi.coeff(mode).real) / eps


@dataclass
class SpectrumReport:
    modes: np.ndarray
    computed: np.ndarray
    predicted: np.ndarray     # -k drho m / (2 mu), strictly decreasing

    @property
    def rel_errors(self) -> np.ndarray:
        return np.abs(self.computed - self.predicted) / np.abs(self.predicted)

    @property
    def max_rel_error(self) -> float:
        return float(np.max(self.rel_errors))


def linearized_spectrum(modes, params: PhysicalParams,
                        ws: OperatorWorkspace,
                        eps: float = 1e-5) -> SpectrumReport:
    modes = np.asarray(list(modes), dtype=int)
    computed = np.array([linearized_rate(int(m), params, ws, eps)
                         for m in modes])
    predicted = -params.decay_coefficient * modes.astype(float)
    return SpectrumReport(modes, computed, predicted)


@dataclass
class DecayFit:
    window: tuple      # (t0, t1) actually fitted
    fitted_rate: float  # norm ~ exp(-fitted_rate * t)
    r_squared: float


def fit_decay_rate(series, norm_key, window=None) -> DecayFit:
    """Least-squares exponential decay rate of a monitored norm.

    `series` is a MonitorSeries; `norm_key` selects series.sobolev[key]
    (a Sobolev order) or the literal string "max_abs".  `window` is an
    optional (t0, t1) restriction.  Requires at least 10 samples in the
    window, all above 1e-13, so the log fit is meaningful.
    """
    t = np.asarray(series.times, dtype=float)
    if norm_key == "max_abs":
        v = np.asarray(series.max_abs, dtype=float)
    elif norm_key in series.sobolev:
        v = np.asarray(series.sobolev[norm_key], dtype=float)
    else:
        keys = sorted(series.sobolev)
        raise ValueError(f"norm_key {norm_key!r} not monitored "
                         f"(have {keys} and 'max_abs')")
    if window is not None:
        t0, t1 = window
        if t1 <= t0:
            raise ValueError("window must satisfy t1 > t0")
        mask = (t >= t0) & (t <= t1)
        t, v = t[mask], v[mask]
    if len(t) < 10:
        raise ValueError(
            f"need at least 10 samples in the window, have {len(t)}")
    if np.any(v <= 1e-13):
        raise ValueError("norm values at or below 1e-13 cannot be log-fitted")
    logv = np.log(v)
    slope, intercept = np.polyfit(t, logv, 1)
    pred = slope * t + intercept
    ss_res = float(np.sum((logv - pred) ** 2))
    ss_tot = float(np.sum((logv - np.mean(logv)) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - ss_res / ss_tot)
    return DecayFit((float(t[0]), float(t[-1])), -float(slope), r2)


# -- partition of unity and frozen-coefficient localization -----------

def _mollifier(u: np.ndarray) -> np.ndarray:
    """exp(-1/(1-u^2)) inside |u| < 1, zero outside."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - u[inside] ** 2))
    return out


def _smooth_step(u: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for u<=0, 1 for u>=1."""
    u = np.asarray(u, dtype=float)
    out = np.empty_like(u)
    lo = u <= 0.0
    hi = u >= 1.0
    mid = ~lo & ~hi
    out[lo] = 0.0
    out[hi] = 1.0
    um = u[mid]
    g = np.exp(-1.0 / um)
    g1 = np.exp(-1.0 / (1.0 - um))
    out[mid] = g / (g + g1)
    return out


def _wrapped_distance(x, center: float) -> np.ndarray:
    return np.abs(np.remainder(np.asarray(x, dtype=float) - center + np.pi,
                               2.0 * np.pi) - np.pi)


@dataclass
class PartitionOfUnity:
    """2^(level+1) periodic bumps on the grid, summing exactly to one.

    Bump j is a mollifier profile supported within radius 2/3 * spacing
    of its center, normalized by the pointwise sum over j.  Cutoff j is
    a wider plateau field equal to 1 on the bump support and vanishing
    beyond radius 5/3 * spacing, so cutoff * bump = bump identically;
    the cutoff radius marks where coefficients frozen at the center are
    trusted.
    """

    level: int
    spacing: float
    centers: np.ndarray = field(repr=False)
    bumps: np.ndarray = field(repr=False)      # (count, n) on the grid
    cutoffs: np.ndarray = field(repr=False)    # (count, n)

    @property
    def count(self) -> int:
        return len(self.centers)

    @property
    def support_radius(self) -> float:
        return 2.0 * self.spacing / 3.0

    @property
    def cutoff_radius(self) -> float:
        return 5.0 * self.spacing / 3.0


def build_partition(level: int, grid) -> PartitionOfUnity:
    """Mollifier-profile partition; needs 2^(level+1) <= n_points/8 so
    each bump is resolved by at least 8 grid cells."""
    if level < 1:
        raise ValueError("partition level must be >= 1")
    count = 2 ** (level + 1)
    if count > grid.n_points // 8:
        raise ValueError(
            f"partition level {level} needs {count} bumps but the grid "
            f"resolves at most {grid.n_points // 8}")
    spacing = 2.0 * np.pi / count
    centers = -np.pi + spacing * np.arange(count)
    x = grid.nodes
    r_supp = 2.0 * spacing / 3.0
    raw = np.stack([_mollifier(_wrapped_distance(x, c) / r_supp)
                    for c in centers])
    bumps = raw / np.sum(raw, axis=0)[None, :]
    # plateau-1 cutoffs: 1 out to the bump support, gone by 5/3 spacing
    cutoffs = np.stack([
        _smooth_step((5.0 * spacing / 3.0 - _wrapped_distance(x, c))
                     / spacing) for c in centers])
    return PartitionOfUnity(level, spacing, centers, bumps, cutoffs)


@dataclass
class LocalizationReport:
    level: int
    tau: float
    per_window: np.ndarray   # H^1 defect per window
    input_norm: float        # H^1 norm of the perturbation

    @property
    def max_defect(self) -> float:
        return float(np.max(self.per_window))


def localization_defect(f: SpectralField, h: SpectralField, tau: float,
                        level: int, ws: OperatorWorkspace) -> LocalizationReport:
    """Window-wise gap between the full operator and its frozen model.

    For each partition window, compares the full operator at the scaled
    interface tau*f, applied to h, against the constant-coefficient
    drift-diffusion multiplier whose coefficients are taken at the
    window center, measuring the difference in H^1 after masking by the
    window bump.  Exact (to round-off) at f = 0, and shrinks as the
    windows do on smooth interfaces.
    """
    grid = ws.grid
    if f.grid is not grid or h.grid is not grid:
        raise ValueError("fields must live on the workspace grid")
    pu = build_partition(level, grid)
    scaled = tau * f
    full = operators.full_operator(scaled, h, ws)
    drift, diffusion = operators.frozen_coefficients(f, tau, ws)
    defects = np.empty(pu.count)
    for j in range(pu.count):
        a_j = float(drift.eval_at(pu.centers[j]))
        b_j = float(diffusion.eval_at(pu.centers[j]))
        frozen = operators.drift_diffusion_multiplier(a_j, b_j, h)
        masked = SpectralField(
            grid, pu.bumps[j] * (full.samples - frozen.samples))
        defects[j] = sobolev_norm(masked, 1.0)
    return LocalizationReport(level, tau, defects, sobolev_norm(h, 1.0))
