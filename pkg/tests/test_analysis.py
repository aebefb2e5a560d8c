"""Dispersion extraction, decay fitting, partition-of-unity localization."""

import numpy as np
import pytest

from muskat import (Grid, MonitorSeries, OperatorWorkspace, PhysicalParams,
                    SpectralField, build_partition, decomposed_rhs,
                    fit_decay_rate, linearized_rate, linearized_spectrum,
                    localization_defect, mode_amplitude, sobolev_norm)

PARAMS = PhysicalParams.from_contrast(1.0, 1.0, 1.0)


@pytest.fixture(scope="module")
def ws64():
    return OperatorWorkspace(Grid(64))


@pytest.fixture(scope="module")
def ws128():
    return OperatorWorkspace(Grid(128))


def test_mode_amplitude():
    g = Grid(32)
    f = SpectralField.from_modes(g, [(0, 0.7, 0.0), (3, 0.4, 0.3)])
    assert mode_amplitude(f, 0) == pytest.approx(0.7, abs=1e-14)
    assert mode_amplitude(f, 3) == pytest.approx(0.5, abs=1e-14)
    assert mode_amplitude(f, 5) < 1e-14


def test_linearized_rate_matches_dispersion(ws64):
    for m in (1, 2, 3, 4):
        rate = linearized_rate(m, PARAMS, ws64)
        assert abs(rate + 0.5 * m) / (0.5 * m) < 1e-5


def test_linearized_rate_parameter_scaling(ws64):
    p = PhysicalParams.from_contrast(1.0, 0.5, 3.0)
    assert linearized_rate(1, p, ws64) == pytest.approx(-3.0, rel=1e-5)


def test_linearized_rate_validation(ws64):
    with pytest.raises(ValueError, match="mode"):
        linearized_rate(0, PARAMS, ws64)
    with pytest.raises(ValueError, match="mode"):
        linearized_rate(17, PARAMS, ws64)  # > 64/4
    with pytest.raises(ValueError, match="eps"):
        linearized_rate(2, PARAMS, ws64, eps=1e-8)
    with pytest.raises(ValueError, match="eps"):
        linearized_rate(2, PARAMS, ws64, eps=1e-2)


def test_no_cross_mode_leakage(ws64):
    # the velocity of eps*cos(2x) stays (to O(eps)) on harmonics of 2
    eps = 1e-5
    f = SpectralField.from_modes(ws64.grid, [(2, eps, 0.0)])
    psi = decomposed_rhs(f, PARAMS, ws64)
    for m in (1, 3, 4, 6):
        assert mode_amplitude(psi, m) <= 1e-5 * eps


def test_linearized_spectrum_report(ws64):
    rep = linearized_spectrum(range(1, 9), PARAMS, ws64)
    assert rep.max_rel_error < 1e-4
    assert np.all(np.diff(rep.predicted) < 0)
    assert rep.rel_errors.shape == (8,)
    assert np.all(rep.modes == np.arange(1, 9))


def _synthetic_series(rate, n_samples=21, t1=1.0, amp=0.8):
    mon = MonitorSeries(norm_orders=(2.0,))
    for t in np.linspace(0.0, t1, n_samples):
        mon.times.append(float(t))
        v = amp * np.exp(-rate * t)
        mon.max_abs.append(v)
        mon.sobolev[2.0].append(3.0 * v)
        mon.means.append(0.0)
        mon.tail_slopes.append(None)
    return mon


def test_fit_decay_rate_exact_exponential():
    mon = _synthetic_series(0.37)
    fit = fit_decay_rate(mon, "max_abs")
    assert fit.fitted_rate == pytest.approx(0.37, abs=1e-10)
    assert fit.r_squared > 1.0 - 1e-12
    assert fit.window == (0.0, 1.0)
    # the sobolev series carries the same rate
    fit2 = fit_decay_rate(mon, 2.0)
    assert fit2.fitted_rate == pytest.approx(0.37, abs=1e-10)


def test_fit_decay_rate_window_restriction():
    mon = _synthetic_series(1.1, n_samples=41, t1=2.0)
    fit = fit_decay_rate(mon, "max_abs", window=(0.5, 1.5))
    assert fit.window[0] == pytest.approx(0.5, abs=1e-12)
    assert fit.window[1] == pytest.approx(1.5, abs=1e-12)
    assert fit.fitted_rate == pytest.approx(1.1, abs=1e-10)


def test_fit_decay_rate_errors():
    mon = _synthetic_series(0.5)
    with pytest.raises(ValueError, match="not monitored"):
        fit_decay_rate(mon, 3.5)
    with pytest.raises(ValueError, match="t1 > t0"):
        fit_decay_rate(mon, "max_abs", window=(0.8, 0.2))
    with pytest.raises(ValueError, match="at least 10 samples"):
        fit_decay_rate(mon, "max_abs", window=(0.0, 0.2))
    deep = _synthetic_series(40.0)  # decays through the 1e-13 floor
    with pytest.raises(ValueError, match="log-fitted"):
        fit_decay_rate(deep, "max_abs")


# -- partition of unity ----------------------------------------------

def test_partition_sums_to_one():
    g = Grid(256)
    pu = build_partition(3, g)
    assert pu.count == 16
    total = np.sum(pu.bumps, axis=0)
    assert np.max(np.abs(total - 1.0)) < 1e-15
    assert np.all(pu.bumps >= 0.0)


def test_partition_supports():
    g = Grid(256)
    pu = build_partition(3, g)
    x = g.nodes
    for j in range(pu.count):
        d = np.abs(np.remainder(x - pu.centers[j] + np.pi, 2 * np.pi) - np.pi)
        outside = d >= pu.support_radius
        assert np.all(pu.bumps[j][outside] == 0.0)
        far = d >= pu.cutoff_radius
        assert np.all(pu.cutoffs[j][far] == 0.0)
    # cutoffs are exactly 1 on the bump support
    assert np.array_equal(pu.cutoffs * pu.bumps, pu.bumps)


def test_partition_validation():
    with pytest.raises(ValueError, match=">= 1"):
        build_partition(0, Grid(256))
    with pytest.raises(ValueError, match="resolves at most"):
        build_partition(4, Grid(128))  # 32 bumps > 128/8


def test_localization_exact_at_flat_interface(ws128):
    f = SpectralField.zero(ws128.grid)
    h = SpectralField.from_modes(ws128.grid, [(3, 1.0, 0.0)])
    rep = localization_defect(f, h, 1.0, 2, ws128)
    assert rep.max_defect <= 1e-9
    assert rep.per_window.shape == (8,)
    assert rep.input_norm == pytest.approx(sobolev_norm(h, 1.0), rel=1e-15)


def test_localization_linear_in_perturbation(ws128):
    f = SpectralField.from_modes(ws128.grid, [(1, 0.3, 0.0)])
    h = SpectralField.from_modes(ws128.grid, [(4, 1.0, 0.0)])
    one = localization_defect(f, h, 1.0, 2, ws128)
    two = localization_defect(f, 2.0 * h, 1.0, 2, ws128)
    assert np.allclose(two.per_window, 2.0 * one.per_window, rtol=1e-10)
    assert two.level == 2
    assert two.tau == 1.0


def test_localization_grid_identity(ws128):
    other = Grid(128)
    f = SpectralField.zero(other)
    h = SpectralField.from_modes(ws128.grid, [(3, 1.0, 0.0)])
    with pytest.raises(ValueError, match="workspace grid"):
        localization_defect(f, h, 1.0, 2, ws128)
