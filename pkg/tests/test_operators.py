"""Contour operators: decomposition identity, symbols, frozen coefficients."""

import numpy as np
import pytest

from muskat import (Grid, OperatorWorkspace, PhysicalParams, QuadratureRule,
                    SpectralField, decomposed_rhs, direct_rhs,
                    drift_diffusion_multiplier, frozen_coefficients,
                    full_operator, half_laplacian, integral_mean)
from muskat import operators as op

from helpers import max_diff, random_interface

PARAMS = PhysicalParams.from_contrast(1.0, 1.0, 1.0)


@pytest.fixture(scope="module")
def ws64():
    return OperatorWorkspace(Grid(64))


@pytest.fixture(scope="module")
def ws128():
    return OperatorWorkspace(Grid(128))


# -- physical parameters ----------------------------------------------

def test_params_relations():
    p = PhysicalParams.from_contrast(2.0, 0.5, 3.0)
    assert np.isclose(p.delta_rho, 3.0)
    assert np.isclose(p.decay_coefficient, 2.0 * np.pi * p.rate_factor)
    assert np.isclose(p.decay_coefficient, 2.0 * 3.0 / (2.0 * 0.5))


def test_params_rayleigh_taylor_check():
    with pytest.raises(ValueError, match="Rayleigh-Taylor"):
        PhysicalParams(1.0, 1.0, rho_minus=0.5, rho_plus=1.5, gravity=9.81)
    with pytest.raises(ValueError, match="rho_minus - rho_plus"):
        PhysicalParams(1.0, 1.0, 1.0, 1.0, 9.81)   # zero jump
    with pytest.raises(ValueError):
        PhysicalParams(-1.0, 1.0, 1.0, 0.0, 9.81)
    with pytest.raises(ValueError):
        PhysicalParams(1.0, 1.0, 1.0, 0.0, gravity=0.0)


# -- workspace --------------------------------------------------------

def test_workspace_rule_constraints():
    g = Grid(64)
    with pytest.raises(ValueError, match="multiple"):
        OperatorWorkspace(g, QuadratureRule.shifted_symmetric(96))
    with pytest.raises(ValueError, match="shifted"):
        OperatorWorkspace(g, QuadratureRule.desingularized(128))


def test_workspace_shifted_matrix(ws64):
    f = SpectralField.from_modes(ws64.grid, [(2, 1.0, 0.0), (5, 0.0, 0.3)])
    mat = ws64.shifted_matrix(f)
    x = ws64.grid.nodes[:, None] - ws64.s[None, :]
    want = np.cos(2 * x) + 0.3 * np.sin(5 * x)
    assert np.max(np.abs(mat - want)) < 1e-12


# -- flat-interface symbol --------------------------------------------

def test_flat_symbol_per_mode(ws64):
    zero = SpectralField.zero(ws64.grid)
    for m in (1, 2, 3, 5, 9, 16):
        for mode in [(m, 1.0, 0.0), (m, 0.0, 1.0)]:
            h = SpectralField.from_modes(ws64.grid, [mode])
            got = full_operator(zero, h, ws64)
            want = (-2.0 * np.pi) * half_laplacian(h)
            assert max_diff(got, want) < 1e-10, f"mode {mode}"


def test_operator_linear_in_h(ws64):
    rng = np.random.default_rng(12)
    f = random_interface(ws64.grid, rng, slope=1.0)
    h1 = random_interface(ws64.grid, rng, slope=1.0)
    h2 = random_interface(ws64.grid, rng, slope=1.0)
    combo = full_operator(f, 2.0 * h1 - 3.0 * h2, ws64)
    split = (2.0 * full_operator(f, h1, ws64)
             - 3.0 * full_operator(f, h2, ws64))
    assert max_diff(combo, split) < 1e-10


def test_vertical_translation_invariance(ws64):
    rng = np.random.default_rng(13)
    f = random_interface(ws64.grid, rng, slope=0.8)
    h = random_interface(ws64.grid, rng, slope=1.0)
    a = full_operator(f, h, ws64)
    b = full_operator(f + 2.7, h, ws64)
    assert max_diff(a, b) < 1e-12


def test_horizontal_translation_equivariance(ws128):
    rng = np.random.default_rng(14)
    g = ws128.grid
    f = SpectralField.from_modes(g, [(1, 0.3, 0.0)])
    h = random_interface(g, rng, slope=1.0)
    shift = 13
    f_r = SpectralField(g, np.roll(f.samples, shift))
    h_r = SpectralField(g, np.roll(h.samples, shift))
    got = full_operator(f_r, h_r, ws128).samples
    want = np.roll(full_operator(f, h, ws128).samples, shift)
    assert np.max(np.abs(got - want)) < 1e-11


# -- interface velocity -----------------------------------------------

def test_constant_interfaces_are_equilibria(ws64):
    for c in (0.0, 0.7, -1.3):
        f = SpectralField(ws64.grid, np.full(64, c))
        rhs = decomposed_rhs(f, PARAMS, ws64)
        assert np.max(np.abs(rhs.samples)) < 1e-12


def test_velocity_mean_free(ws128):
    rng = np.random.default_rng(15)
    for _ in range(3):
        f = random_interface(ws128.grid, rng, slope=1.5)
        assert abs(integral_mean(decomposed_rhs(f, PARAMS, ws128))) < 1e-9


def test_direct_matches_decomposed(ws128):
    rng = np.random.default_rng(16)
    for slope in (0.5, 1.5):
        f = random_interface(ws128.grid, rng, slope=slope)
        assert max_diff(direct_rhs(f, PARAMS, ws128),
                        decomposed_rhs(f, PARAMS, ws128)) < 1e-7


def test_velocity_parity():
    # even f gives even velocity, odd f gives odd velocity
    g = Grid(128)
    ws = OperatorWorkspace(g)
    idx = (g.n_points - np.arange(g.n_points)) % g.n_points   # x -> -x
    even = SpectralField.from_modes(g, [(1, 0.5, 0.0), (3, 0.2, 0.0)])
    v = decomposed_rhs(even, PARAMS, ws).samples
    assert np.max(np.abs(v[idx] - v)) < 1e-9
    odd = SpectralField.from_modes(g, [(1, 0.0, 0.5), (3, 0.0, 0.2)])
    v = decomposed_rhs(odd, PARAMS, ws).samples
    assert np.max(np.abs(v[idx] + v)) < 1e-9


def test_velocity_odd_in_interface(ws64):
    # flipping the interface flips the velocity
    rng = np.random.default_rng(17)
    f = random_interface(ws64.grid, rng, slope=1.0)
    a = decomposed_rhs(f, PARAMS, ws64).samples
    b = decomposed_rhs(-f, PARAMS, ws64).samples
    assert np.max(np.abs(a + b)) < 1e-10


def test_rate_prefactor_scaling(ws64):
    f = SpectralField.from_modes(ws64.grid, [(1, 0.4, 0.0)])
    base = decomposed_rhs(f, PARAMS, ws64).samples
    doubled = decomposed_rhs(
        f, PhysicalParams.from_contrast(2.0, 1.0, 1.0), ws64).samples
    assert np.max(np.abs(doubled - 2.0 * base)) < 1e-12


# -- quadrature self-convergence of the coefficients ------------------

def test_coefficients_insensitive_to_rule_refinement():
    g = Grid(64)
    f = SpectralField.from_modes(g, [(1, 0.4, 0.0)])
    coarse = OperatorWorkspace(g, QuadratureRule.shifted_symmetric(256))
    fine = OperatorWorkspace(g, QuadratureRule.shifted_symmetric(1024))
    # periodic integrands: spectrally converged already
    for fn in (op.transport_coefficient, op.bounded_coefficient):
        assert max_diff(fn(f, coarse), fn(f, fine)) < 1e-12
    # flat-kernel pieces carry the corrected O(h^4) seam residue
    for fn in (op.flat_gap_coefficient, op.flat_pv_coefficient):
        assert max_diff(fn(f, coarse), fn(f, fine)) < 1e-9


def test_transport_split_agrees_with_production():
    g = Grid(128)
    f = SpectralField.from_modes(g, [(1, 0.3, 0.0)])
    ws = OperatorWorkspace(g, QuadratureRule.shifted_symmetric(512))
    assert max_diff(op.transport_coefficient_split(f, ws),
                    op.transport_coefficient(f, ws)) < 1e-10


def test_far_field_gauss_refinement(ws64):
    f = SpectralField.from_modes(ws64.grid, [(1, 0.4, 0.0)])
    finer = OperatorWorkspace(ws64.grid, gauss_nodes=96)
    assert max_diff(op.far_field_coefficient(f, ws64),
                    op.far_field_coefficient(f, finer)) < 1e-12


def test_far_field_against_block_sum(ws64):
    # independent oracle: sum Gauss-Legendre panels over period blocks of
    # the tail integral; the zero-mean tail leaves an O(1/K^3) truncation
    f = SpectralField.from_modes(ws64.grid, [(1, 0.4, 0.0), (2, 0.0, 0.15)])
    ours = op.far_field_coefficient(f, ws64).samples
    u, w = np.polynomial.legendre.leggauss(32)
    blocks = 300
    starts = np.pi + 2.0 * np.pi * np.arange(blocks)
    s = (starts[:, None] + np.pi * (u[None, :] + 1.0)).ravel()
    wts = np.tile(np.pi * w, blocks)
    for j in (0, 10, 33):
        x = ws64.grid.nodes[j]
        fx = float(f.eval_at(x))
        dp = fx - f.eval_at(x - s)
        dm = fx - f.eval_at(x + s)
        vals = s * (1.0 / (s * s + dp * dp) - 1.0 / (s * s + dm * dm))
        ref = float(np.dot(wts, vals))
        assert abs(ours[j] - ref) < 1e-9


# -- frozen-coefficient model -----------------------------------------

def test_frozen_coefficients_at_zero(ws64):
    f = SpectralField.from_modes(ws64.grid, [(1, 0.5, 0.0)])
    drift, diff = frozen_coefficients(f, 0.0, ws64)
    assert np.max(np.abs(drift.samples)) < 1e-12
    assert np.allclose(diff.samples, 2.0 * np.pi, atol=1e-14)


def test_frozen_diffusion_analytic(ws64):
    f = SpectralField.from_modes(ws64.grid, [(1, 0.5, 0.0)])
    _, diff = frozen_coefficients(f, 1.0, ws64)
    x = ws64.grid.nodes
    want = 2.0 * np.pi / (1.0 + 0.25 * np.sin(x) ** 2)
    assert np.max(np.abs(diff.samples - want)) < 1e-13


def test_frozen_drift_scales_quadratically_for_small_tau(ws64):
    # every drift ingredient pairs two factors that vanish at the flat
    # state (slope times kernel deviation), so the first correction to
    # the zero drift is O(tau^2): doubling tau quadruples it
    f = SpectralField.from_modes(ws64.grid, [(1, 0.5, 0.0)])
    d1, _ = frozen_coefficients(f, 0.01, ws64)
    d2, _ = frozen_coefficients(f, 0.02, ws64)
    n1 = np.max(np.abs(d1.samples))
    n2 = np.max(np.abs(d2.samples))
    assert n1 > 0
    assert abs(n2 / n1 - 4.0) < 0.05


def test_multiplier_symbol():
    g = Grid(64)
    h = SpectralField.from_modes(g, [(3, 1.0, 0.0)])
    got = drift_diffusion_multiplier(0.7, 2.0, h)
    want = SpectralField.from_modes(g, [(3, -6.0, -2.1)])
    assert max_diff(got, want) < 1e-12


def test_multiplier_matches_flat_operator(ws64):
    rng = np.random.default_rng(19)
    h = SpectralField.from_modes(
        ws64.grid, [(m, rng.normal(), rng.normal()) for m in range(1, 16)])
    got = drift_diffusion_multiplier(0.0, 2.0 * np.pi, h)
    want = full_operator(SpectralField.zero(ws64.grid), h, ws64)
    assert max_diff(got, want) < 1e-9


def test_multiplier_nyquist_keeps_only_dissipation():
    g = Grid(32)
    nyq = SpectralField.from_modes(g, [(16, 1.0, 0.0)])
    got = drift_diffusion_multiplier(5.0, 1.0, nyq)
    want = SpectralField.from_modes(g, [(16, -16.0, 0.0)])
    assert max_diff(got, want) < 1e-12


def test_multiplier_requires_positive_diffusion():
    g = Grid(32)
    h = SpectralField.from_modes(g, [(1, 1.0, 0.0)])
    with pytest.raises(ValueError, match="diffusion"):
        drift_diffusion_multiplier(1.0, 0.0, h)
