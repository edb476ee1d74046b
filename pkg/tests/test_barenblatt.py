import math

import numpy as np
import pytest
from scipy import integrate

from aggdiff import NumericalToleranceError, RadialGrid, derive_params, ground_state
from aggdiff.barenblatt import lp_norm_of_profile, selfsim_solution
from aggdiff.grid import sphere_area

# frozen regression value: C1 for (d, m, M) = (3, 4/3, 1), solved from
# 4 pi int_0^sqrt(8 C1) (C1 - s^2/8)^3 s^2 ds = 1 by independent quadrature
C1_D3_M43_M1 = 0.5524577245940205


def profile_mass(profile, d):
    upper = profile.support_radius
    if not math.isfinite(upper):
        upper = 40.0
    val, _ = integrate.quad(lambda r: profile(r) * r ** (d - 1), 0.0, upper, limit=200)
    return sphere_area(d) * val


def test_gaussian_peak_value():
    p = derive_params(2, 1.0, 1.0)
    gs = ground_state(p)
    assert abs(gs.peak() - 1.0 / (2.0 * math.pi)) < 1e-15
    assert gs.support_radius == math.inf


def test_c1_regression_value():
    p = derive_params(3, 4.0 / 3.0, 1.0)
    gs = ground_state(p)
    assert abs(gs.C1 - C1_D3_M43_M1) < 1e-10
    # profile formula: (C1 - r^2/8)_+^3 for m = 4/3
    r = 1.0
    assert abs(gs(r) - max(gs.C1 - r**2 / 8.0, 0.0) ** 3) < 1e-14
    assert abs(gs.support_radius - math.sqrt(8.0 * gs.C1)) < 1e-12


def test_c1_independent_quadrature_oracle():
    p = derive_params(3, 4.0 / 3.0, 1.0)
    gs = ground_state(p)
    assert abs(profile_mass(gs, 3) - 1.0) < 1e-8


@pytest.mark.parametrize("d,m,M", [(2, 1.0, 1.0), (3, 1.0, 2.0), (3, 4.0 / 3.0, 0.5)])
def test_profile_mass(d, m, M):
    gs = ground_state(derive_params(d, m, M))
    assert abs(profile_mass(gs, d) - M) < 1e-8 * M


def test_profile_nonnegative_and_compact_support():
    p = derive_params(3, 4.0 / 3.0, 1.0)
    gs = ground_state(p)
    r = np.linspace(0.0, 10.0, 1001)
    vals = gs(r)
    assert np.all(vals >= 0)
    assert np.all(vals[r > gs.support_radius] == 0.0)


def test_zero_flux_identity_on_grid():
    # eta theta_M + grad theta_M^m = 0 on the interior of the support;
    # theta_M^{m-1} is quadratic in r, so centered differences are exact
    p = derive_params(3, 4.0 / 3.0, 1.0)
    grid = RadialGrid(4.0, 400, 3)
    gs = ground_state(p)
    theta = gs.on_grid(grid)
    tm = theta.values**p.m
    r_int = grid.interfaces[1:-1]
    flux = r_int * 0.5 * (theta.values[:-1] + theta.values[1:]) + np.diff(tm) / grid.dr
    interior = (r_int > 2 * grid.dr) & (r_int < gs.support_radius - 2 * grid.dr)
    scale = np.max(np.abs(theta.values))
    assert np.max(np.abs(flux[interior])) < 5.0 * grid.dr**2 * scale


def test_bracket_failure_reports_range():
    p = derive_params(3, 4.0 / 3.0, 1.0)
    with pytest.raises(NumericalToleranceError, match="bracket"):
        ground_state(p, bracket=(1e-6, 1e-5))


def test_selfsim_solution_scaling():
    p = derive_params(2, 1.0, 1.0)
    gs = ground_state(p)
    x = np.linspace(0.0, 5.0, 50)
    assert np.allclose(selfsim_solution(gs, 0.0, x), gs(x), rtol=1e-14)
    # sup value at t = 1: (1 + t/beta)^{-d beta} theta_M(0) = 1/(3 * 2 pi)
    assert abs(selfsim_solution(gs, 1.0, 0.0) - 1.0 / (6.0 * math.pi)) < 1e-14


@pytest.mark.parametrize("t", [0.0, 1.0, 10.0])
def test_selfsim_solution_conserves_mass(t):
    p = derive_params(3, 4.0 / 3.0, 1.0)
    gs = ground_state(p)
    s = 1.0 + t / p.beta
    upper = s**p.beta * gs.support_radius
    val, _ = integrate.quad(
        lambda r: selfsim_solution(gs, t, r) * r**2, 0.0, upper, limit=200
    )
    assert abs(sphere_area(3) * val - 1.0) < 1e-8


def test_lp_norm_gaussian_oracle():
    # ||theta_M||_2^2 = M^2 (4 pi)^{-d/2} for the m = 1 ground state
    for d in (2, 3):
        p = derive_params(d, 1.0, 1.0)
        gs = ground_state(p)
        exact = (4.0 * math.pi) ** (-d / 4.0)
        assert abs(lp_norm_of_profile(gs, 2.0) - exact) < 1e-10
        assert lp_norm_of_profile(gs, np.inf) == gs.peak()


def test_on_grid_matches_callable():
    p = derive_params(3, 4.0 / 3.0, 1.0)
    grid = RadialGrid(4.0, 123, 3)
    gs = ground_state(p)
    assert np.array_equal(gs.on_grid(grid).values, gs(grid.centers))
