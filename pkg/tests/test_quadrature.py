import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate
from scipy.special import gamma

from sigmadamp import quadrature as quad
from sigmadamp import symbol
from sigmadamp.config import REFERENCE


def test_rule_matches_gauss_legendre():
    x, w = np.polynomial.legendre.leggauss(7)
    np.testing.assert_allclose(quad.NODES[1::2], x, atol=1e-15)
    np.testing.assert_allclose(quad.GAUSS[1::2], w, atol=1e-15)
    assert quad.KRONROD.sum() == pytest.approx(2.0, abs=1e-14)
    # Kronrod rule integrates degree-22 polynomials exactly
    assert np.dot(quad.KRONROD, quad.NODES ** 22) == pytest.approx(2 / 23, rel=1e-13)


@pytest.mark.parametrize("n, area", [(1, 2.0), (2, 2 * math.pi), (3, 4 * math.pi), (4, 2 * math.pi ** 2)])
def test_sphere_area(n, area):
    assert quad.sphere_area(n) == pytest.approx(area, rel=1e-14)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_gaussian_volume_integral(n):
    res = quad.integrate_radial(lambda r: np.exp(-r * r), n)
    assert res.value == pytest.approx(math.pi ** (n / 2), rel=1e-10)


def test_gaussian_symbol_norm():
    norm = quad.radial_norm_l2(REFERENCE.with_(dim_n=1), lambda r: np.exp(-r * r))
    assert norm == pytest.approx((math.pi / 2) ** 0.25, rel=1e-10)


def test_weighted_gaussian_norm():
    # ∫_{R^2} r^{2s} e^{-2r^2} dξ = π Γ(s+1) / 2^{s+1}
    s = 0.75
    norm = quad.radial_norm_l2(REFERENCE, lambda r: np.exp(-r * r), s=s)
    assert norm ** 2 == pytest.approx(math.pi * gamma(s + 1) / 2 ** (s + 1), rel=1e-10)


def test_integrable_power_singularity():
    res = quad.integrate_radial(lambda r: r ** -1.5 * np.exp(-r), 2, rtol=1e-12, atol=0)
    assert res.value == pytest.approx(2 * math.pi * gamma(0.5), rel=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.floats(-6, 6))
def test_scale_invariance(log_scale):
    lam = 10.0 ** log_scale
    res = quad.integrate_radial(lambda r: np.exp(-(r / lam) ** 2), 3, rtol=1e-11, atol=0)
    assert res.value == pytest.approx(math.pi ** 1.5 * lam ** 3, rel=1e-9)


def test_finite_interval_with_breakpoints():
    f = lambda r: np.where(r < 1.0, 1.0, 0.0)
    res = quad.integrate_radial(f, 2, 0.0, 2.0, breakpoints=[1.0], rtol=1e-12, atol=0)
    assert res.value == pytest.approx(math.pi, rel=1e-10)


def test_divergence_at_infinity():
    with pytest.raises(quad.IntegralDivergence, match="integral infinite"):
        quad.integrate_radial(lambda r: np.ones_like(r), 2)


def test_divergence_at_origin():
    with pytest.raises(quad.IntegralDivergence, match="integral infinite"):
        quad.integrate_radial(lambda r: r ** -3.0 * np.exp(-r), 2)


def test_panel_budget_error_names_location():
    f = lambda r: np.sin(1e4 * r) ** 2
    with pytest.raises(quad.QuadratureError, match="worst panel"):
        quad.integrate_radial(f, 1, 0.5, 20.0, rtol=1e-12, atol=0, max_panels=30)


def test_kernel_norm_integral_matches_scipy():
    t = 50.0
    zb = symbol.find_eps_star(REFERENCE)
    got = quad.p_norm_integral(REFERENCE, "K1", 0, 0.0, 1.0, t)

    def f(r):
        k = symbol.khat1(REFERENCE, t, r)
        return 2 * math.pi * r * k * k * symbol.cutoff("L", r, zb)

    ref = integrate.quad(f, 0, zb.eps_star, epsabs=0, epsrel=1e-12, limit=500,
                         points=zb.breakpoints[:2])[0]
    assert got == pytest.approx(ref, rel=1e-8)


def test_profile_difference_norm_matches_scipy():
    t = 100.0
    zb = symbol.find_eps_star(REFERENCE)
    got = quad.profile_diff_norm(REFERENCE, "K1-vs-G1", 0.0, 0, t)

    def f(r):
        d = symbol.split_kernel_piece(REFERENCE, "K1_1", 0, t, r) - symbol.ghat1(REFERENCE, t, r)
        return 2 * math.pi * r * (d * symbol.cutoff("L", r, zb)) ** 2

    ref = integrate.quad(f, 0, zb.eps_star, epsabs=0, epsrel=1e-12, limit=500,
                         points=zb.breakpoints[:2])[0]
    assert got == pytest.approx(math.sqrt(ref), rel=1e-7)


def test_profile_difference_rejects_unknown_piece():
    with pytest.raises(ValueError):
        quad.profile_difference(REFERENCE, "K2-vs-G2", 0, 1.0, 0.1)


@given(st.floats(-3, 3), st.floats(-5, 5))
def test_fit_recovers_power_law(slope, intercept):
    t = np.logspace(0, 3, 13)
    fit = quad.fit_rate(np.column_stack([t, math.exp(intercept) * t ** slope]))
    assert fit.slope == pytest.approx(slope, abs=1e-10)
    assert fit.intercept == pytest.approx(intercept, abs=1e-8)
    assert fit.max_residual < 1e-9


def test_fit_unpacks():
    t = np.logspace(0, 2, 5)
    slope, intercept, resid = quad.fit_rate(np.column_stack([t, 3 / t]))
    assert slope == pytest.approx(-1)


@pytest.mark.parametrize("samples, message", [
    ([(1, 1), (10, 1), (100, 1)], "at least 4"),
    ([(1, 1), (10, 0), (100, 1), (1000, 1)], "positive"),
    ([(1, 1), (10, 1), (5, 1), (1000, 1)], "increasing"),
    ([(1, 1), (2, 1), (3, 1), (50, 1)], "two decades"),
])
def test_fit_rejects_bad_samples(samples, message):
    with pytest.raises(ValueError, match=message):
        quad.fit_rate(samples)


def test_middle_zone_decays_exponentially():
    zb = symbol.find_eps_star(REFERENCE)
    times = [10.0, 20.0, 40.0, 80.0]
    norms = [quad.radial_norm_l2(REFERENCE, lambda r, t=t: symbol.khat1(REFERENCE, t, r),
                                 zone="M", boundaries=zb, atol=0.0) for t in times]
    local = [math.log(b / a) / math.log(2) for a, b in zip(norms, norms[1:])]
    # doubling slopes keep steepening, as they must for e^{-ct}
    assert all(x > y for x, y in zip(local, local[1:]))
    assert local[-1] < -10
