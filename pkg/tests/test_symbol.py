import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import bisect

from sigmadamp import symbol
from sigmadamp.config import REFERENCE, ProblemConfig
from sigmadamp.verify import ode_reference

FRICTION_VISCO = ProblemConfig(1.0, 0.0, 1.0, 1.0, 1.0, dim_n=1)

configs = st.builds(
    lambda sig, f1, f2, m1, m2: ProblemConfig(sig, f1 * sig, f2 * sig, m1, m2, dim_n=1),
    st.floats(1.0, 2.0), st.floats(0.0, 0.45), st.floats(0.55, 1.0),
    st.floats(0.1, 3.0), st.floats(0.1, 3.0))


def exact_kernels(cfg, t, r, dps=50):
    """K0, K1, dtK1 from the 2x2 matrix exponential in high precision."""
    mp.mp.dps = dps
    b = mp.mpf(float(symbol.damping(cfg, r)))
    c = mp.mpf(float(symbol.stiffness(cfg, r)))
    E = mp.expm(mp.matrix([[0, 1], [-c, -b]]) * mp.mpf(t))
    return float(E[0, 0]), float(E[0, 1]), float(E[1, 1])


# ---------------------------------------------------------------- discriminant and roots

def test_discriminant_examples():
    assert symbol.discriminant(FRICTION_VISCO, 1.0) == 0.0
    assert symbol.discriminant(FRICTION_VISCO, 0.5) == pytest.approx(0.5625, abs=1e-15)
    assert symbol.discriminant(REFERENCE, 1.0) == 0.0


def test_roots_factorize_for_frictional_viscoelastic_case():
    roots = symbol.char_roots(FRICTION_VISCO, np.array([0.5]))
    assert roots.lambda1[0].real == pytest.approx(-0.25, abs=1e-15)
    assert roots.lambda2[0].real == pytest.approx(-1.0, abs=1e-15)
    assert roots.regime[0] == symbol.Regime.RealDistinct


def test_double_root_at_discriminant_zero():
    roots = symbol.char_roots(FRICTION_VISCO, np.array([1.0]))
    assert roots.regime[0] == symbol.Regime.NearDegenerate
    assert roots.lambda1[0] == pytest.approx(-1.0)
    assert roots.lambda2[0] == pytest.approx(-1.0)


def test_small_frequency_roots_of_reference():
    r = 0.01
    roots = symbol.char_roots(REFERENCE, np.array([r]))
    assert roots.lambda1[0].real == pytest.approx(-r ** 1.5, rel=0.1)
    assert roots.lambda2[0].real == pytest.approx(-r ** 0.5, rel=0.1)


@settings(max_examples=200)
@given(configs, st.floats(-3, 2))
def test_vieta_identities(cfg, log_r):
    r = np.array([10.0 ** log_r])
    roots = symbol.char_roots(cfg, r)
    b = symbol.damping(cfg, r)
    c = symbol.stiffness(cfg, r)
    assert abs(roots.lambda1 + roots.lambda2 + b)[0] <= 1e-12 * b[0]
    assert abs(roots.lambda1 * roots.lambda2 - c)[0] <= 1e-12 * c[0]
    assert roots.lambda1.real[0] <= 0 and roots.lambda2.real[0] <= 0
    if roots.regime[0] == symbol.Regime.RealDistinct:
        assert roots.lambda1.real[0] > roots.lambda2.real[0]
    if roots.regime[0] == symbol.Regime.ComplexPair:
        assert roots.lambda1.imag[0] > 0 > roots.lambda2.imag[0]


def test_small_and_large_frequency_asymptotics():
    cfg = ProblemConfig(1.5, 0.3, 1.0, 0.7, 1.8, dim_n=2)
    eps = symbol.find_eps_star(cfg).eps_star
    r = np.array([1e-4 * eps, 1e-6 * eps])
    roots = symbol.char_roots(cfg, r)
    np.testing.assert_allclose(roots.lambda2.real / (-cfg.mu1 * r ** (2 * cfg.sigma1)), 1, rtol=1e-2)
    np.testing.assert_allclose(roots.lambda1.real * cfg.mu1 * r ** (2 * cfg.sigma1)
                               / (-r ** (2 * cfg.sigma)), 1, rtol=1e-2)
    R = np.array([1e4 / eps, 1e6 / eps])
    roots = symbol.char_roots(cfg, R)
    np.testing.assert_allclose(roots.lambda2.real / (-cfg.mu2 * R ** (2 * cfg.sigma2)), 1, rtol=1e-2)
    np.testing.assert_allclose(roots.lambda1.real * cfg.mu2 * R ** (2 * cfg.sigma2)
                               / (-R ** (2 * cfg.sigma)), 1, rtol=1e-2)


@pytest.mark.parametrize("s1, s2", [(0.3, 0.8), (0.2, 0.6), (0.1, 0.95), (0.4, 0.55)])
def test_sign_of_first_root_correction(s1, s2):
    cfg = ProblemConfig(1.0, s1, s2, dim_n=2)
    eps = symbol.find_eps_star(cfg).eps_star
    r = np.logspace(-6, -3, 7) * eps
    lam1 = symbol.char_roots(cfg, r).lambda1.real
    sign = np.sign(-lam1 - r ** (2 * cfg.diffusive_order))
    assert np.all(sign == np.sign(s1 + s2 - 1.0))


# ---------------------------------------------------------------- kernels

@given(configs, st.floats(-3, 2))
def test_kernels_at_time_zero(cfg, log_r):
    r = np.array([10.0 ** log_r])
    assert symbol.khat0(cfg, 0.0, r)[0] == pytest.approx(1.0, abs=1e-14)
    assert symbol.khat1(cfg, 0.0, r)[0] == 0.0
    assert symbol.dt_khat0(cfg, 0.0, r)[0] == 0.0
    assert symbol.dt_khat1(cfg, 0.0, r)[0] == pytest.approx(1.0, abs=1e-14)


def test_khat1_closed_form_real_roots():
    expected = (math.exp(-0.5) - math.exp(-2.0)) / 0.75
    assert symbol.khat1(FRICTION_VISCO, 2.0, 0.5) == pytest.approx(expected, rel=1e-14)
    k0 = (-0.25 * math.exp(-2.0) + math.exp(-0.5)) / 0.75
    assert symbol.khat0(FRICTION_VISCO, 2.0, 0.5) == pytest.approx(k0, rel=1e-14)


def test_khat1_at_double_root():
    assert symbol.khat1(FRICTION_VISCO, 3.0, 1.0) == pytest.approx(3 * math.exp(-3.0), rel=1e-14)
    assert symbol.khat0(FRICTION_VISCO, 3.0, 1.0) == pytest.approx(4 * math.exp(-3.0), rel=1e-14)


def test_dt_khat0_uses_stiffness():
    assert symbol.dt_khat0(FRICTION_VISCO, 2.0, 0.5) == pytest.approx(
        -0.25 * symbol.khat1(FRICTION_VISCO, 2.0, 0.5), rel=1e-15)


@settings(max_examples=200)
@given(configs, st.floats(-3, 2), st.floats(0, 50))
def test_dt_khat0_identity(cfg, log_r, t):
    r = 10.0 ** log_r
    lhs = symbol.dt_khat0(cfg, t, r) + symbol.stiffness(cfg, r) * symbol.khat1(cfg, t, r)
    assert abs(lhs) <= 1e-10 * max(1.0, abs(symbol.stiffness(cfg, r) * symbol.khat1(cfg, t, r)))


def test_kernels_match_matrix_exponential_in_each_regime():
    cfg = ProblemConfig(1.0, 0.25, 0.75, 0.3, 0.3, dim_n=2)  # complex pair around r = 1
    for r in (0.01, 1.0, 30.0):
        for t in (0.3, 2.0, 7.0):
            k0, k1, dk1 = exact_kernels(cfg, t, r)
            assert symbol.khat0(cfg, t, r) == pytest.approx(k0, rel=1e-10, abs=1e-300)
            assert symbol.khat1(cfg, t, r) == pytest.approx(k1, rel=1e-10, abs=1e-300)
            assert symbol.dt_khat1(cfg, t, r) == pytest.approx(dk1, rel=1e-10, abs=1e-300)


def test_kernels_match_ode_integration():
    rng = np.random.default_rng(3)
    for cfg, r in ((REFERENCE, 0.05), (REFERENCE, 1.0 + 1e-5), (ProblemConfig(1, 0.25, 0.75, 0.3, 0.3), 1.0)):
        for t in (0.5, 3.0):
            u0, u1 = rng.normal(size=2)
            k = symbol.kernel_matrix(cfg, t, np.array([r]))
            u = k[0][0] * u0 + k[1][0] * u1
            ut = k[2][0] * u0 + k[3][0] * u1
            ru, rut = ode_reference(cfg, r, t, u0, u1)
            assert u == pytest.approx(ru, rel=1e-8)
            assert ut == pytest.approx(rut, rel=1e-8)


def test_hyperbolic_sine_form_of_khat1():
    r, t = 0.3, 4.0
    b = symbol.damping(REFERENCE, r)
    A = 0.5 * math.sqrt(symbol.discriminant(REFERENCE, r))
    alt = math.exp(-0.5 * b * t) * t * math.sinh(A * t) / (A * t)
    assert symbol.khat1(REFERENCE, t, r) == pytest.approx(alt, rel=1e-13)


def test_degenerate_switch_is_continuous():
    # reference discriminant r(1-r)^2 against threshold 1e-6 b^2: locate the switch radius
    def rel(r):
        return symbol.discriminant(REFERENCE, r) / symbol.damping(REFERENCE, r) ** 2 - symbol.DELTA
    r_switch = bisect(rel, 0.9, 1.0 - 1e-9, xtol=1e-15)
    t = 5.0
    inside, outside = r_switch * (1 + 1e-12), r_switch * (1 - 1e-12)
    reg = symbol.regime_of(REFERENCE, np.array([inside, outside]))
    assert reg[0] == symbol.Regime.NearDegenerate and reg[1] == symbol.Regime.RealDistinct
    for fn in (symbol.khat0, symbol.khat1, symbol.dt_khat1):
        a, b = fn(REFERENCE, t, inside), fn(REFERENCE, t, outside)
        assert abs(a - b) <= 1e-8
    k0, k1, _ = exact_kernels(REFERENCE, t, inside)
    assert symbol.khat1(REFERENCE, t, inside) == pytest.approx(k1, rel=1e-12)


def test_khat1_approaches_double_root_limit():
    t = 4.0
    gaps = []
    for d in (1e-1, 1e-2, 1e-3, 1e-4, 1e-5):
        r = 1.0 - d
        lam_bar = -0.5 * symbol.damping(REFERENCE, r)
        gaps.append(abs(symbol.khat1(REFERENCE, t, r) - t * math.exp(lam_bar * t)))
    assert all(a > b for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 1e-8


def test_free_particle_at_zero_frequency():
    r = np.array([0.0])
    assert symbol.khat0(REFERENCE, 2.5, r)[0] == 1.0
    assert symbol.khat1(REFERENCE, 2.5, r)[0] == 2.5
    assert symbol.dt_khat1(REFERENCE, 2.5, r)[0] == 1.0


# ---------------------------------------------------------------- split kernels

def test_split_kernel_closed_form():
    k01, k02, k11, k12 = symbol.split_kernels(FRICTION_VISCO, 1.0, 0.5)
    assert k11 == pytest.approx(math.exp(-0.25) / 0.75, rel=1e-14)


@given(st.floats(-3, -0.2), st.floats(0, 100))
def test_split_kernels_sum_to_kernels(log_r, t):
    r = 10.0 ** log_r
    k01, k02, k11, k12 = symbol.split_kernels(REFERENCE, t, r)
    # the pieces cancel, so the error scale is set by the pieces themselves
    assert abs(k01 + k02 - symbol.khat0(REFERENCE, t, r)) <= 1e-12 * max(abs(k01), abs(k02))
    assert abs(k11 + k12 - symbol.khat1(REFERENCE, t, r)) <= 1e-12 * max(abs(k11), abs(k12))


def test_split_kernels_at_time_zero():
    k01, k02, _, _ = symbol.split_kernels(FRICTION_VISCO, 0.0, 0.5)
    assert k01 == pytest.approx(1.0 / 0.75)
    assert k02 == pytest.approx(-0.25 / 0.75)
    assert k01 + k02 == pytest.approx(1.0)


def test_split_kernels_reject_double_root():
    with pytest.raises(symbol.DegenerateSplitError):
        symbol.split_kernels(FRICTION_VISCO, 1.0, 1.0)


# ---------------------------------------------------------------- profiles and cut-offs

def test_profile_values():
    assert symbol.ghat0(REFERENCE, 1.0, 1.0) == pytest.approx(math.exp(-1))
    r = np.linspace(0.1, 3, 11)
    np.testing.assert_array_equal(symbol.ghat1(FRICTION_VISCO, 2.0, r), symbol.ghat0(FRICTION_VISCO, 2.0, r))


@given(st.floats(0.01, 100), st.floats(0.01, 5))
def test_profile_self_similarity(t, r):
    a = 1.0 / (2 * REFERENCE.diffusive_order)
    assert symbol.ghat0(REFERENCE, 4 * t, r) == pytest.approx(
        symbol.ghat0(REFERENCE, t, r * 4 ** a), rel=1e-12)


def test_cutoff_supports():
    zb = symbol.ZoneBoundaries(0.9)
    assert symbol.cutoff("L", 0.0, zb) == 1.0
    assert symbol.cutoff("M", 0.0, zb) == 0.0
    assert symbol.cutoff("H", 0.0, zb) == 0.0
    r = 0.75 * 0.9
    assert symbol.cutoff("L", r, zb) + symbol.cutoff("M", r, zb) == pytest.approx(1.0, abs=1e-15)
    assert symbol.cutoff("H", r, zb) == 0.0
    assert symbol.cutoff("H", 3 / 0.9, zb) == 1.0
    assert symbol.cutoff("L", 0.9, zb) == 0.0
    assert symbol.cutoff("H", 1 / 0.9, zb) == 0.0


@given(st.floats(0.05, 0.95), st.floats(0, 50))
def test_partition_of_unity(eps, r):
    zb = symbol.ZoneBoundaries(eps)
    total = sum(symbol.cutoff(z, r, zb) for z in "LMH")
    assert abs(total - 1.0) <= 1e-15
    for z in "LMH":
        assert -1e-15 <= symbol.cutoff(z, r, zb) <= 1 + 1e-15


def test_cutoff_transitions_are_monotone():
    zb = symbol.ZoneBoundaries(0.8)
    r = np.linspace(0, 5, 20001)
    assert np.all(np.diff(symbol.cutoff("L", r, zb)) <= 0)
    assert np.all(np.diff(symbol.cutoff("H", r, zb)) >= 0)


# ---------------------------------------------------------------- zone radius

def test_eps_star_touching_zero():
    assert symbol.find_eps_star(FRICTION_VISCO).eps_star == pytest.approx(0.9, rel=1e-6)


def test_eps_star_reference_against_bisection():
    # exact factorization: discriminant = r (1 - r)^2, single touching zero at r = 1
    assert symbol.find_eps_star(REFERENCE).eps_star == pytest.approx(0.9, rel=1e-6)


def test_eps_star_with_sign_changes():
    cfg = ProblemConfig(1.0, 0.25, 0.75, 0.5, 0.5, dim_n=2)

    def disc(r):
        return 0.25 * (r ** 0.5 + r ** 1.5) ** 2 - 4 * r ** 2

    lo = bisect(disc, 1e-3, 1.0, xtol=1e-15)
    hi = bisect(disc, 1.0, 1e3, xtol=1e-13)
    eps = symbol.find_eps_star(cfg).eps_star
    assert eps == pytest.approx(0.9 * min(lo, 1 / hi), rel=1e-9)


def test_eps_star_default_without_zero():
    cfg = ProblemConfig(1.0, 0.25, 0.75, 3.0, 3.0, dim_n=2)
    assert symbol.discriminant_zeros(cfg) == []
    assert symbol.find_eps_star(cfg).eps_star == 0.5


@settings(max_examples=50, deadline=None)
@given(configs)
def test_discriminant_positive_at_eps_star(cfg):
    try:
        zb = symbol.find_eps_star(cfg)
    except symbol.ZoneError:
        return
    assert symbol.discriminant(cfg, zb.eps_star) > 0
    assert symbol.discriminant(cfg, 1 / zb.eps_star) > 0
