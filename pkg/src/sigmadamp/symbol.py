"""Fourier-side objects: characteristic roots, solution kernels, cut-offs, profiles.

Every function is vectorised over the radial frequency ``r`` and the time ``t``
(numpy broadcasting). Kernels are evaluated from the mean root
-b/2 and the half gap A = sqrt(D)/2 of the per-mode quadratic
λ² + b λ + c = 0 with b = μ1 r^{2σ1} + μ2 r^{2σ2}, c = r^{2σ}, D = b² - 4c.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np
from scipy.optimize import brentq

from .config import ProblemConfig

#: relative discriminant threshold |D| <= DELTA * b**2 of the near-degenerate regime
DELTA = 1e-6


class Regime(IntEnum):
    RealDistinct = 0
    ComplexPair = 1
    NearDegenerate = 2


@dataclass
class CharacteristicRoots:
    lambda1: np.ndarray
    lambda2: np.ndarray
    regime: np.ndarray
    discriminant: np.ndarray


def _powr(r, a):
    r = np.asarray(r, dtype=float)
    if a == 0:
        return np.ones_like(r)
    with np.errstate(divide="ignore"):
        return r ** a


def damping(config: ProblemConfig, r):
    """b(r) = μ1 r^{2σ1} + μ2 r^{2σ2}."""
    return config.mu1 * _powr(r, 2 * config.sigma1) + config.mu2 * _powr(r, 2 * config.sigma2)


def stiffness(config: ProblemConfig, r):
    """c(r) = r^{2σ}."""
    return _powr(r, 2 * config.sigma)


def discriminant(config: ProblemConfig, r):
    """(μ1 r^{2σ1} + μ2 r^{2σ2})² - 4 r^{2σ}."""
    b = damping(config, r)
    return b * b - 4.0 * stiffness(config, r)


def regime_of(config: ProblemConfig, r):
    b = damping(config, r)
    d = b * b - 4.0 * stiffness(config, r)
    scale = DELTA * b * b
    reg = np.full(np.shape(d), Regime.NearDegenerate, dtype=np.int8)
    reg[d > scale] = Regime.RealDistinct
    reg[d < -scale] = Regime.ComplexPair
    return reg


def char_roots(config: ProblemConfig, r) -> CharacteristicRoots:
    """Both roots, λ1 the '+sqrt' branch and λ2 the '-sqrt' branch.

    In the real regime λ2 is computed directly and λ1 = c/λ2, which keeps the
    slowly decaying root accurate at small frequencies.
    """
    r = np.asarray(r, dtype=float)
    b = damping(config, r)
    c = stiffness(config, r)
    d = b * b - 4.0 * c
    reg = regime_of(config, r)
    sq = np.sqrt(np.abs(d))
    real = d >= 0
    lam2_real = -0.5 * (b + sq)
    with np.errstate(divide="ignore", invalid="ignore"):
        lam1_real = np.where(lam2_real != 0, c / np.where(lam2_real != 0, lam2_real, 1.0), 0.0)
    lam1 = np.where(real, lam1_real, -0.5 * b) + 1j * np.where(real, 0.0, 0.5 * sq)
    lam2 = np.where(real, lam2_real, -0.5 * b) - 1j * np.where(real, 0.0, 0.5 * sq)
    return CharacteristicRoots(lam1, lam2, reg, d)


def _kernels(config: ProblemConfig, t, r):
    """Return (K0, K1, dtK1) as real arrays, broadcast over (t, r)."""
    t = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=float)
    t, r = np.broadcast_arrays(t, r)
    b = damping(config, r)
    c = stiffness(config, r)
    d = b * b - 4.0 * c
    lam_bar = -0.5 * b
    w = 0.25 * d  # A**2, signed
    near = np.abs(d) <= DELTA * b * b
    real = (d > 0) & ~near
    cplx = (d < 0) & ~near

    k0 = np.empty(t.shape)
    k1 = np.empty(t.shape)
    dk1 = np.empty(t.shape)

    with np.errstate(over="ignore", under="ignore", invalid="ignore", divide="ignore"):
        if real.any():
            tt, bb, cc, A = t[real], b[real], c[real], np.sqrt(w[real])
            lam2 = -0.5 * bb - A
            lam1 = cc / lam2
            e1 = np.exp(lam1 * tt)
            g = np.exp(-2.0 * A * tt)
            kk1 = -e1 * np.expm1(-2.0 * A * tt) / (2.0 * A)
            k1[real] = kk1
            k0[real] = 0.5 * e1 * (1.0 + g) + 0.5 * bb * kk1
            dk1[real] = e1 * (lam1 - lam2 * g) / (2.0 * A)
        if cplx.any():
            tt, bb = t[cplx], b[cplx]
            om = np.sqrt(-w[cplx])
            e = np.exp(-0.5 * bb * tt)
            cs = np.cos(om * tt)
            sn = np.sin(om * tt) / om
            k1[cplx] = e * sn
            k0[cplx] = e * (cs + 0.5 * bb * sn)
            dk1[cplx] = e * (cs - 0.5 * bb * sn)
        if near.any():
            tt, bb, ww = t[near], b[near], w[near]
            cs, sn = _cosh_sinhc(ww, tt)
            e = np.exp(-0.5 * bb * tt)
            k1[near] = e * sn
            k0[near] = e * (cs + 0.5 * bb * sn)
            dk1[near] = e * (cs - 0.5 * bb * sn)
    # modes with b = 0 (r = 0 and sigma1 > 0): free particle
    zero = (b == 0)
    if zero.any():
        k0[zero] = 1.0
        k1[zero] = t[zero]
        dk1[zero] = 1.0
    # underflow of exp(-inf * 0) style products
    for arr in (k0, k1, dk1):
        np.nan_to_num(arr, copy=False, nan=0.0, posinf=np.inf, neginf=-np.inf)
    return k0, k1, dk1


def _cosh_sinhc(w, t):
    """cosh(sqrt(w) t) and sinh(sqrt(w) t)/sqrt(w) for signed w, entire in w."""
    z = w * t * t
    cs = np.empty_like(z)
    sn = np.empty_like(z)
    small = np.abs(z) <= 1.0
    if small.any():
        zs = z[small]
        term_c = np.ones_like(zs)
        term_s = np.ones_like(zs)
        sum_c = term_c.copy()
        sum_s = term_s.copy()
        for k in range(1, 12):
            term_c = term_c * zs / ((2 * k - 1) * (2 * k))
            term_s = term_s * zs / ((2 * k) * (2 * k + 1))
            sum_c += term_c
            sum_s += term_s
        cs[small] = sum_c
        sn[small] = sum_s * t[small]
    pos = ~small & (z > 0)
    if pos.any():
        a = np.sqrt(w[pos])
        cs[pos] = np.cosh(a * t[pos])
        sn[pos] = np.sinh(a * t[pos]) / a
    neg = ~small & (z < 0)
    if neg.any():
        om = np.sqrt(-w[neg])
        cs[neg] = np.cos(om * t[neg])
        sn[neg] = np.sin(om * t[neg]) / om
    return cs, sn


def khat0(config: ProblemConfig, t, r):
    """K̂0 = (λ1 e^{λ2 t} - λ2 e^{λ1 t}) / (λ1 - λ2)."""
    return _kernels(config, t, r)[0]


def khat1(config: ProblemConfig, t, r):
    """K̂1 = (e^{λ1 t} - e^{λ2 t}) / (λ1 - λ2)."""
    return _kernels(config, t, r)[1]


def dt_khat0(config: ProblemConfig, t, r):
    """∂_t K̂0 = -r^{2σ} K̂1."""
    return -stiffness(config, r) * _kernels(config, t, r)[1]


def dt_khat1(config: ProblemConfig, t, r):
    """∂_t K̂1 = (λ1 e^{λ1 t} - λ2 e^{λ2 t}) / (λ1 - λ2)."""
    return _kernels(config, t, r)[2]


def kernel_matrix(config: ProblemConfig, t, r):
    """The per-mode fundamental matrix [[K̂0, K̂1], [∂tK̂0, ∂tK̂1]].

    Returns a tuple of four arrays (e00, e01, e10, e11).
    """
    k0, k1, dk1 = _kernels(config, t, r)
    return k0, k1, -stiffness(config, r) * k1, dk1


def kernel(config: ProblemConfig, which: int, j: int, t, r):
    """∂_t^j K̂_which, for which, j in {0, 1}."""
    k0, k1, dk1 = _kernels(config, t, r)
    if which == 0:
        return k0 if j == 0 else -stiffness(config, r) * k1
    return k1 if j == 0 else dk1


class DegenerateSplitError(ValueError):
    """The split kernels are singular at a double root."""


def split_kernels(config: ProblemConfig, t, r):
    """(K̂0¹, K̂0², K̂1¹, K̂1²) in the real regime.

    K̂0¹ = -λ2 e^{λ1 t}/(λ1-λ2), K̂0² = λ1 e^{λ2 t}/(λ1-λ2),
    K̂1¹ = e^{λ1 t}/(λ1-λ2), K̂1² = -e^{λ2 t}/(λ1-λ2).
    """
    t = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=float)
    t, r = np.broadcast_arrays(t, r)
    roots = char_roots(config, r)
    if np.any(roots.regime != Regime.RealDistinct):
        raise DegenerateSplitError("split kernels need distinct real roots")
    lam1 = roots.lambda1.real
    lam2 = roots.lambda2.real
    gap = np.sqrt(roots.discriminant)
    with np.errstate(under="ignore"):
        e1 = np.exp(lam1 * t)
        e2 = np.exp(lam2 * t)
    return -lam2 * e1 / gap, lam1 * e2 / gap, e1 / gap, -e2 / gap


def split_kernel_piece(config: ProblemConfig, piece: str, j: int, t, r):
    """∂_t^j of one split kernel; ``piece`` in {"K0_1", "K0_2", "K1_1", "K1_2"}."""
    pieces = dict(zip(("K0_1", "K0_2", "K1_1", "K1_2"), split_kernels(config, t, r)))
    value = pieces[piece]
    if j == 0:
        return value
    roots = char_roots(config, r)
    lam = roots.lambda1.real if piece.endswith("_1") else roots.lambda2.real
    return lam * value


def ghat0(config: ProblemConfig, t, r):
    """e^{-r^{2(σ-σ1)} t}."""
    return np.exp(-_powr(r, 2 * config.diffusive_order) * np.asarray(t, dtype=float))


def ghat1(config: ProblemConfig, t, r):
    """r^{-2σ1} e^{-r^{2(σ-σ1)} t}; infinite at r = 0 when σ1 > 0."""
    with np.errstate(divide="ignore"):
        return _powr(r, -2 * config.sigma1) * ghat0(config, t, r)


def dt_ghat(config: ProblemConfig, which: int, t, r):
    g = ghat0(config, t, r) if which == 0 else ghat1(config, t, r)
    return -_powr(r, 2 * config.diffusive_order) * g


@dataclass(frozen=True)
class ZoneBoundaries:
    eps_star: float

    @property
    def low_edges(self):
        return 0.5 * self.eps_star, self.eps_star

    @property
    def high_edges(self):
        return 1.0 / self.eps_star, 2.0 / self.eps_star

    @property
    def breakpoints(self):
        return (*self.low_edges, *self.high_edges)


def _smoothstep(x):
    x = np.clip(x, 0.0, 1.0)
    return x * x * x * (10.0 + x * (-15.0 + 6.0 * x))


def cutoff(zone: str, r, boundaries: ZoneBoundaries):
    """Smooth cut-offs χ_L, χ_M, χ_H with quintic transitions."""
    r = np.asarray(r, dtype=float)
    e = boundaries.eps_star
    chi_l = 1.0 - _smoothstep((r - 0.5 * e) / (0.5 * e))
    chi_h = _smoothstep((r - 1.0 / e) / (1.0 / e))
    if zone == "L":
        return chi_l
    if zone == "H":
        return chi_h
    if zone == "M":
        return 1.0 - chi_l - chi_h
    raise ValueError(f"unknown zone {zone!r}")


class ZoneError(RuntimeError):
    pass


def discriminant_zeros(config: ProblemConfig, r_min=1e-12, r_max=1e12, samples=10_000):
    """Positive zeros of the discriminant, including touching (double) zeros."""
    grid = np.logspace(math.log10(r_min), math.log10(r_max), samples)
    b = damping(config, grid)
    rel = discriminant(config, grid) / (b * b)
    zeros = []

    def f(x):
        return float(discriminant(config, x) / damping(config, x) ** 2)

    sign = np.sign(rel)
    for i in np.nonzero(sign[:-1] * sign[1:] < 0)[0]:
        zeros.append(brentq(f, grid[i], grid[i + 1], xtol=1e-15, rtol=1e-14))
    # touching zeros: interior local minima of D/b² that come near zero
    inner = np.nonzero((rel[1:-1] <= rel[:-2]) & (rel[1:-1] <= rel[2:]) & (rel[1:-1] >= 0))[0] + 1
    for i in inner:
        if rel[i] < 1e-4:
            from scipy.optimize import minimize_scalar

            res = minimize_scalar(lambda u: f(math.exp(u)),
                                  bracket=(math.log(grid[i - 1]), math.log(grid[i]), math.log(grid[i + 1])),
                                  tol=1e-12)
            if res.fun < 1e-10:
                zeros.append(math.exp(res.x))
    return sorted(zeros)


def find_eps_star(config: ProblemConfig, safety=0.9, default=0.5, samples=10_000) -> ZoneBoundaries:
    """Radius ε* with positive discriminant on (0, ε*] and [1/ε*, ∞)."""
    zeros = discriminant_zeros(config, samples=samples)
    if zeros:
        eps = safety * min(zeros[0], 1.0 / zeros[-1], 1.0)
    else:
        eps = default
    low = np.logspace(math.log10(eps) - 12, math.log10(eps), samples)
    high = np.logspace(-math.log10(eps), -math.log10(eps) + 12, samples)
    for grid in (low, high):
        rel = discriminant(config, grid) / damping(config, grid) ** 2
        if not np.all(rel > 0):
            bad = grid[np.argmin(rel)]
            raise ZoneError(f"discriminant not positive at r={bad:.3e} with eps*={eps:.3e}")
    return ZoneBoundaries(eps)
