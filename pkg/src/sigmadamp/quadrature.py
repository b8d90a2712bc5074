"""Adaptive radial quadrature for Fourier-side norms.

Integrals ω_{n-1} ∫_0^∞ f(r) r^{n-1} dr are computed in the variable u = log r,
where power-law endpoints become exponential tails and the scale of the
integrand (which moves like t^{-1/(2(σ-σ1))}) is irrelevant. Panels are
Gauss-Kronrod 7/15 rules, evaluated for all active panels in one numpy call.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from . import symbol
from .config import ProblemConfig, m_zero

# Kronrod 15-point abscissae (positive half, descending) and weights, with the
# embedded 7-point Gauss weights on the odd-indexed abscissae.
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG = np.array([0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                0.381830050505118944950369775488975, 0.417959183673469387755102040816327])

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])  # 15 nodes ascending
KRONROD = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS = np.zeros(15)
GAUSS[1:7:2] = _WG[:3]
GAUSS[7] = _WG[3]
GAUSS[9:14:2] = _WG[:3][::-1]

RTOL = 1e-10
ATOL = 1e-10


class QuadratureError(RuntimeError):
    """Adaptive refinement ran out of panels."""


class IntegralDivergence(QuadratureError):
    """The integrand is not integrable at an endpoint."""


@dataclass
class QuadResult:
    value: float
    error: float
    panels: int


def sphere_area(n: int) -> float:
    """ω_{n-1} = 2 π^{n/2} / Γ(n/2), the area of the unit sphere in R^n."""
    return float(2.0 * math.exp(0.5 * n * math.log(math.pi) - gammaln(0.5 * n)))


def _gk(g, a, b):
    """Kronrod value and |K - G| for each panel [a_i, b_i]."""
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    x = mid[:, None] + half[:, None] * NODES[None, :]
    y = g(x.ravel()).reshape(x.shape)
    k = half * (y @ KRONROD)
    gs = half * (y @ GAUSS)
    return k, np.abs(k - gs)


def _log_integrand(f, n):
    def g(u):
        r = np.exp(u)
        with np.errstate(over="ignore", under="ignore", invalid="ignore"):
            val = np.asarray(f(r), dtype=float) * r ** n
        val = np.where(np.isnan(val) & (r == 0), 0.0, val)
        return val
    return g


def _tail_below(g, u, tol):
    """Push the lower limit down until ∫_{-∞}^{u} g is below tol; returns new u."""
    for _ in range(200):
        g0 = float(abs(g(np.array([u]))[0]))
        if g0 == 0.0:
            return u
        g1 = float(abs(g(np.array([u - 1.0]))[0]))
        if g1 > 0 and g1 < g0:
            kappa = math.log(g0 / g1)
            if g0 / kappa <= tol:
                return u
        elif g1 >= g0 and u < -700:
            break
        u -= 4.0
        if u < -745:
            break
    raise IntegralDivergence("integral infinite per hypothesis failure (no decay as r -> 0)")


def _tail_above(g, u, tol):
    for _ in range(200):
        g0 = float(abs(g(np.array([u]))[0]))
        if g0 == 0.0:
            return u
        g1 = float(abs(g(np.array([u + 1.0]))[0]))
        if g1 < g0:
            kappa = math.log(g0 / g1) if g1 > 0 else 50.0
            if g0 / kappa <= tol:
                return u
        u += 2.0
        if u > 700:
            break
    raise IntegralDivergence("integral infinite (no decay as r -> infinity)")


def integrate_radial(f, n: int, r_min=0.0, r_max=math.inf, breakpoints=(),
                     rtol=RTOL, atol=ATOL, max_panels=20_000) -> QuadResult:
    """ω_{n-1} ∫_{r_min}^{r_max} f(r) r^{n-1} dr with adaptive GK15 in log r.

    ``f`` must accept a 1-D array of radii. An infinite upper limit and a zero
    lower limit are handled by extending the u-range until the estimated
    exponential tail falls below the tolerance.
    """
    g = _log_integrand(f, n)
    omega = sphere_area(n)
    inner = [b for b in breakpoints if b > 0 and (r_min < b < r_max)]
    lo_r = r_min if r_min > 0 else (min(inner) if inner else 1.0) * 1e-12
    hi_r = r_max if math.isfinite(r_max) else (max(inner) if inner else 1.0) * 1e6
    u_lo, u_hi = math.log(lo_r), math.log(hi_r)
    # coarse pass to set the tail tolerance
    result = _adaptive(g, u_lo, u_hi, inner, rtol, atol / omega, max_panels)
    scale = abs(result.value)
    tail_tol = 0.1 * max(rtol * scale, atol / omega)
    changed = False
    if r_min <= 0:
        new = _tail_below(g, u_lo, tail_tol)
        changed |= new != u_lo
        u_lo = new
    if not math.isfinite(r_max):
        new = _tail_above(g, u_hi, tail_tol)
        changed |= new != u_hi
        u_hi = new
    if changed:
        result = _adaptive(g, u_lo, u_hi, inner, rtol, atol / omega, max_panels)
    return QuadResult(omega * result.value, omega * result.error, result.panels)


def _adaptive(g, u_lo, u_hi, inner_r, rtol, atol, max_panels) -> QuadResult:
    cuts = sorted({u_lo, u_hi, *(math.log(b) for b in inner_r)})
    edges = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        pieces = max(1, int(math.ceil(b - a)))
        edges.extend(np.linspace(a, b, pieces + 1)[:-1])
    edges.append(cuts[-1])
    edges = np.array(edges)
    a, b = edges[:-1], edges[1:]
    val, err = _gk(g, a, b)
    while True:
        total, total_err = float(val.sum()), float(err.sum())
        tol = max(rtol * abs(total), atol)
        if not np.isfinite(total):
            raise QuadratureError("non-finite integrand")
        if total_err <= tol:
            return QuadResult(total, total_err, a.size)
        if a.size >= max_panels:
            worst = int(np.argmax(err))
            raise QuadratureError(
                f"no convergence with {a.size} panels: error {total_err:.3e} > {tol:.3e}; "
                f"worst panel r in [{math.exp(a[worst]):.3e}, {math.exp(b[worst]):.3e}]")
        # worst-error-first, index tiebreak (stable sort)
        order = np.argsort(-err, kind="stable")
        share = tol / a.size
        count = int(np.count_nonzero(err > share))
        count = max(1, min(count, max_panels - a.size))
        split = np.zeros(a.size, dtype=bool)
        split[order[:count]] = True
        mid = 0.5 * (a[split] + b[split])
        na = np.concatenate([a[~split], a[split], mid])
        nb = np.concatenate([b[~split], mid, b[split]])
        v1, e1 = _gk(g, a[split], mid)
        v2, e2 = _gk(g, mid, b[split])
        nv = np.concatenate([val[~split], v1, v2])
        ne = np.concatenate([err[~split], e1, e2])
        idx = np.argsort(na, kind="stable")
        a, b, val, err = na[idx], nb[idx], nv[idx], ne[idx]


def config_breakpoints(config: ProblemConfig, boundaries: symbol.ZoneBoundaries | None = None):
    boundaries = boundaries or symbol.find_eps_star(config)
    pts = set(boundaries.breakpoints)
    pts.update(symbol.discriminant_zeros(config))
    return sorted(pts), boundaries


def _zone_limits(zone, boundaries):
    if zone is None:
        return 0.0, math.inf
    if zone == "L":
        return 0.0, boundaries.eps_star
    if zone == "H":
        return 1.0 / boundaries.eps_star, math.inf
    if zone == "M":
        return 0.5 * boundaries.eps_star, 2.0 / boundaries.eps_star
    raise ValueError(f"unknown zone {zone!r}")


def radial_norm_l2(config: ProblemConfig, multiplier, s=0.0, zone=None, boundaries=None,
                   rtol=RTOL, atol=ATOL) -> float:
    """(ω_{n-1} ∫ |r^s m(r) χ(r)|² r^{n-1} dr)^{1/2} for a radial multiplier m.

    This is the L² norm of the symbol itself; physical norms of u = F^{-1}(m)
    carry an extra (2π)^{-n/2}.
    """
    pts, boundaries = config_breakpoints(config, boundaries)
    r_min, r_max = _zone_limits(zone, boundaries)

    def f(r):
        v = np.abs(_powr(r, s) * multiplier(r))
        if zone is not None:
            v = v * symbol.cutoff(zone, r, boundaries)
        return v * v

    res = integrate_radial(f, config.dim_n, r_min, r_max, pts, rtol, atol)
    return math.sqrt(max(res.value, 0.0))


def _powr(r, a):
    if a == 0:
        return np.ones_like(r)
    return r ** a


def p_norm_integral(config: ProblemConfig, which: str, j: int, s: float, m: float, t: float,
                    boundaries=None, rtol=RTOL, atol=0.0) -> float:
    """∫ |∂_t^j K̂(t,ξ)|^{m0} |ξ|^{m0 s} χ_L(|ξ|) dξ with the exact kernel, m0 = 2m/(2-m)."""
    m0 = m_zero(m)
    idx = {"K0": 0, "K1": 1}[which]
    pts, boundaries = config_breakpoints(config, boundaries)

    def f(r):
        k = symbol.kernel(config, idx, j, t, r)
        return np.abs(k) ** m0 * _powr(r, m0 * s) * symbol.cutoff("L", r, boundaries)

    return integrate_radial(f, config.dim_n, 0.0, boundaries.eps_star, pts, rtol, atol).value


def profile_difference(config: ProblemConfig, piece: str, j: int, t, r):
    """∂_t^j(K̂_i^1 - Ĝ_i)(t, r) on the low zone, for piece "K0-vs-G0" or "K1-vs-G1"."""
    if piece == "K0-vs-G0":
        kern, prof = "K0_1", 0
    elif piece == "K1-vs-G1":
        kern, prof = "K1_1", 1
    else:
        raise ValueError(f"unknown piece {piece!r}")
    r = np.asarray(r, dtype=float)
    out = np.zeros(np.broadcast(np.asarray(t), r).shape)
    pos = r > 0
    if np.any(pos):
        rp = r[pos] if r.ndim else r
        a = symbol.split_kernel_piece(config, kern, j, t, rp)
        b = symbol.ghat0(config, t, rp) if prof == 0 else symbol.ghat1(config, t, rp)
        if j == 1:
            b = symbol.dt_ghat(config, prof, t, rp)
        if r.ndim:
            out[pos] = a - b
        else:
            out = a - b
    return out


def profile_diff_norm(config: ProblemConfig, piece: str, s: float, j: int, t: float,
                      boundaries=None, rtol=RTOL, atol=0.0) -> float:
    """‖|ξ|^s ∂_t^j (K̂_i^1 - Ĝ_i) χ_L‖_{L²(ξ)} computed with the exact split kernel."""
    pts, boundaries = config_breakpoints(config, boundaries)

    def f(r):
        v = _powr(r, s) * profile_difference(config, piece, j, t, r) * symbol.cutoff("L", r, boundaries)
        return v * v

    res = integrate_radial(f, config.dim_n, 0.0, boundaries.eps_star, pts, rtol, atol)
    return math.sqrt(max(res.value, 0.0))


@dataclass
class RateFit:
    slope: float
    intercept: float
    max_residual: float

    def __iter__(self):
        return iter((self.slope, self.intercept, self.max_residual))


def fit_rate(samples) -> RateFit:
    """Least-squares line through (log t, log value)."""
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 4:
        raise ValueError("fit_rate needs at least 4 samples")
    t, v = arr[:, 0], arr[:, 1]
    if np.any(v <= 0) or np.any(~np.isfinite(v)):
        raise ValueError("fit_rate needs positive finite values")
    if np.any(np.diff(t) <= 0) or t[0] <= 0:
        raise ValueError("fit_rate needs strictly increasing positive times")
    if math.log10(t[-1] / t[0]) < 2 - 1e-12:
        raise ValueError("fit_rate needs samples spanning at least two decades")
    x, y = np.log(t), np.log(v)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return RateFit(float(slope), float(intercept), float(np.max(np.abs(resid))))
