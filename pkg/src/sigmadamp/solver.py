"""Linear and semilinear evolution.

Two paths are provided. The radial path evaluates the exact Fourier solution of
the linear problem and integrates it with the radial quadrature, so any time can
be reached in one shot. The grid path is a periodic pseudo-spectral stepper for
u_tt + (-Δ)^σ u + μ1(-Δ)^{σ1} u_t + μ2(-Δ)^{σ2} u_t = |∂_t^j u|^p that applies the
exact per-mode propagator and a second-order Duhamel (trapezoid) correction.

Transform convention: û(ξ) = ∫ u(x) e^{-i x·ξ} dx, so û(0) is the mass of u.
On the grid û is approximated by dx^n · fftn(u).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.fft as sfft
from scipy.special import gammaln

from . import quadrature, symbol
from .config import ProblemConfig

# ---------------------------------------------------------------- radial data


@dataclass(frozen=True)
class GaussianTerm:
    """a · exp(-|x|²/(2 w²)) in R^n; its transform is a (2π)^{n/2} w^n exp(-w² r²/2)."""

    amplitude: float
    width: float
    dim_n: int

    @property
    def mass(self) -> float:
        return self.amplitude * (2 * math.pi) ** (self.dim_n / 2) * self.width ** self.dim_n

    def hat(self, r):
        r = np.asarray(r, dtype=float)
        return self.mass * np.exp(-0.5 * (self.width * r) ** 2)

    def physical(self, x2):
        """Value at squared distance x2."""
        return self.amplitude * np.exp(-0.5 * x2 / self.width ** 2)


@dataclass(frozen=True)
class RadialData:
    """Radial initial data as sums of Gaussians: u0 = Σ u0_terms, u1 = Σ u1_terms."""

    u0_terms: tuple = ()
    u1_terms: tuple = ()

    @property
    def P0(self) -> float:
        return float(sum(g.mass for g in self.u0_terms))

    @property
    def P1(self) -> float:
        return float(sum(g.mass for g in self.u1_terms))

    def u0_hat(self, r):
        return _sum_hat(self.u0_terms, r)

    def u1_hat(self, r):
        return _sum_hat(self.u1_terms, r)

    def scaled(self, factor: float) -> "RadialData":
        def sc(terms):
            return tuple(GaussianTerm(factor * g.amplitude, g.width, g.dim_n) for g in terms)
        return RadialData(sc(self.u0_terms), sc(self.u1_terms))

    def __add__(self, other: "RadialData") -> "RadialData":
        return RadialData(self.u0_terms + other.u0_terms, self.u1_terms + other.u1_terms)


def _sum_hat(terms, r):
    r = np.asarray(r, dtype=float)
    out = np.zeros(r.shape)
    for g in terms:
        out = out + g.hat(r)
    return out


def gaussian_data(amplitude: float, width: float, dim_n: int, slot: str = "u1") -> RadialData:
    """Gaussian a·e^{-|x|²/(2w²)} placed in the u0 or u1 slot (the other slot is zero)."""
    if width <= 0:
        raise ValueError("width must be positive")
    term = (GaussianTerm(float(amplitude), float(width), int(dim_n)),)
    if slot == "u0":
        return RadialData(u0_terms=term)
    if slot == "u1":
        return RadialData(u1_terms=term)
    raise ValueError("slot must be 'u0' or 'u1'")


def gaussian_sobolev_norm(term: GaussianTerm, s: float) -> float:
    """Closed form of ‖|D|^s g‖_{L²} for a Gaussian g."""
    n, w = term.dim_n, term.width
    # (2π)^{-n} ω_{n-1} M² ∫ r^{2s+n-1} e^{-w² r²} dr
    log_int = gammaln(s + n / 2) - math.log(2.0) - (2 * s + n) * math.log(w)
    val = (2 * math.pi) ** (-n) * quadrature.sphere_area(n) * term.mass ** 2 * math.exp(log_int)
    return math.sqrt(val)


def _radial_solution(config, data, t, s, j, r):
    k00 = symbol.kernel(config, 0, j, t, r)
    k11 = symbol.kernel(config, 1, j, t, r)
    val = k00 * data.u0_hat(r) + k11 * data.u1_hat(r)
    if s:
        val = val * r ** s
    return val


def linear_norm_radial(config: ProblemConfig, data: RadialData, t: float, s: float = 0.0,
                       j: int = 0, rtol=quadrature.RTOL, atol=0.0) -> float:
    """‖|D|^s ∂_t^j u(t)‖_{L²(R^n)} from the exact Fourier solution (no time stepping)."""
    pts, _ = quadrature.config_breakpoints(config)

    def f(r):
        v = _radial_solution(config, data, t, s, j, r)
        return v * v

    res = quadrature.integrate_radial(f, config.dim_n, 0.0, math.inf, pts, rtol, atol)
    return math.sqrt(max(res.value, 0.0)) / (2 * math.pi) ** (config.dim_n / 2)


def profile_multiplier(config: ProblemConfig, P0: float, P1: float, t, s, j, r):
    """r^s ∂_t^j (P0 Ĝ0 + P1 Ĝ1)."""
    r = np.asarray(r, dtype=float)
    if j == 0:
        g0, g1 = symbol.ghat0(config, t, r), symbol.ghat1(config, t, r)
    else:
        g0, g1 = symbol.dt_ghat(config, 0, t, r), symbol.dt_ghat(config, 1, t, r)
    val = P0 * g0 + (P1 * g1 if P1 != 0 else 0.0)
    if s:
        val = val * r ** s
    return val


def profile_gap_norm_radial(config: ProblemConfig, data: RadialData, t: float, s: float = 0.0,
                            j: int = 0, correction: float = 0.0, rtol=quadrature.RTOL,
                            atol=0.0) -> float:
    """‖|D|^s ∂_t^j (u - P0 G0 - (P1 + correction) G1)(t)‖_{L²}."""
    pts, _ = quadrature.config_breakpoints(config)
    P0, P1 = data.P0, data.P1 + correction

    def f(r):
        v = _radial_solution(config, data, t, s, j, r) - profile_multiplier(config, P0, P1, t, s, j, r)
        return v * v

    res = quadrature.integrate_radial(f, config.dim_n, 0.0, math.inf, pts, rtol, atol)
    return math.sqrt(max(res.value, 0.0)) / (2 * math.pi) ** (config.dim_n / 2)


# ---------------------------------------------------------------- grid


def effective_zero_radius(dim_n: int, dk: float) -> float:
    """Mean |ξ| over the ball with the volume of one Fourier cell."""
    log_vol = 0.5 * dim_n * math.log(math.pi) - gammaln(0.5 * dim_n + 1)
    rho = dk / math.exp(log_vol / dim_n)
    return dim_n / (dim_n + 1) * rho


@dataclass(frozen=True)
class GridSpec:
    """Periodic box [-L/2, L/2)^n with N points per dimension.

    ``zero_mode`` selects the radius at which symbols are evaluated for ξ = 0:
    "cell" uses the mean radius of the central Fourier cell, "exact" uses 0.
    """

    dim_n: int
    points_per_dim: int
    box_length: float
    zero_mode: str = "cell"

    def __post_init__(self):
        n = self.points_per_dim
        if self.dim_n not in (1, 2, 3):
            raise ValueError("dim_n must be 1, 2 or 3")
        if n < 2 or n & (n - 1):
            raise ValueError("points_per_dim must be a power of two")
        if self.box_length <= 0:
            raise ValueError("box_length must be positive")
        if self.zero_mode not in ("cell", "exact"):
            raise ValueError("zero_mode must be 'cell' or 'exact'")

    @property
    def shape(self):
        return (self.points_per_dim,) * self.dim_n

    @property
    def dx(self) -> float:
        return self.box_length / self.points_per_dim

    @property
    def dk(self) -> float:
        return 2 * math.pi / self.box_length

    @property
    def nyquist(self) -> float:
        return math.pi * self.points_per_dim / self.box_length

    def axes(self):
        x = self.box_length * np.fft.fftfreq(self.points_per_dim)
        k = self.dk * np.fft.fftfreq(self.points_per_dim, 1.0 / self.points_per_dim)
        return x, k

    def squared_distance(self):
        x, _ = self.axes()
        return _radial_square(x, self.dim_n)

    def radius(self):
        """|ξ| on the grid, with the ξ = 0 convention applied."""
        return _grid_radius(self)

    def true_radius(self):
        _, k = self.axes()
        return np.sqrt(_radial_square(k, self.dim_n))

    def dealias_mask(self):
        return self.true_radius() <= (2.0 / 3.0) * self.nyquist

    def check_resolution(self, config: ProblemConfig):
        eps = symbol.find_eps_star(config).eps_star
        if self.nyquist <= 2.0 / eps:
            warnings.warn(f"Nyquist radius {self.nyquist:.3g} does not reach the high zone 2/eps* = "
                          f"{2 / eps:.3g}", RuntimeWarning, stacklevel=2)

    def to_dict(self):
        return {"dim_n": self.dim_n, "points_per_dim": self.points_per_dim,
                "box_length": self.box_length, "zero_mode": self.zero_mode}


def _radial_square(v, n):
    grids = np.meshgrid(*([v] * n), indexing="ij")
    return sum(g * g for g in grids)


@lru_cache(maxsize=16)
def _grid_radius(grid: GridSpec):
    r = grid.true_radius()
    if grid.zero_mode == "cell":
        r = r.copy()
        r[(0,) * grid.dim_n] = effective_zero_radius(grid.dim_n, grid.dk)
    r.setflags(write=False)
    return r


@dataclass
class SpectralField:
    coefficients: np.ndarray
    grid: GridSpec
    time: float = 0.0

    @classmethod
    def from_physical(cls, values, grid: GridSpec, time: float = 0.0):
        return cls(grid.dx ** grid.dim_n * sfft.fftn(values), grid, time)

    def to_physical(self):
        return sfft.ifftn(self.coefficients).real / self.grid.dx ** self.grid.dim_n

    def symmetry_defect(self) -> float:
        """Relative size of the imaginary part of the physical field."""
        z = sfft.ifftn(self.coefficients)
        scale = np.max(np.abs(z))
        return float(np.max(np.abs(z.imag)) / scale) if scale > 0 else 0.0


@dataclass
class StatePair:
    u: SpectralField
    ut: SpectralField

    def __post_init__(self):
        if self.u.grid != self.ut.grid:
            raise ValueError("u and u_t live on different grids")
        if self.u.time != self.ut.time:
            raise ValueError("u and u_t carry different times")

    @property
    def time(self):
        return self.u.time

    @property
    def grid(self):
        return self.u.grid


def initial_state(grid: GridSpec, data: RadialData) -> StatePair:
    """Sample the data transforms on the lattice (exact r = 0 at the zero mode)."""
    r = grid.true_radius()
    u = SpectralField(data.u0_hat(r).astype(complex), grid, 0.0)
    ut = SpectralField(data.u1_hat(r).astype(complex), grid, 0.0)
    return StatePair(u, ut)


@dataclass(frozen=True)
class Propagator:
    """Per-mode 2x2 matrix E(dt) = [[K̂0, K̂1], [∂tK̂0, ∂tK̂1]](dt, |ξ|)."""

    e00: np.ndarray
    e01: np.ndarray
    e10: np.ndarray
    e11: np.ndarray
    dt: float

    def apply(self, u, ut):
        return self.e00 * u + self.e01 * ut, self.e10 * u + self.e11 * ut

    def compose(self, other: "Propagator") -> "Propagator":
        return Propagator(self.e00 * other.e00 + self.e01 * other.e10,
                          self.e00 * other.e01 + self.e01 * other.e11,
                          self.e10 * other.e00 + self.e11 * other.e10,
                          self.e10 * other.e01 + self.e11 * other.e11,
                          self.dt + other.dt)


def propagator_at(config: ProblemConfig, dt: float, r) -> Propagator:
    e00, e01, e10, e11 = symbol.kernel_matrix(config, dt, r)
    return Propagator(e00, e01, e10, e11, float(dt))


@lru_cache(maxsize=8)
def assemble_propagator(config: ProblemConfig, grid: GridSpec, dt: float) -> Propagator:
    """E(dt) on every grid mode (cached per config, grid and dt)."""
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    return propagator_at(config, dt, grid.radius())


class BlowUp(RuntimeError):
    """Non-finite or runaway values in the semilinear evolution."""

    def __init__(self, time, message):
        super().__init__(f"blow-up at t={time:.6g}: {message}")
        self.time = time


def nonlinearity(config: ProblemConfig, state: StatePair, j: int | None = None,
                 return_mass: bool = False):
    """Dealiased transform of |∂_t^j u|^p; optionally also ∫|∂_t^j u|^p dx."""
    j = config.deriv_j if j is None else j
    p = config.nonlinearity_p
    if p is None:
        raise ValueError("nonlinearity_p required")
    grid = state.grid
    field_ = state.u if j == 0 else state.ut
    phys = field_.to_physical()
    with np.errstate(over="raise", invalid="raise"):
        try:
            power = np.abs(phys) ** p
        except FloatingPointError as exc:
            raise BlowUp(state.time, "overflow in the nonlinearity") from exc
    coeffs = grid.dx ** grid.dim_n * sfft.fftn(power)
    mass = float(coeffs[(0,) * grid.dim_n].real)
    coeffs = coeffs * grid.dealias_mask()
    out = SpectralField(coeffs, grid, state.time)
    return (out, mass) if return_mass else out


def semilinear_step(config: ProblemConfig, state: StatePair, dt: float, coefficient: float = 1.0,
                    propagator: Propagator | None = None, blowup_threshold: float = 1e8):
    """One exponential-Duhamel step (predictor + trapezoid corrector).

    Returns (new_state, mass_at_start) where mass_at_start = ∫|∂_t^j u|^p dx at
    the start of the step.
    """
    prop = propagator or assemble_propagator(config, state.grid, dt)
    grid = state.grid
    u, ut = state.u.coefficients, state.ut.coefficients
    lin_u, lin_ut = prop.apply(u, ut)
    if coefficient == 0:
        new = StatePair(SpectralField(lin_u, grid, state.time + dt),
                        SpectralField(lin_ut, grid, state.time + dt))
        return new, 0.0
    force, mass = nonlinearity(config, state, return_mass=True)
    f_now = coefficient * force.coefficients
    # E(dt)·[0; f] = [e01 f; e11 f]
    pu, put = prop.e01 * f_now, prop.e11 * f_now
    pred = StatePair(SpectralField(lin_u + dt * pu, grid, state.time + dt),
                     SpectralField(lin_ut + dt * put, grid, state.time + dt))
    f_pred = coefficient * nonlinearity(config, pred).coefficients
    new_u = lin_u + 0.5 * dt * pu
    new_ut = lin_ut + 0.5 * dt * (put + f_pred)
    if not (np.all(np.isfinite(new_u)) and np.all(np.isfinite(new_ut))):
        raise BlowUp(state.time + dt, "non-finite state")
    peak = float(np.max(np.abs(new_u))) / grid.dx ** grid.dim_n
    if peak > blowup_threshold * grid.points_per_dim ** grid.dim_n:
        raise BlowUp(state.time + dt, f"coefficient size {peak:.3e} above threshold")
    return StatePair(SpectralField(new_u, grid, state.time + dt),
                     SpectralField(new_ut, grid, state.time + dt)), mass


def sobolev_norm(state, s: float = 0.0, j: int = 0) -> float:
    """‖|D|^s f‖_{L²} by discrete Parseval, f = u (j=0) or u_t (j=1).

    Accepts a StatePair or a single SpectralField (then ``j`` is ignored).
    """
    field_ = state if isinstance(state, SpectralField) else (state.u if j == 0 else state.ut)
    grid = field_.grid
    weight = np.abs(field_.coefficients) ** 2
    if s:
        weight = weight * grid.radius() ** (2 * s)
    total = float(weight.sum()) * (grid.dk / (2 * math.pi)) ** grid.dim_n
    return math.sqrt(total)


def physical_l2(state, j: int = 0) -> float:
    field_ = state if isinstance(state, SpectralField) else (state.u if j == 0 else state.ut)
    phys = field_.to_physical()
    return math.sqrt(float(np.sum(phys * phys)) * field_.grid.dx ** field_.grid.dim_n)


def grid_profile_field(config: ProblemConfig, grid: GridSpec, P0: float, P1: float, t: float,
                       j: int = 0) -> SpectralField:
    """P0 Ĝ0 + P1 Ĝ1 sampled on the lattice (zero-mode convention of the grid)."""
    return SpectralField(profile_multiplier(config, P0, P1, t, 0.0, j, grid.radius()).astype(complex),
                         grid, t)


def grid_profile_gap(config: ProblemConfig, state: StatePair, P0: float, P1: float,
                     s: float = 0.0, j: int = 0) -> float:
    prof = grid_profile_field(config, state.grid, P0, P1, state.time, j)
    field_ = state.u if j == 0 else state.ut
    diff = SpectralField(field_.coefficients - prof.coefficients, state.grid, state.time)
    return sobolev_norm(diff, s)


# ---------------------------------------------------------------- runs


@dataclass
class NonlinearMass:
    value: float
    truncation_time: float
    tail_estimate: float
    decay_exponent: float = float("nan")

    @property
    def tail_fraction(self) -> float:
        return self.tail_estimate / self.value if self.value > 0 else 0.0


class MassDivergence(ValueError):
    pass


def nonlinear_mass(times, integrand, fit_window: float = 10.0) -> NonlinearMass:
    """Space-time mass ∫_0^T g(τ) dτ by the trapezoid rule plus a power-law tail.

    The tail T·g(T)/(β-1) assumes g ~ τ^{-β} with β fitted over the last
    ``fit_window`` factor in time; β <= 1 raises MassDivergence.
    """
    times = np.asarray(times, dtype=float)
    g = np.asarray(integrand, dtype=float)
    if times.size < 2:
        raise ValueError("need at least two samples")
    value = float(np.trapezoid(g, times)) if hasattr(np, "trapezoid") else float(np.trapz(g, times))
    T = float(times[-1])
    if value == 0.0 and not np.any(g):
        return NonlinearMass(0.0, T, 0.0, float("nan"))
    sel = (times >= T / fit_window) & (g > 0)
    if np.count_nonzero(sel) < 4:
        raise ValueError("too few positive samples in the tail window")
    beta = -float(np.polyfit(np.log(times[sel]), np.log(g[sel]), 1)[0])
    if beta <= 1:
        raise MassDivergence("mass integral not convergent at this horizon "
                             f"(fitted decay exponent {beta:.3f} <= 1)")
    tail = T * float(g[-1]) / (beta - 1)
    return NonlinearMass(value, T, tail, beta)


@dataclass
class Trajectory:
    """Sampled output of a grid run."""

    times: list = field(default_factory=list)
    norms: dict = field(default_factory=dict)
    mass_times: list = field(default_factory=list)
    mass_integrand: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    final_state: StatePair | None = None
    blowup: BlowUp | None = None


def default_norms(config: ProblemConfig):
    """Norms recorded along a grid run: (label, s, j)."""
    if config.deriv_j == 0:
        return [("u", 0.0, 0), ("D^{2σ2} u", 2 * config.sigma2, 0), ("u_t", 0.0, 1)]
    return [("u", 0.0, 0), ("u_t", 0.0, 1)]


def evolve(config: ProblemConfig, grid: GridSpec, data: RadialData, dt: float, horizon: float,
           sample_times=(), coefficient: float = 1.0, norms=None, keep_snapshots=False,
           profile_masses=None, raise_on_blowup=False) -> Trajectory:
    """March from 0 to ``horizon`` with uniform dt, recording norms at ``sample_times``.

    ``profile_masses``, if given as {label: (P0, P1)}, also records the gap
    ‖u - P0 G0 - P1 G1‖ at the sample times.
    """
    steps = int(round(horizon / dt))
    if abs(steps * dt - horizon) > 1e-9 * max(1.0, horizon):
        raise ValueError("horizon must be an integer multiple of dt")
    state = initial_state(grid, data)
    prop = assemble_propagator(config, grid, dt)
    norms = default_norms(config) if norms is None else norms
    sample_steps = sorted({int(round(t / dt)) for t in sample_times if 0 <= t <= horizon + 1e-12})
    traj = Trajectory(norms={label: [] for label, _, _ in norms})
    for label in (profile_masses or {}):
        traj.norms[f"gap[{label}]"] = []

    def record(st):
        traj.times.append(st.time)
        for label, s, j in norms:
            traj.norms[label].append(sobolev_norm(st, s, j))
        for label, (p0, p1) in (profile_masses or {}).items():
            traj.norms[f"gap[{label}]"].append(grid_profile_gap(config, st, p0, p1))
        if keep_snapshots:
            traj.snapshots.append(st)

    nxt = 0
    use_p = config.nonlinearity_p is not None and coefficient != 0
    for step in range(steps + 1):
        if nxt < len(sample_steps) and sample_steps[nxt] == step:
            record(state)
            nxt += 1
        if step == steps:
            if use_p:
                traj.mass_times.append(state.time)
                traj.mass_integrand.append(nonlinearity(config, state, return_mass=True)[1])
            break
        try:
            new, mass = semilinear_step(config, state, dt, coefficient if use_p else 0.0, prop)
        except BlowUp as exc:
            traj.blowup = exc
            traj.final_state = state
            if raise_on_blowup:
                raise
            return traj
        if use_p:
            traj.mass_times.append(state.time)
            traj.mass_integrand.append(mass)
        state = new
    traj.final_state = state
    return traj
