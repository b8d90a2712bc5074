"""Experiments that confront measured decay with the rate formulas.

Each ``run_*`` function returns a report object carrying the prediction it was
compared against, the samples, the fit and a verdict string.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from . import quadrature, rates, solver, symbol
from .config import EstimateKind, ProblemConfig, RateQuery, check_global_existence_hypotheses

PASS, FAIL, FASTER = "pass", "fail", "faster-than-predicted"

LINEAR_WINDOW = (1e2, 1e5)
SEMILINEAR_WINDOW = (10.0, 1e3)
LINEAR_TOL = 0.05
SEMILINEAR_TOL = 0.1


def log_times(t_min, t_max, per_decade=4):
    count = int(round(per_decade * math.log10(t_max / t_min))) + 1
    return np.logspace(math.log10(t_min), math.log10(t_max), max(count, 4))


@dataclass
class DecayReport:
    query: str
    predicted: rates.RatePrediction
    fitted_slope: float
    tolerance: float
    samples: list
    verdict: str
    max_residual: float = 0.0
    one_sided: bool = True

    @property
    def ok(self) -> bool:
        return self.verdict == PASS or (self.one_sided and self.verdict == FASTER)

    def predicted_curve(self):
        """Predicted law anchored at the first sample."""
        t0, v0 = self.samples[0]
        e = self.predicted.exponent
        return [v0 * (t / t0) ** e for t, _ in self.samples]

    def to_dict(self):
        return {"query": self.query, "predicted": self.predicted.to_dict(),
                "fitted_slope": self.fitted_slope, "tolerance": self.tolerance,
                "max_residual": self.max_residual, "verdict": self.verdict,
                "one_sided": self.one_sided,
                "samples": [[float(t), float(v)] for t, v in self.samples]}


def judge(fitted, predicted, tol, one_sided=True):
    if abs(fitted - predicted) <= tol:
        return PASS
    if one_sided and fitted < predicted - tol:
        return FASTER
    return FAIL


def decay_report(query, prediction, samples, tol, one_sided=True) -> DecayReport:
    fit = quadrature.fit_rate(samples)
    return DecayReport(query, prediction, fit.slope, tol, [tuple(map(float, s)) for s in samples],
                       judge(fit.slope, prediction.exponent, tol, one_sided), fit.max_residual,
                       one_sided)


@dataclass
class ProfileReport:
    query: str
    rate: rates.RatePrediction
    times: list
    gap_norms: list
    ratios: list
    band: tuple
    verdict: str
    band_verdict: str
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.verdict == PASS and self.band_verdict == PASS

    def to_dict(self):
        return {"query": self.query, "rate": self.rate.to_dict(),
                "times": [float(t) for t in self.times],
                "gap_norms": [float(g) for g in self.gap_norms],
                "ratios": [float(r) for r in self.ratios], "band": [float(b) for b in self.band],
                "verdict": self.verdict, "band_verdict": self.band_verdict, "details": self.details}


# ------------------------------------------------------------------ linear, radial path


def run_linear_decay(config: ProblemConfig, query: RateQuery, data: solver.RadialData,
                     times=None, tol=LINEAR_TOL) -> DecayReport:
    """Fit the slope of ‖|D|^s ∂_t^j u(t)‖ over ``times`` against the linear rate."""
    times = log_times(*LINEAR_WINDOW) if times is None else np.asarray(times, dtype=float)
    prediction = rates.linear_decay_exponent(config, query)
    samples = [(t, solver.linear_norm_radial(config, data, t, query.s, query.j)) for t in times]
    label = f"linear decay m={query.m:g} s={query.s:g} j={query.j} ({query.estimate_kind.value})"
    return decay_report(label, prediction, samples, tol)


def run_log_case(config: ProblemConfig, data: solver.RadialData, times=None,
                 tol=LINEAR_TOL) -> DecayReport:
    """Slope of ‖u(t)‖ / log(e+t); the critical case predicts a bounded ratio (slope 0)."""
    times = log_times(1e3, 1e6) if times is None else np.asarray(times, dtype=float)
    samples = []
    for t in times:
        value = solver.linear_norm_radial(config, data, t)
        samples.append((t, value / math.log(math.e + t)))
    try:
        pred = rates.linear_decay_exponent(config, RateQuery(1.0, 0.0, 0))
    except rates.RateError as exc:
        pred = rates.RatePrediction(0.0, True, str(exc), [])
    target = rates.RatePrediction(0.0, True, "‖u‖/log(e+t) bounded", pred.validity, None)
    if not all(v > 0 for _, v in samples):
        return DecayReport("log case", target, 0.0, tol, samples, PASS, 0.0, False)
    return decay_report("‖u‖/log(e+t)", target, samples, tol, one_sided=False)


def run_profile(config: ProblemConfig, data: solver.RadialData, s=0.0, j=0, times=None,
                band_window=None, correction=0.0) -> ProfileReport:
    """Gap ratio R(t) = ‖∂_t^j |D|^s(u - P0 G0 - P1 G1)‖ / t^{rate} and the sandwich band."""
    times = log_times(*LINEAR_WINDOW) if times is None else np.asarray(times, dtype=float)
    rate = rates.profile_rate(config, s, j)
    gaps, ratios, sizes = [], [], []
    for t in times:
        gap = solver.profile_gap_norm_radial(config, data, t, s, j, correction)
        gaps.append(gap)
        ratios.append(gap / t ** rate.exponent)
    band_window = band_window or (times[-1] / 10, times[-1])
    band_times = [t for t in times if band_window[0] - 1e-9 <= t <= band_window[1] + 1e-9]
    for t in band_times:
        sizes.append(solver.linear_norm_radial(config, data, t, s, j) / t ** rate.exponent)
    verdict = profile_verdict(ratios)
    band = (min(sizes), max(sizes)) if sizes else (float("nan"), float("nan"))
    band_ok = sizes and band[0] > 0 and np.isfinite(band[1])
    return ProfileReport(f"profile s={s:g} j={j}", rate, list(map(float, times)), gaps, ratios,
                         band, verdict, PASS if band_ok else FAIL,
                         {"P0": data.P0, "P1": data.P1, "correction": correction})


def profile_verdict(ratios):
    r = list(ratios)
    if len(r) < 3 or not all(np.isfinite(r)) or min(r) < 0:
        return FAIL
    tail_decreasing = r[-3] > r[-2] > r[-1]
    return PASS if tail_decreasing and r[-1] < 0.5 * r[0] else FAIL


def run_kernel_sharpness(config: ProblemConfig, which="K1", j=0, s=0.0, m=1.0,
                         base_times=(1e3, 1e4), rel_tol=0.02):
    """Doubling ratios P(2T)/P(T) of the exact low-zone kernel integral vs 2^{predicted}."""
    m0 = 2 * m / (2 - m)
    sig, sig1, n = config.sigma, config.sigma1, config.dim_n
    if which == "K1":
        exponent = -n / (2 * (sig - sig1)) - m0 * (s - 2 * sig1) / (2 * (sig - sig1)) - m0 * j
    else:
        exponent = -n / (2 * (sig - sig1)) - m0 * s / (2 * (sig - sig1)) - m0 * j
    predicted = 2.0 ** exponent
    rows = []
    for T in base_times:
        a = quadrature.p_norm_integral(config, which, j, s, m, T)
        b = quadrature.p_norm_integral(config, which, j, s, m, 2 * T)
        ratio = b / a
        rel = ratio / predicted - 1
        if abs(rel) <= rel_tol:
            verdict = PASS
        elif ratio < predicted:
            verdict = FASTER
        else:
            verdict = FAIL
        rows.append({"T": T, "P(T)": a, "P(2T)": b, "ratio": ratio, "predicted": predicted,
                     "relative_deviation": rel, "verdict": verdict})
    return {"which": which, "j": j, "s": s, "m": m, "m0": m0, "exponent": exponent,
            "rows": rows, "verdict": PASS if all(r["verdict"] == PASS for r in rows) else
            (FASTER if all(r["verdict"] in (PASS, FASTER) for r in rows) else FAIL)}


def run_profile_gap_rate(config: ProblemConfig, s=0.0, j=0, times=None, tol=LINEAR_TOL,
                         piece="K1-vs-G1") -> DecayReport:
    """Slope of the low-zone kernel-vs-profile gap against the predicted gap rate."""
    times = log_times(1e2, 1e5) if times is None else np.asarray(times, dtype=float)
    which = "K1-piece" if piece == "K1-vs-G1" else "K0-piece"
    pred = rates.profile_gap_rate(config, 1.0, s, j, which)
    samples = [(t, quadrature.profile_diff_norm(config, piece, s, j, t)) for t in times]
    return decay_report(f"{piece} gap s={s:g} j={j}", pred, samples, tol)


# ------------------------------------------------------------------ per-mode oracle


def ode_reference(config: ProblemConfig, r: float, t: float, u0: float, u1: float):
    """(û, û_t)(t) for one mode from an adaptive 8th-order Runge-Kutta integration."""
    b = float(symbol.damping(config, r))
    c = float(symbol.stiffness(config, r))
    if t == 0:
        return u0, u1

    def rhs(_, y):
        return [y[1], -b * y[1] - c * y[0]]

    scale = max(abs(u0), abs(u1), 1.0)
    sol = solve_ivp(rhs, (0.0, t), [u0, u1], method="DOP853", rtol=1e-13,
                    atol=1e-24 * scale)
    return float(sol.y[0, -1]), float(sol.y[1, -1])


def sample_oracle_cases(count, seed=0):
    """Random (config, r, t, regime) draws covering all three root regimes evenly."""
    rng = np.random.default_rng(seed)
    cases = []
    want = [symbol.Regime.RealDistinct, symbol.Regime.ComplexPair, symbol.Regime.NearDegenerate]
    k = 0
    while len(cases) < count:
        target = want[k % 3]
        sig = rng.uniform(1.0, 2.0)
        cfg = ProblemConfig(sig, rng.uniform(0.0, 0.45 * sig), rng.uniform(0.55 * sig, sig),
                            rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0), dim_n=1)
        t = float(10 ** rng.uniform(-1, 1))
        r = None
        if target == symbol.Regime.RealDistinct:
            try:
                eps = symbol.find_eps_star(cfg).eps_star
            except symbol.ZoneError:
                continue
            r = float(10 ** rng.uniform(-2, -0.5)) * eps
        else:
            zeros = symbol.discriminant_zeros(cfg)
            if not zeros:
                continue
            z = zeros[int(rng.integers(len(zeros)))]
            if target == symbol.Regime.NearDegenerate:
                r = z * (1 + rng.uniform(-1e-8, 1e-8))
            else:
                grid = np.linspace(zeros[0], zeros[-1], 400)[1:-1]
                d = symbol.discriminant(cfg, grid)
                neg = grid[d < -1e-3 * symbol.damping(cfg, grid) ** 2]
                if neg.size == 0:
                    continue
                r = float(neg[int(rng.integers(neg.size))])
        if symbol.regime_of(cfg, np.array([r]))[0] != target:
            continue
        # keep the total decay moderate so the oracle's relative accuracy is meaningful
        if float(symbol.damping(cfg, r)) * t > 40:
            continue
        cases.append((cfg, r, t, target))
        k += 1
    return cases


def run_oracle_equivalence(count=300, seed=0, tol=1e-8):
    rng = np.random.default_rng(seed + 1)
    rows = []
    for cfg, r, t, regime in sample_oracle_cases(count, seed):
        u0, u1 = rng.normal(size=2)
        k00, k01, k10, k11 = symbol.kernel_matrix(cfg, t, np.array([r]))
        u = float(k00[0] * u0 + k01[0] * u1)
        ut = float(k10[0] * u0 + k11[0] * u1)
        ru, rut = ode_reference(cfg, r, t, u0, u1)
        scale = max(abs(ru), abs(rut), 1e-300)
        err = max(abs(u - ru), abs(ut - rut)) / scale
        rows.append({"regime": symbol.Regime(regime).name, "r": r, "t": t, "rel_error": err})
    worst = max(row["rel_error"] for row in rows)
    return {"count": len(rows), "max_rel_error": worst, "tolerance": tol,
            "regimes": sorted({row["regime"] for row in rows}),
            "verdict": PASS if worst <= tol else FAIL, "rows": rows}


def run_identity_checks(count=10_000, seed=0, vieta_tol=1e-12, semigroup_tol=1e-10):
    rng = np.random.default_rng(seed)
    worst_sum = worst_prod = worst_semi = 0.0
    for _ in range(count // 100):
        sig = rng.uniform(1.0, 2.0)
        cfg = ProblemConfig(sig, rng.uniform(0.0, 0.45 * sig), rng.uniform(0.55 * sig, sig),
                            rng.uniform(0.1, 3.0), rng.uniform(0.1, 3.0), dim_n=1)
        r = 10 ** rng.uniform(-3, 2, size=100)
        roots = symbol.char_roots(cfg, r)
        b = symbol.damping(cfg, r)
        c = symbol.stiffness(cfg, r)
        worst_sum = max(worst_sum, float(np.max(np.abs(roots.lambda1 + roots.lambda2 + b) / b)))
        worst_prod = max(worst_prod, float(np.max(np.abs(roots.lambda1 * roots.lambda2 - c) / c)))
        a, bb = rng.uniform(0, 2, size=2)
        rr = 10 ** rng.uniform(-2, 1, size=100)
        ea = solver.propagator_at(cfg, a, rr)
        eb = solver.propagator_at(cfg, bb, rr)
        eab = solver.propagator_at(cfg, a + bb, rr)
        prod = ea.compose(eb)
        for x, y in ((prod.e00, eab.e00), (prod.e01, eab.e01), (prod.e10, eab.e10), (prod.e11, eab.e11)):
            scale = np.maximum.reduce([np.abs(eab.e00), np.abs(eab.e01), np.abs(eab.e10),
                                       np.abs(eab.e11), np.full(rr.shape, 1e-300)])
            worst_semi = max(worst_semi, float(np.max(np.abs(x - y) / scale)))
    ok = worst_sum <= vieta_tol and worst_prod <= vieta_tol and worst_semi <= semigroup_tol
    return {"draws": count, "vieta_sum": worst_sum, "vieta_product": worst_prod,
            "semigroup": worst_semi, "verdict": PASS if ok else FAIL}


# ------------------------------------------------------------------ grid path


def initial_weighted_norm(config: ProblemConfig, data: solver.RadialData) -> float:
    """‖u0‖ + ‖|D|^{2σ2} u0‖ + ‖u1‖, the solution-space norm at t = 0 (unit weights)."""
    return (solver.linear_norm_radial(config, data, 0.0, 0.0, 0)
            + solver.linear_norm_radial(config, data, 0.0, 2 * config.sigma2, 0)
            + solver.linear_norm_radial(config, data, 0.0, 0.0, 1))


def scale_to_weighted_norm(config, data, target):
    return data.scaled(target / initial_weighted_norm(config, data))


def run_grid_cross_check(config: ProblemConfig, grid: solver.GridSpec, data: solver.RadialData,
                         times, tol=1e-3):
    """Grid Parseval norm of the exact linear evolution vs the radial quadrature norm."""
    state0 = solver.initial_state(grid, data)
    rows = []
    for t in times:
        prop = solver.propagator_at(config, float(t), grid.radius())
        u, ut = prop.apply(state0.u.coefficients, state0.ut.coefficients)
        g = solver.sobolev_norm(solver.SpectralField(u, grid, t))
        rad = solver.linear_norm_radial(config, data, float(t))
        rows.append({"t": float(t), "grid": g, "radial": rad, "rel_diff": abs(g / rad - 1)})
    worst = max(r["rel_diff"] for r in rows)
    return {"rows": rows, "max_rel_diff": worst, "tolerance": tol,
            "verdict": PASS if worst <= tol else FAIL}


def box_safe_horizon(config: ProblemConfig, grid: solver.GridSpec, width: float) -> float:
    """Largest T with L >= 16 (w + T^{1/(2(σ-σ1))})."""
    spread = grid.box_length / 16 - width
    if spread <= 0:
        return 0.0
    return spread ** (2 * config.diffusive_order)


def run_self_convergence(config, grid, data, dt=0.1, horizon=10.0, refinements=3):
    """Discrepancies between successive dt-halvings at a fixed horizon."""
    finals = []
    for k in range(refinements):
        step = dt / 2 ** k
        traj = solver.evolve(config, grid, data, step, horizon, raise_on_blowup=True)
        finals.append(traj.final_state)
    disc = []
    for a, b in zip(finals[:-1], finals[1:]):
        d = np.sqrt(np.sum(np.abs(a.u.coefficients - b.u.coefficients) ** 2)
                    + np.sum(np.abs(a.ut.coefficients - b.ut.coefficients) ** 2))
        disc.append(float(d))
    ratios = [disc[i] / disc[i + 1] for i in range(len(disc) - 1)]
    ok = all(3.5 <= q <= 4.5 for q in ratios)
    return {"dt": dt, "horizon": horizon, "discrepancies": disc, "ratios": ratios,
            "verdict": PASS if ok else FAIL}


@dataclass
class SemilinearResult:
    decay: list
    profile: dict
    mass: solver.NonlinearMass | None
    blowup: str | None
    hypotheses: dict
    weighted_growth: float
    trajectory: solver.Trajectory
    data: solver.RadialData
    notes: list = field(default_factory=list)

    def to_dict(self):
        mass = None
        if self.mass is not None:
            mass = {"value": self.mass.value, "truncation_time": self.mass.truncation_time,
                    "tail_estimate": self.mass.tail_estimate, "tail_fraction": self.mass.tail_fraction,
                    "fitted_decay_exponent": self.mass.decay_exponent}
        return {"decay": [d.to_dict() for d in self.decay], "profile": self.profile,
                "nonlinear_mass": mass, "blowup": self.blowup, "hypotheses": self.hypotheses,
                "weighted_growth": self.weighted_growth, "notes": self.notes,
                "data": {"P0": self.data.P0, "P1": self.data.P1}}


def run_semilinear(config: ProblemConfig, grid: solver.GridSpec, dt: float, horizon: float,
                   epsilon: float = 1e-2, width: float = 2.0, slot: str = "u1",
                   window=SEMILINEAR_WINDOW, tol=SEMILINEAR_TOL, m: float = 1.0) -> SemilinearResult:
    """Small-data grid run with Gaussian data scaled to initial weighted norm ``epsilon``."""
    hyp = check_global_existence_hypotheses(config, m)
    base = solver.gaussian_data(1.0, width, config.dim_n, slot)
    data = scale_to_weighted_norm(config, base, epsilon)
    times = log_times(window[0], min(window[1], horizon))
    traj = solver.evolve(config, grid, data, dt, horizon, sample_times=times, keep_snapshots=True)
    notes = []
    blow = None
    if traj.blowup is not None:
        blow = str(traj.blowup)
    table = rates.semilinear_decay_exponents(config, m) if hyp.admissible else {}
    decay = []
    growth = 0.0
    if blow is None:
        for label, series in traj.norms.items():
            key = label if label in table else None
            if key is None:
                continue
            samples = [(t, v) for t, v in zip(traj.times, series)]
            rep = decay_report(f"semilinear ‖{label}‖", table[key], samples, tol)
            decay.append(rep)
            w = [v / (1 + t) ** table[key].exponent for t, v in samples]
            growth = max(growth, max(w) / w[0])
    profile = {}
    mass = None
    if blow is None and traj.mass_integrand:
        try:
            mass = solver.nonlinear_mass(traj.mass_times, traj.mass_integrand)
        except solver.MassDivergence as exc:
            notes.append(str(exc))
        if mass is not None and traj.snapshots:
            total = mass.value + mass.tail_estimate
            final = traj.snapshots[-1]
            plain = solver.grid_profile_gap(config, final, data.P0, data.P1)
            corrected = solver.grid_profile_gap(config, final, data.P0, data.P1 + total)
            rate = rates.profile_rate(config, 0.0, 0).exponent
            t_end = final.time
            profile = {"t": t_end, "M0": total, "uncorrected_gap": plain,
                       "corrected_gap": corrected, "uncorrected_ratio": plain / t_end ** rate,
                       "corrected_ratio": corrected / t_end ** rate,
                       "verdict": PASS if corrected < plain else FAIL}
    return SemilinearResult(decay, profile, mass, blow, {k: bool(v) for k, v in hyp.conditions.items()},
                            growth, traj, data, notes)


def linear_reference_queries(config: ProblemConfig):
    """The (s, j) rows used for the reference linear experiment."""
    return [RateQuery(1.0, 0.0, 0, EstimateKind.LmL2),
            RateQuery(1.0, 2 * config.sigma2, 0, EstimateKind.LmL2),
            RateQuery(1.0, 0.0, 1, EstimateKind.LmL2)]
