"""Closed-form decay and profile exponents.

All exponents are powers of t. Inputs that are short decimals (0.25, 0.8, 4/3 ...)
are converted to exact fractions first, so the returned ``exact`` field carries a
rational value with no rounding; other inputs fall back to floats.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .config import (ConfigError, EstimateKind, ProblemConfig, RateQuery, m_zero,
                     validate)


class RateError(ValueError):
    """A query outside the validity range of the rate tables."""


@dataclass
class RatePrediction:
    exponent: float
    log_factor: bool = False
    regime_note: str = ""
    validity: list = field(default_factory=list)
    exact: Fraction | None = None

    def to_dict(self):
        return {
            "exponent": self.exponent,
            "exact": None if self.exact is None else str(self.exact),
            "log_factor": self.log_factor,
            "regime_note": self.regime_note,
            "validity": [{"condition": c, "holds": ok} for c, ok in self.validity],
        }


def exact(x):
    """Fraction for short decimals, float otherwise."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    fr = Fraction(float(x)).limit_denominator(1000)
    return fr if float(fr) == float(x) else float(x)


def _prediction(value, note, validity=(), log_factor=False):
    if isinstance(value, Fraction):
        return RatePrediction(float(value), log_factor, note, list(validity), value)
    return RatePrediction(float(value), log_factor, note, list(validity), None)


class _Params:
    def __init__(self, config: ProblemConfig):
        validate(config)
        self.sigma = exact(config.sigma)
        self.sigma1 = exact(config.sigma1)
        self.sigma2 = exact(config.sigma2)
        self.n = Fraction(config.dim_n)
        self.diff = self.sigma - self.sigma1  # diffusive order σ - σ1


def _m0(m):
    m = exact(m)
    return 2 * m / (2 - m) if m != 2 else math.inf


def _spread(p: _Params, m):
    """n/(2(σ-σ1)) (1/m - 1/2)."""
    m = exact(m)
    return p.n / (2 * p.diff) * (Fraction(1) / m - Fraction(1, 2))


def linear_decay_exponent(config: ProblemConfig, q: RateQuery) -> RatePrediction:
    """Exponent of the linear (L^m ∩ L^2)-L^2 or L^2-L^2 bound for ‖∂_t^j |D|^s u‖."""
    p = _Params(config)
    s, j = exact(q.s), q.j
    if q.estimate_kind == EstimateKind.L2L2:
        if j == 1:
            return _prediction(-s / (2 * p.diff), "L2-L2, j=1")
        if s < p.sigma1 * 2:
            return _prediction(1 - s / (2 * p.diff), "L2-L2, j=0, s < 2σ1")
        return _prediction(-s / (2 * p.diff) + p.sigma1 / p.diff, "L2-L2, j=0, s >= 2σ1")

    m0 = _m0(q.m)
    spread = _spread(p, q.m)
    if j == 1:
        cond = ("n >= 1", config.dim_n >= 1)
        return _prediction(-spread - 1 - (s - 2 * p.sigma1) / (2 * p.diff),
                           "Lm-L2, j=1", [cond])
    if s == 0:
        threshold = 2 * m0 * p.sigma1
        if p.n > threshold:
            return _prediction(-spread + p.sigma1 / p.diff, "Lm-L2, s=0, n > 2 m0 σ1",
                               [("n > 2 m0 σ1", True)])
        if p.n == threshold:
            return _prediction(Fraction(0) if isinstance(threshold, Fraction) else 0.0,
                               "Lm-L2, s=0, critical n = 2 m0 σ1: log(e+t) growth",
                               [("n = 2 m0 σ1", True)], log_factor=True)
        raise RateError(f"n > 2 m0 σ1 violated (n={config.dim_n}, 2 m0 σ1={float(threshold):g})")
    threshold = m0 * (2 * p.sigma1 - s)
    if not p.n > threshold:
        raise RateError(f"n > m0 (2σ1 - s) violated (n={config.dim_n}, bound={float(threshold):g})")
    return _prediction(-spread - (s - 2 * p.sigma1) / (2 * p.diff), "Lm-L2, s > 0, j=0",
                       [("n > m0 (2σ1 - s)", True)])


def profile_rate(config: ProblemConfig, s=0.0, j=0) -> RatePrediction:
    """Exponent of the leading profile, -n/(4(σ-σ1)) - s/(2(σ-σ1)) - j + σ1/(σ-σ1)."""
    p = _Params(config)
    if not p.n > 4 * p.sigma1:
        raise RateError("n > 4σ1 violated")
    s = exact(s)
    value = -p.n / (4 * p.diff) - s / (2 * p.diff) - j + p.sigma1 / p.diff
    return _prediction(value, "profile, n > 4σ1", [("n > 4σ1", True)])


def kernel_piece_rates(config: ProblemConfig, m=1.0, s=0.0, j=0) -> dict:
    """Exponents of the four low-frequency split-kernel estimates.

    Keys: "K0_1", "K0_2", "K1_1", "K1_2". With σ1 = 0 the second pieces decay
    exponentially and carry exponent -inf.
    """
    p = _Params(config)
    s = exact(s)
    m = exact(m)
    spread = _spread(p, m)
    m0 = _m0(m)
    k1_ok = bool(p.n > 2 * m0 * p.sigma1)
    out = {}
    base = -spread - s / (2 * p.diff) - j
    out["K0_1"] = _prediction(base, "K0 first piece", [("n >= 1", True)])
    out["K1_1"] = _prediction(base + p.sigma1 / p.diff, "K1 first piece",
                              [("n > 2 m0 σ1", k1_ok)])
    if p.sigma1 == 0:
        out["K0_2"] = RatePrediction(-math.inf, False, "exponentially decaying piece", [("σ1 = 0", True)])
        out["K1_2"] = RatePrediction(-math.inf, False, "exponentially decaying piece", [("σ1 = 0", True)])
    else:
        spread2 = p.n / (2 * p.sigma1) * (Fraction(1) / m - Fraction(1, 2))
        base2 = -spread2 - s / (2 * p.sigma1) - j
        out["K0_2"] = _prediction(base2 - (p.sigma - 2 * p.sigma1) / p.sigma1, "K0 second piece",
                                  [("n >= 1", True)])
        out["K1_2"] = _prediction(base2 + 1, "K1 second piece", [("n > 2 m0 σ1", k1_ok)])
    return out


def profile_gap_rate(config: ProblemConfig, m=1.0, s=0.0, j=0, which="K1-piece") -> RatePrediction:
    """Exponent of the low-frequency gap between a first split kernel and its profile."""
    p = _Params(config)
    s = exact(s)
    base = -_spread(p, m) - s / (2 * p.diff) - j
    upper = p.sigma1 + p.sigma2 > p.sigma
    case = "σ1+σ2 > σ" if upper else "σ1+σ2 <= σ"
    if which == "K0-piece":
        shift = (p.sigma - 2 * p.sigma1) if upper else (p.sigma2 - p.sigma1)
        return _prediction(base - shift / p.diff, f"K0 gap, {case}", [("n >= 1", True)])
    if which != "K1-piece":
        raise RateError(f"unknown piece {which!r}")
    m0 = _m0(m)
    if not p.n > 2 * m0 * p.sigma1:
        raise RateError("n > 2 m0 σ1 violated")
    shift = (p.sigma - 3 * p.sigma1) if upper else (p.sigma2 - 2 * p.sigma1)
    return _prediction(base - shift / p.diff, f"K1 gap, {case}", [("n > 2 m0 σ1", True)])


def gamma_s(config: ProblemConfig, s=0.0, j=0) -> RatePrediction:
    """Exponent of the distance between the solution and its split-profile approximation (L^1 data)."""
    p = _Params(config)
    s = exact(s)
    if not p.n > 4 * p.sigma1:
        raise RateError("n > 2 m0 σ1 with m0 = 2 violated")
    upper = p.sigma1 + p.sigma2 > p.sigma
    shift = (p.sigma - 3 * p.sigma1) if upper else (p.sigma2 - 2 * p.sigma1)
    first = -p.n / (4 * p.diff) - s / (2 * p.diff) - j - shift / p.diff
    case = "σ1+σ2 > σ" if upper else "σ1+σ2 <= σ"
    if p.sigma1 == 0:
        return _prediction(first, f"{case}; second branch absent (σ1 = 0)", [("n > 4σ1", True)])
    second = -p.n / (4 * p.sigma1) - s / (2 * p.sigma1) - j + 1
    return _prediction(max(first, second), f"{case}; max of two branches", [("n > 4σ1", True)])


def semilinear_decay_exponents(config: ProblemConfig, m=1.0, s=None) -> dict:
    """Decay table of the small-data global solution.

    j=0 keys: "u", "D^{2σ2} u", "u_t". j=1 keys: "u", "D^s u", "u_t", "D^{s-2σ2} u_t";
    for j=1 the Sobolev order ``s`` defaults to its admissible lower bound.
    """
    from .config import check_global_existence_hypotheses

    report = check_global_existence_hypotheses(config, m)
    failed = report.failed()
    if failed:
        raise RateError("hypothesis failed: " + "; ".join(failed))
    p = _Params(config)
    spread = _spread(p, m)
    f1 = -spread + p.sigma1 / p.diff
    checks = [(k, v) for k, v in report.conditions.items()]
    if config.deriv_j == 0:
        return {
            "u": _prediction(f1, "j=0, ‖u‖", checks),
            "D^{2σ2} u": _prediction(-spread - (p.sigma2 - p.sigma1) / p.diff, "j=0, ‖|D|^{2σ2}u‖", checks),
            "u_t": _prediction(Fraction(-1), "j=0, ‖u_t‖", checks),
        }
    s_val = exact(report.min_sobolev_order if s is None else s)
    return {
        "u": _prediction(f1, "j=1, ‖u‖", checks),
        "D^s u": _prediction(-p.sigma2 / p.diff, "j=1, ‖|D|^s u‖", checks),
        "u_t": _prediction(f1 - 1, "j=1, ‖u_t‖", checks),
        "D^{s-2σ2} u_t": _prediction(f1 - 1 - (s_val - 2 * p.sigma2) / (2 * p.diff),
                                     "j=1, ‖|D|^{s-2σ2}u_t‖", checks),
    }


def nonlinear_mass_decay(config: ProblemConfig, m=1.0) -> RatePrediction:
    """Decay exponent β of t ↦ ∫|u|^p dx under the small-data bounds (integrand ~ t^{-β})."""
    p = _Params(config)
    if config.nonlinearity_p is None:
        raise ConfigError("nonlinearity_p required")
    pp = exact(config.nonlinearity_p)
    m = exact(m)
    beta = p.n * (pp - 1) / (2 * m * p.diff) - pp * p.sigma1 / p.diff
    return _prediction(beta, "∫|u|^p dx decay rate")
