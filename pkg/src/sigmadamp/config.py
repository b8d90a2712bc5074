"""Problem parameters, admissibility checks and global-existence hypotheses."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional


class ConfigError(ValueError):
    """Raised when a parameter set violates a standing assumption."""


@dataclass(frozen=True)
class ProblemConfig:
    """Parameters of u_tt + (-Δ)^σ u + μ1(-Δ)^σ1 u_t + μ2(-Δ)^σ2 u_t = |∂_t^j u|^p.

    ``nonlinearity_p`` is only needed for semilinear runs; ``deriv_j`` picks
    the nonlinearity |u|^p (0) or |u_t|^p (1).
    """

    sigma: float
    sigma1: float
    sigma2: float
    mu1: float = 1.0
    mu2: float = 1.0
    dim_n: int = 1
    nonlinearity_p: Optional[float] = None
    deriv_j: int = 0

    def with_(self, **changes) -> "ProblemConfig":
        return replace(self, **changes)

    @property
    def diffusive_order(self) -> float:
        """σ - σ1, the order of the limiting anomalous diffusion."""
        return self.sigma - self.sigma1


class EstimateKind(str, Enum):
    LmL2 = "LmL2"
    L2L2 = "L2L2"


@dataclass(frozen=True)
class RateQuery:
    m: float = 1.0
    s: float = 0.0
    j: int = 0
    estimate_kind: EstimateKind = EstimateKind.LmL2

    def __post_init__(self):
        if not 1.0 <= self.m <= 2.0:
            raise ConfigError(f"m must lie in [1, 2], got {self.m}")
        if self.s < 0:
            raise ConfigError(f"s must be nonnegative, got {self.s}")
        if self.j not in (0, 1):
            raise ConfigError(f"j must be 0 or 1, got {self.j}")
        object.__setattr__(self, "estimate_kind", EstimateKind(self.estimate_kind))
        if self.estimate_kind is EstimateKind.LmL2 and self.m == 2.0:
            raise ConfigError("m = 2 has no (L^m ∩ L^2) - L^2 estimate; use L2L2")


def validate(config: ProblemConfig) -> ProblemConfig:
    """Return ``config`` unchanged if every standing assumption holds.

    Raises
    ------
    ConfigError
        naming the first violated inequality.
    """
    c = config
    checks = [
        (c.sigma >= 1, "sigma >= 1 violated"),
        (c.sigma1 >= 0, "sigma1 >= 0 violated"),
        (c.sigma1 < c.sigma / 2, "sigma1 < sigma/2 violated"),
        (c.sigma / 2 < c.sigma2, "sigma/2 < sigma2 violated"),
        (c.sigma2 <= c.sigma, "sigma2 <= sigma violated"),
        (c.mu1 > 0, "mu1 > 0 violated"),
        (c.mu2 > 0, "mu2 > 0 violated"),
        (int(c.dim_n) == c.dim_n and c.dim_n >= 1, "dim_n must be a positive integer"),
        (c.deriv_j in (0, 1), "deriv_j must be 0 or 1"),
        (c.nonlinearity_p is None or c.nonlinearity_p > 1, "nonlinearity_p > 1 violated"),
    ]
    for ok, message in checks:
        if not ok:
            raise ConfigError(message)
    for name in ("sigma", "sigma1", "sigma2", "mu1", "mu2"):
        if not math.isfinite(getattr(c, name)):
            raise ConfigError(f"{name} must be finite")
    return config


def m_zero(m: float) -> float:
    """The exponent m0 = 2m/(2-m), i.e. 1/m0 = 1/m - 1/2."""
    if not 1.0 <= m < 2.0:
        raise ConfigError(f"m0 is defined for m in [1, 2), got m={m}")
    return 2.0 * m / (2.0 - m)


@dataclass
class HypothesisReport:
    """Outcome of the global-existence hypotheses for one (config, m)."""

    j: int
    m: float
    p: float
    dimension_ok: bool
    dimension_condition: str
    p_window: tuple[float, float]
    p_window_nonempty: bool
    p_in_window: bool
    p_above_critical: bool
    critical_p: float
    min_sobolev_order: Optional[float] = None
    conditions: dict[str, bool] = field(default_factory=dict)

    @property
    def admissible(self) -> bool:
        return all(self.conditions.values())

    def failed(self) -> list[str]:
        return [name for name, ok in self.conditions.items() if not ok]


def check_global_existence_hypotheses(config: ProblemConfig, m: float) -> HypothesisReport:
    """Evaluate the small-data global existence hypotheses for the configured j.

    Never raises on an inadmissible parameter set; the booleans carry the verdict.
    """
    validate(config)
    if config.nonlinearity_p is None:
        raise ConfigError("nonlinearity_p required")
    n, p = config.dim_n, config.nonlinearity_p
    s, s1, s2 = config.sigma, config.sigma1, config.sigma2
    m0 = m_zero(m)
    dim_ok = n > 2 * m0 * s1
    dim_text = f"n > 2*m0*sigma1 ({n} > {2 * m0 * s1:g})"
    conditions: dict[str, bool] = {dim_text: dim_ok}

    if config.deriv_j == 0:
        lo = 2.0 / m
        if n <= 4 * s2:
            hi = math.inf
        elif n < 8 * s2 / (2 - m):
            hi = n / (n - 4 * s2)
        else:
            hi = lo  # dimension outside the covered range: empty window
        nonempty = hi > lo
        in_window = nonempty and lo <= p < hi
        denom = n - 2 * m * s1
        critical = 1 + 2 * m * s / denom if denom > 0 else math.inf
        above = p > critical
        conditions[f"p in [{lo:g}, {hi:g})"] = in_window
        conditions[f"p > 1 + 2*m*sigma/(n - 2*m*sigma1) = {critical:g}"] = above
        return HypothesisReport(0, m, p, dim_ok, dim_text, (lo, hi), nonempty,
                                in_window, above, critical, None, conditions)

    s_min = max(2 * s2 + n / 2, 2 * (s + s2 - s1))
    critical = max(2.0 / m, 1 + s_min - 2 * s2)
    above = p > critical
    conditions[f"p > max(2/m, 1 + s - 2*sigma2) with s > {s_min:g}"] = above
    return HypothesisReport(1, m, p, dim_ok, dim_text, (critical, math.inf), True,
                            above, above, critical, s_min, conditions)


REFERENCE = ProblemConfig(sigma=1.0, sigma1=0.25, sigma2=0.75, mu1=1.0, mu2=1.0, dim_n=2)
