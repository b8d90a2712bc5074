"""Decay rates and numerics for the doubly damped σ-evolution equation."""
from .config import (REFERENCE, ConfigError, EstimateKind, ProblemConfig, RateQuery,
                     check_global_existence_hypotheses, m_zero, validate)

__version__ = "0.1.0"

__all__ = [
    "REFERENCE", "ConfigError", "EstimateKind", "ProblemConfig", "RateQuery",
    "check_global_existence_hypotheses", "m_zero", "validate", "__version__",
]
