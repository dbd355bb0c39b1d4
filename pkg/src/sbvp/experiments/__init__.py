"""Exact-solution oracles, error metrics and the ensemble experiment runner."""

from .metrics import order_fit, strong_error, tp2_moments
from .oracles import exact_tp1, exact_tp2, exact_tp3, oracle_for, refine_path
from .runner import (
    ErrorReport,
    ExperimentConfig,
    RealizationError,
    moments,
    run,
    sweep,
    compare,
)

__all__ = [
    "ErrorReport", "ExperimentConfig", "RealizationError", "exact_tp1", "exact_tp2",
    "exact_tp3", "moments", "oracle_for", "order_fit", "refine_path", "run",
    "strong_error", "sweep", "compare", "tp2_moments",
]
