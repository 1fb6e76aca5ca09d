"""Deterministic agent-based simulator of how recommendation algorithms
shape what a population consumes.

Users with latent genre preferences repeatedly pick the item whose learned
utility estimate is highest; the estimator is trained online from pooled
training worlds, then deployed frozen.  Metrics decompose consumed-genre
variance into between-user and within-user parts and derive filter-bubble
and homogeneity measures from them.
"""

__version__ = "0.1.0"

from .config import ExperimentConfig, default_config, desk_config, parse_config
from .engine import ConsumptionLog, run_deployment_phase, run_training_phase
from .errors import (ConfigError, DataError, FitError, InternalError,
                     RecsimError, UsageError)
from .experiment import RunResults, run_experiment, run_single
from .metrics import MetricsReport, compute_report
from .recommenders import ALL_KINDS, NOVEL_TWO, ORIGINAL_SEVEN, AlgorithmKind

__all__ = [
    "__version__",
    "ExperimentConfig", "default_config", "desk_config", "parse_config",
    "ConsumptionLog", "run_training_phase", "run_deployment_phase",
    "RecsimError", "ConfigError", "UsageError", "FitError", "DataError",
    "InternalError",
    "RunResults", "run_experiment", "run_single",
    "MetricsReport", "compute_report",
    "AlgorithmKind", "ALL_KINDS", "ORIGINAL_SEVEN", "NOVEL_TWO",
]
