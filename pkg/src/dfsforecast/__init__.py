"""Disturbed fuzzy systems for derivative-aware time-series forecasting."""
from .dfsla import DelayEmbeddedDataset, TrainingReport, dfsla_train
from .disturbed import DfsModel, DisturbedRule, dfs_eval, dfs_taylor_coefficients, load_model, save_model
from .errors import ContractViolation, CoverageHoleError, DeadRuleError, NumericalFailure, TrustRegionError
from .fuzzy import FuzzyPartition, TriangularMembership, enumerate_rules, select_top_fired
from .taylor import ForecastResult, TaylorStepConfig, forecast, taylor_step

__all__ = [
    "ContractViolation", "CoverageHoleError", "DeadRuleError", "DelayEmbeddedDataset", "DfsModel",
    "DisturbedRule", "ForecastResult", "FuzzyPartition", "NumericalFailure", "TaylorStepConfig",
    "TrainingReport", "TriangularMembership", "TrustRegionError", "dfs_eval", "dfs_taylor_coefficients",
    "dfsla_train", "enumerate_rules", "forecast", "load_model", "save_model", "select_top_fired",
    "taylor_step",
]
__version__ = "0.1.0"
