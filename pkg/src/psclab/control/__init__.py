from .episode import CONTROLLER_KINDS, run_episode
from .filter import FilterResult, safe_filter
from .mpc import MPCConfig, MPCPlan, mpc_plan
from .nominal import NominalControllerConfig, nominal, nominal_batch

__all__ = [
    "CONTROLLER_KINDS", "run_episode", "FilterResult", "safe_filter",
    "MPCConfig", "MPCPlan", "mpc_plan", "NominalControllerConfig",
    "nominal", "nominal_batch",
]
