"""Adaptive combinations of l0-LMS filters for sparse system identification."""
from .errors import ConfigError, ContractError, DivergenceError
from .filters import FilterParams, FilterState, f_beta, l0lms_step, lms_step, msd, predict
from .kernels import BACKENDS, DEFAULT_BACKEND

__version__ = "0.1.0"

__all__ = [
    "BACKENDS",
    "ConfigError",
    "ContractError",
    "DEFAULT_BACKEND",
    "DivergenceError",
    "FilterParams",
    "FilterState",
    "f_beta",
    "l0lms_step",
    "lms_step",
    "msd",
    "predict",
]
