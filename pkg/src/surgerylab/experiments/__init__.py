"""Config-driven sweeps, golden tables and the command-line interface."""
from .config import ConfigError, config_hash, load_config, validate_config
from .fit import SlopeFit, fit_slope
from .golden import evaluate_table, run_bound_calculators
from .net import run_net_convergence
from .pipe import run_pipe_convergence

__all__ = ["ConfigError", "config_hash", "load_config", "validate_config", "SlopeFit",
           "fit_slope", "evaluate_table", "run_bound_calculators", "run_net_convergence",
           "run_pipe_convergence"]
