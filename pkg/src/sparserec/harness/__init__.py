"""Experiment orchestration: signals, trial scheduling, sweeps, config and CSV."""

from .config import ConfigError, format_config, parse_config, parse_config_text, write_config
from .experiment import (
    EPSILON_RULES,
    SUCCESS_RTOL,
    TRIAL_FIELDS,
    ExperimentConfig,
    PhaseCell,
    SlopeReport,
    TrialRecord,
    noise_scaling_sweep,
    optimal_m,
    phase_grid,
    run_experiment,
    trial_seed,
    write_csv,
    write_rows,
)
from .signals import SignalSpec, generate_signal

__all__ = [
    "EPSILON_RULES",
    "SUCCESS_RTOL",
    "TRIAL_FIELDS",
    "ConfigError",
    "ExperimentConfig",
    "PhaseCell",
    "SignalSpec",
    "SlopeReport",
    "TrialRecord",
    "format_config",
    "generate_signal",
    "noise_scaling_sweep",
    "optimal_m",
    "parse_config",
    "parse_config_text",
    "phase_grid",
    "run_experiment",
    "trial_seed",
    "write_config",
    "write_csv",
    "write_rows",
]
