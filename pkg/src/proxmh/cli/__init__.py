"""Command-line front end: ``run``, ``compare``, ``tune`` and ``selftest``."""

from .config import ExperimentConfig, load_config, parse_config
from .experiment import compare_command, run_experiment, tune_command
from .main import main

__all__ = ["ExperimentConfig", "load_config", "parse_config", "run_experiment", "compare_command",
           "tune_command", "main"]
