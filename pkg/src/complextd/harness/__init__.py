"""Configs, experiment runners and the command line."""

from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .experiments import RunArtifacts, oracle_compare, run_checkered, run_custom, run_wavy
