"""Config-driven experiments: worst-case error figures, bounds tables and the lemma suite."""
from sketchbound.experiments.config import load_config, parse_config
from sketchbound.experiments.runner import run_config_file, run_experiment

__all__ = ["load_config", "parse_config", "run_config_file", "run_experiment"]
