"""Dispatch experiment configs to their runners."""
from pathlib import Path
from typing import Any, List, Optional, Union

from sketchbound.experiments.bounds_table import run_bounds_table
from sketchbound.experiments.config import load_config
from sketchbound.experiments.fig1 import FIG1_EXPERIMENTS, run_fig1
from sketchbound.experiments.fig2 import run_fig2
from sketchbound.experiments.lemmas import run_lemma_suite
from sketchbound.schemas import ExperimentConfig, LemmaSuiteReport
from sketchbound.utils.log import get_logger

logger = get_logger(__name__)


def run_experiment(cfg: ExperimentConfig, threads: Optional[int] = None, progress: bool = False) -> Any:
    """Run one validated config and return the runner's result."""
    logger.info(f"📁 {cfg.name} -> {cfg.output_dir}")
    if cfg.name in FIG1_EXPERIMENTS:
        return run_fig1(cfg, threads=threads, progress=progress)
    if cfg.name == "fig2_variability":
        return run_fig2(cfg, threads=threads, progress=progress)
    if cfg.name == "bounds_table":
        return run_bounds_table(cfg, threads=threads)
    return run_lemma_suite(cfg)


def run_config_file(path: Union[str, Path], threads: Optional[int] = None, progress: bool = False) -> List[Any]:
    """Run every table of a config file in file order."""
    return [run_experiment(cfg, threads=threads, progress=progress) for cfg in load_config(path)]


def any_lemma_failure(results: List[Any]) -> bool:
    return any(isinstance(result, LemmaSuiteReport) and not result.passed for result in results)
