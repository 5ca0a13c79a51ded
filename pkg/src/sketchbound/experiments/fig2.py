"""Variability of the worst-case error at a single (n, k, p)."""
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from sketchbound import bounds
from sketchbound.errors import InvalidParameter
from sketchbound.experiments.plotting import plot_fig2
from sketchbound.models import WSampleBatch
from sketchbound.schemas import ExperimentConfig, ExperimentRow
from sketchbound.utils.log import get_logger
from sketchbound.utils.serialization import write_csv, write_json
from sketchbound.worstcase import estimate_expected_W

logger = get_logger(__name__)

HISTOGRAM_HEADER = ("bin_left", "bin_right", "count")


def histogram_rows(draws: np.ndarray, bins: int) -> List[Tuple[float, float, int]]:
    counts, edges = np.histogram(draws, bins=bins)
    return [(float(edges[i]), float(edges[i + 1]), int(counts[i])) for i in range(len(counts))]


def run_fig2(
    cfg: ExperimentConfig,
    threads: Optional[int] = None,
    progress: bool = False,
) -> Tuple[List[ExperimentRow], WSampleBatch]:
    """Draw W ``trials_per_point`` times; write draws, histogram, summary and SVG."""
    if cfg.name != "fig2_variability":
        raise InvalidParameter(f"run_fig2 cannot run '{cfg.name}'")
    if cfg.trials_per_point < 2:
        raise InvalidParameter("fig2_variability needs trials_per_point >= 2")

    n = cfg.n_grid[0]
    k, p = cfg.ranks(n)
    logger.info(f"📊 fig2: n={n}, k={k}, p={p}, {cfg.trials_per_point} draws")

    batch = estimate_expected_W(
        n, k, p, cfg.trials_per_point, cfg.seed,
        method=cfg.method, threads=threads, progress=progress,
    )
    record = bounds.bound_set(
        n, n, k, p,
        trials=cfg.bound_trials,
        seed=cfg.seed,
        source=cfg.e_sigma_inv_source,
        threads=threads,
    )

    rows = [
        ExperimentRow(
            n=n, k=k, p=p, draw_index=trial, seed=seed, value=w,
            hmt=record.hmt_upper, sharp_upper=record.sharp_upper,
            sharp_lower=record.sharp_lower, proxy=record.proxy,
        )
        for trial, seed, w in batch.rows()
    ]

    out_dir = Path(cfg.output_dir)
    write_csv(out_dir / f"{cfg.run_label}_draws.csv", ExperimentRow.CSV_HEADER, [row.csv_row() for row in rows])
    histogram_path = write_csv(
        out_dir / f"{cfg.run_label}_histogram.csv", HISTOGRAM_HEADER, histogram_rows(batch.draws, cfg.histogram_bins)
    )
    write_json(
        out_dir / f"{cfg.run_label}_summary.json",
        {
            "config": cfg.model_dump(mode="json"),
            "batch": batch.to_dict(),
            "bounds": record.model_dump(mode="json"),
        },
    )
    plot_fig2(histogram_path, out_dir / f"{cfg.run_label}_histogram.svg", title=f"W, n={n}, k={k}, p={p}")

    summary = batch.summary
    logger.info(
        f"✅ fig2: range [{batch.min:.2f}, {batch.max:.2f}], mean {summary.mean:.3f}, std {summary.std:.3f}"
    )
    return rows, batch
