"""Worst-case error versus n, with bound overlays.

``fig1_fixed_ratio`` scales k and p with n (constant error expected);
``fig1_fixed_kp`` holds them fixed (error grows like sqrt(n)).
"""
from pathlib import Path
from typing import List, Optional

from sketchbound import bounds
from sketchbound.errors import InvalidParameter
from sketchbound.experiments.plotting import plot_fig1
from sketchbound.models import MCEstimate
from sketchbound.schemas import ExperimentConfig, ExperimentRow
from sketchbound.utils.log import get_logger
from sketchbound.utils.serialization import append_csv, write_csv, write_json
from sketchbound.worstcase import draw_W, trial_seeds

logger = get_logger(__name__)

FIG1_EXPERIMENTS = ("fig1_fixed_ratio", "fig1_fixed_kp")


def run_fig1(cfg: ExperimentConfig, threads: Optional[int] = None, progress: bool = False) -> List[ExperimentRow]:
    """Sample W over the n grid; CSV is flushed after every grid point.

    Returns:
        One ExperimentRow per draw, grid order then draw order
    """
    if cfg.name not in FIG1_EXPERIMENTS:
        raise InvalidParameter(f"run_fig1 cannot run '{cfg.name}'")

    out_dir = Path(cfg.output_dir)
    csv_path = out_dir / f"{cfg.run_label}.csv"
    write_csv(csv_path, ExperimentRow.CSV_HEADER, [])

    rows: List[ExperimentRow] = []
    points = []
    for point_index, n in enumerate(cfg.n_grid):
        k, p = cfg.ranks(n)
        logger.info(f"📊 {cfg.name}: n={n}, k={k}, p={p}, {cfg.trials_per_point} draws")
        record = bounds.bound_set(
            n, n, k, p,
            trials=cfg.bound_trials,
            seed=cfg.seed,
            source=cfg.e_sigma_inv_source,
            threads=threads,
        )
        seeds = trial_seeds(cfg.seed, cfg.trials_per_point, point_index)
        draws = draw_W(n, k, p, seeds, method=cfg.method, threads=threads, progress=progress)

        point_rows = [
            ExperimentRow(
                n=n, k=k, p=p, draw_index=i, seed=seed, value=float(w),
                hmt=record.hmt_upper, sharp_upper=record.sharp_upper,
                sharp_lower=record.sharp_lower, proxy=record.proxy,
            )
            for i, (seed, w) in enumerate(zip(seeds, draws))
        ]
        append_csv(csv_path, ExperimentRow.CSV_HEADER, [row.csv_row() for row in point_rows])
        rows.extend(point_rows)

        summary = {"n": n, "k": k, "p": p, "min": float(draws.min()), "max": float(draws.max())}
        if len(draws) >= 2:
            estimate = MCEstimate.from_samples(draws)
            summary.update(estimate.to_dict())
            summary["cv"] = estimate.std / estimate.mean if estimate.mean > 0 else None
        summary["bounds"] = record.model_dump(mode="json")
        points.append(summary)

    write_json(out_dir / f"{cfg.run_label}.json", {"config": cfg.model_dump(mode="json"), "points": points})
    plot_fig1(csv_path, out_dir / f"{cfg.run_label}.svg", title=cfg.name.replace("_", " "))
    logger.info(f"✅ {cfg.name}: {len(rows)} draws written to {csv_path}")
    return rows
