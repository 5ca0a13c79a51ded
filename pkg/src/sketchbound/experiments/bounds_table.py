"""Tabulate every bound over an (n, k, p) grid."""
from pathlib import Path
from typing import List, Optional

from sketchbound import bounds
from sketchbound.schemas import BoundSet, ExperimentConfig
from sketchbound.utils.log import get_logger
from sketchbound.utils.serialization import write_csv, write_json

logger = get_logger(__name__)


def table_header(power_q) -> tuple:
    return BoundSet.CSV_HEADER + tuple(f"proxy_pow_q{q}" for q in power_q)


def table_row(record: BoundSet, power_q) -> list:
    return record.csv_row() + [record.power_proxy.get(q) for q in power_q]


def run_bounds_table(cfg: ExperimentConfig, threads: Optional[int] = None) -> List[BoundSet]:
    """One BoundSet per grid point (m = n); extra power-trick columns per q."""
    records = []
    for n in cfg.n_grid:
        k, p = cfg.ranks(n)
        records.append(
            bounds.bound_set(
                n, n, k, p,
                trials=cfg.bound_trials,
                seed=cfg.seed,
                source=cfg.e_sigma_inv_source,
                power_q=cfg.power_q,
                threads=threads,
            )
        )

    out_dir = Path(cfg.output_dir)
    csv_path = write_csv(
        out_dir / f"{cfg.run_label}.csv",
        table_header(cfg.power_q),
        [table_row(record, cfg.power_q) for record in records],
    )
    write_json(
        out_dir / f"{cfg.run_label}.json",
        {"config": cfg.model_dump(mode="json"), "rows": [record.model_dump(mode="json") for record in records]},
    )
    logger.info(f"✅ bounds table: {len(records)} rows written to {csv_path}")
    return records
