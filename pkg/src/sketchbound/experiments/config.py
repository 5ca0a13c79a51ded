"""Experiment configuration files (TOML, one table per experiment run)."""
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import List, Union

from pydantic import ValidationError

from sketchbound.errors import InvalidParameter
from sketchbound.schemas import ExperimentConfig


def parse_config(text: str, source: str = "<string>") -> List[ExperimentConfig]:
    """Parse TOML text into validated experiment configs.

    Each top-level table is one run. The table name is the experiment name unless the
    table sets ``name`` itself, which lets a file hold several runs of one experiment::

        [fig2a]
        name = "fig2_variability"
        n_grid = [100000]
    """
    try:
        document = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise InvalidParameter(f"{source}: invalid TOML: {e}") from e

    configs = []
    for table_name, table in document.items():
        if not isinstance(table, dict):
            raise InvalidParameter(f"{source}: top-level key '{table_name}' must be a table")
        fields = {"name": table_name, "label": table_name, **table}
        try:
            configs.append(ExperimentConfig(**fields))
        except ValidationError as e:
            raise InvalidParameter(f"{source}: [{table_name}] {e}") from e

    if not configs:
        raise InvalidParameter(f"{source}: no experiment tables found")
    return configs


def load_config(path: Union[str, Path]) -> List[ExperimentConfig]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise InvalidParameter(f"cannot read config {path}: {e}") from e
    return parse_config(text, source=str(path))
