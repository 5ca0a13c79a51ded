"""CSV / JSON writers with deterministic number formatting.

Data files start with a single ``# generated_at=...`` line; everything after it is
a pure function of the inputs, so reruns are byte-identical below that line.
"""
import csv
import json
import math
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, List, Optional, Sequence

import numpy as np

TIMESTAMP_PREFIX = "# generated_at="


def format_number(value: Any) -> str:
    """Shortest round-trip text for floats, empty string for absent values."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


def json_serial(obj):
    """JSON serializer for objects not serializable by default."""
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, Path):
        return str(obj)
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    if hasattr(obj, "model_dump"):
        return obj.model_dump(mode="json")
    raise TypeError(f"Type {type(obj)} not serializable")


def _timestamp_line() -> str:
    return f"{TIMESTAMP_PREFIX}{datetime.now(timezone.utc).isoformat(timespec='seconds')}\n"


def write_csv(
    path: Path,
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    timestamp: bool = True,
) -> Path:
    """Write header + rows, replacing any previous file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        if timestamp:
            f.write(_timestamp_line())
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_number(v) for v in row])
    return path


def append_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Append rows, creating the file (timestamp + header) on first use."""
    path = Path(path)
    if not path.exists():
        return write_csv(path, header, rows)
    with open(path, "a", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        for row in rows:
            writer.writerow([format_number(v) for v in row])
    return path


def read_csv(path: Path) -> List[dict]:
    """Read a CSV written by :func:`write_csv` (timestamp line skipped)."""
    with open(path, newline="") as f:
        lines = [line for line in f if not line.startswith(TIMESTAMP_PREFIX)]
    return list(csv.DictReader(lines))


def write_json(path: Path, payload: Any, generated_at: Optional[bool] = True) -> Path:
    """Write pretty JSON with sorted keys; ``generated_at`` is the only volatile field."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if generated_at and isinstance(payload, dict):
        payload = {**payload, "generated_at": datetime.now(timezone.utc).isoformat(timespec="seconds")}
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True, default=json_serial)
        f.write("\n")
    return path
