"""JSON and CSV writers."""
import json
from decimal import Decimal
from pathlib import Path

import numpy as np
import pytest

from sketchbound.models import SketchConfig
from sketchbound.schemas import RankRule
from sketchbound.utils.serialization import TIMESTAMP_PREFIX, format_number, json_serial, read_csv, write_csv, write_json


class _Summary:
    def to_dict(self):
        return {"mean": 1.5}


def test_json_serial_converts_numpy_and_models():
    assert json_serial(np.arange(3)) == [0, 1, 2]
    assert json_serial(np.int64(7)) == 7
    assert json_serial(np.float32(0.5)) == 0.5
    assert json_serial(Path("out") / "w.csv") == str(Path("out") / "w.csv")
    assert json_serial(_Summary()) == {"mean": 1.5}
    assert json_serial(SketchConfig(k=2, p=3))["k"] == 2
    assert json_serial(RankRule(kind="ratio", value=0.1)) == {"kind": "ratio", "value": 0.1}


@pytest.mark.parametrize("value", [Decimal("1.5"), {1, 2}, object()])
def test_json_serial_rejects_unknown_types(value):
    with pytest.raises(TypeError, match="not serializable"):
        json_serial(value)


def test_write_json_stamps_dicts_only(tmp_path):
    payload = json.loads(write_json(tmp_path / "a.json", {"W": np.float64(2.0)}).read_text())
    assert payload["W"] == 2.0
    assert "generated_at" in payload
    assert json.loads(write_json(tmp_path / "b.json", [1, 2]).read_text()) == [1, 2]


def test_csv_roundtrip_skips_timestamp(tmp_path):
    path = write_csv(tmp_path / "rows.csv", ("n", "W"), [(10, 0.1), (20, float("inf"))])
    assert path.read_text().startswith(TIMESTAMP_PREFIX)
    assert read_csv(path) == [{"n": "10", "W": "0.1"}, {"n": "20", "W": "inf"}]


@pytest.mark.parametrize(
    "value, text",
    [(None, ""), (True, "true"), (np.int32(4), "4"), (0.1, "0.1"), (float("nan"), "nan"), (-float("inf"), "-inf")],
)
def test_format_number(value, text):
    assert format_number(value) == text
