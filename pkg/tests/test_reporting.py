"""CSV/JSON serialization helpers used by the experiment runner."""

import math

import pytest

from logdiff import ParameterError
from logdiff.reporting import format_cell, read_json, write_csv, write_json


def test_format_cell_reprs():
    assert format_cell(0.25) == "0.25"
    assert format_cell(float("nan")) == "nan"
    assert format_cell(float("inf")) == "inf"
    assert format_cell(True) == "True"
    assert format_cell(None) == ""
    assert format_cell(3) == "3"
    assert format_cell("x") == "x"


def test_write_csv_stable_bytes(tmp_path):
    rows = [{"a": 1.0 / 3.0, "b": None}, {"a": float("-inf"), "b": "ok"}]
    p1 = tmp_path / "one.csv"
    p2 = tmp_path / "two.csv"
    write_csv(p1, rows, columns=["a", "b"])
    write_csv(p2, rows, columns=["a", "b"])
    data = p1.read_bytes()
    assert data == p2.read_bytes()
    assert data.decode().splitlines()[0] == "a,b"
    assert data.endswith(b"\n")
    assert b"\r" not in data
    # repr round-trips the float exactly
    back = float(data.decode().splitlines()[1].split(",")[0])
    assert back == 1.0 / 3.0


def test_write_csv_rejects_column_mismatch(tmp_path):
    with pytest.raises(ParameterError):
        write_csv(tmp_path / "bad.csv", [{"a": 1}, {"b": 2}])
    with pytest.raises(ParameterError):
        write_csv(tmp_path / "bad2.csv", [{"a": 1}], columns=["a", "b"])


def test_json_roundtrip(tmp_path):
    payload = {"z": [1, 2, 3], "a": {"nested": True}, "x": None}
    path = tmp_path / "m.json"
    write_json(path, payload)
    text = path.read_text()
    assert text.endswith("\n")
    assert text.index('"a"') < text.index('"z"')  # sorted keys
    assert read_json(path) == payload


def test_write_csv_empty_rows_header_only(tmp_path):
    path = tmp_path / "empty.csv"
    write_csv(path, [], columns=["x", "y"])
    assert path.read_text() == "x,y\n"


def test_nan_json_becomes_null(tmp_path):
    path = tmp_path / "n.json"
    write_json(path, {"v": float("nan")})
    # json.dumps with allow_nan default writes NaN; the reader must get it back
    got = read_json(path)
    assert isinstance(got["v"], float) and math.isnan(got["v"])
