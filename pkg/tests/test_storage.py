import json
import math

import numpy as np
import pytest

from storage.result_store import ResultStore
from storage.trace_writer import write_csv
from utils.errors import InvalidArgumentError
from utils.formatting import dumps, format_float


@pytest.fixture
def store(tmp_path):
    return ResultStore(str(tmp_path / "results"))


def test_store_and_retrieve(store):
    request = {"vertices": [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], "alpha": 1.0}
    result_hash = store.store("energy", request, {"value": 0.1, "error": 1e-12})
    entry = store.retrieve(result_hash)
    assert entry["result"] == {"value": 0.1, "error": 1e-12}
    assert entry["metadata"]["kind"] == "energy"
    assert entry["metadata"]["request"] == request
    assert entry["metadata"]["result_hash"] == result_hash


def test_same_request_same_hash(store):
    first = store.store("energy", {"a": 1, "b": [1.5, 2]}, {"value": 1})
    second = store.store("energy", {"b": [1.5, 2], "a": 1}, {"value": 1})
    assert first == second
    assert store.store("potential", {"a": 1, "b": [1.5, 2]}, {"value": 1}) != first


def test_missing_and_malformed_hashes(store):
    assert store.retrieve("ab" * 32) is None
    with pytest.raises(InvalidArgumentError):
        store.retrieve("../../etc/passwd")


def test_list_results_filters_by_kind(store):
    store.store("energy", {"x": 1}, {})
    store.store("energy", {"x": 2}, {})
    store.store("stationarity", {"x": 1}, {})
    assert len(store.list_results()) == 3
    assert {m["kind"] for m in store.list_results("energy")} == {"energy"}
    assert len(store.list_results("energy")) == 2


def test_numpy_values_are_archived(store):
    result_hash = store.store("energy", {"v": np.array([1.0, 2.0])}, {"value": np.float64(0.5)})
    assert store.retrieve(result_hash)["result"] == {"value": 0.5}


def test_dumps_writes_seventeen_digits():
    text = dumps({"x": 0.1, "flag": np.bool_(True), "n": np.int64(3)}, indent=None)
    assert json.loads(text) == {"x": 0.1, "flag": True, "n": 3}
    assert "0.10000000000000001" in text
    assert format_float(float("inf")) == "Infinity"


def test_dumps_formats_nested_floats_without_touching_strings():
    payload = {"label": "0.1", "values": [0.1, np.float32(0.5)], "nested": {"x": -math.inf, "n": None}}
    text = dumps(payload, indent=None)
    assert text == '{"label": "0.1", "values": [0.10000000000000001, 0.5], "nested": {"x": -Infinity, "n": null}}'
    assert dumps(payload, indent=None) == text
    assert "\n  \"label\"" in dumps(payload)


def test_write_csv():
    text = write_csv([{"step": 0, "energy": 0.1, "ok": True}, {"step": 1, "energy": None, "extra": "a"}])
    lines = text.splitlines()
    assert lines[0] == "step,energy,ok,extra"
    assert lines[1] == "0,0.10000000000000001,true,"
    assert lines[2] == "1,,,a"


def test_write_csv_with_fixed_columns():
    text = write_csv([{"a": 1, "b": 2}], columns=["b", "a"])
    assert text == "b,a\n2,1\n"
