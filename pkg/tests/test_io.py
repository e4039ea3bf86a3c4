import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from coherence_forge.io import load_matrix, load_matrix_list, matrix_from_json, matrix_to_json, save_matrix, to_jsonable
from coherence_forge.linalg import ValidationError

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@given(st.integers(1, 5).flatmap(lambda d: st.tuples(arrays(float, (d, d), elements=finite), arrays(float, (d, d), elements=finite))))
def test_round_trip_is_bit_exact(parts):
    m = parts[0] + 1j * parts[1]
    text = json.dumps(matrix_to_json(m))
    back = matrix_from_json(json.loads(text))
    assert np.array_equal(back.view(np.uint64), m.view(np.uint64))
    again = matrix_from_json(json.loads(json.dumps(matrix_to_json(back))))
    assert np.array_equal(again, back)


def test_schema_errors():
    with pytest.raises(ValidationError):
        matrix_from_json({"d": 3, "re": [[1, 0], [0, 1]], "im": [[0, 0], [0, 0]]})
    with pytest.raises(ValidationError):
        matrix_from_json({"re": [[1, 0]], "im": [[0, 0]]})
    with pytest.raises(ValidationError):
        matrix_from_json("identity")
    assert np.array_equal(matrix_from_json([[1, 0], [0, 1]]), np.eye(2))


def test_files(tmp_path):
    m = np.array([[0.5, 0.25j], [-0.25j, 0.5]])
    save_matrix(tmp_path / "m.json", m)
    assert np.array_equal(load_matrix(tmp_path / "m.json"), m)
    (tmp_path / "list.json").write_text(json.dumps({"matrices": [matrix_to_json(m), matrix_to_json(np.eye(2))]}))
    assert len(load_matrix_list(tmp_path / "list.json")) == 2
    (tmp_path / "bad.json").write_text("{not json")
    with pytest.raises(ValidationError):
        load_matrix(tmp_path / "bad.json")
    with pytest.raises(ValidationError):
        load_matrix(tmp_path / "missing.json")


def test_to_jsonable():
    out = to_jsonable({"a": np.float64(1.5), "b": np.int64(2), "c": np.nan, "m": np.eye(2, dtype=complex), "v": np.arange(3)})
    assert out["a"] == 1.5 and out["b"] == 2 and out["c"] is None
    assert out["m"]["d"] == 2 and out["v"] == [0, 1, 2]
    json.dumps(out, allow_nan=False)
