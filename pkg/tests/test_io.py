import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qsine import io as qio


@given(arrays(np.float64, st.integers(1, 40), elements=st.floats(allow_nan=False, allow_infinity=False)))
def test_binary_roundtrip(tmp_path_factory, values):
    path = tmp_path_factory.mktemp("bin") / "u.bin"
    qio.write_binary(path, values)
    assert np.array_equal(qio.read_binary(path), values)


def test_binary_layout(tmp_path):
    path = tmp_path / "u.bin"
    qio.write_binary(path, np.array([1.0, -2.0]))
    raw = path.read_bytes()
    assert raw[:8] == (2).to_bytes(8, "little")
    assert np.frombuffer(raw[8:], "<f8").tolist() == [1.0, -2.0]


def test_binary_truncated(tmp_path):
    path = tmp_path / "u.bin"
    qio.write_binary(path, np.arange(4.0))
    path.write_bytes(path.read_bytes()[:-3])
    with pytest.raises(ValueError):
        qio.read_binary(path)


@pytest.mark.parametrize("shape", [(8,), (4, 4)])
def test_grid_csv_roundtrip(tmp_path, shape):
    values = np.random.default_rng(0).normal(size=shape)
    path = tmp_path / "u.csv"
    qio.write_grid_csv(path, values, L=2.0)
    assert np.array_equal(qio.read_grid_csv(path), values)
    header = path.read_text().splitlines()[0]
    assert header == ("index,x,value" if len(shape) == 1 else "i0,i1,x0,x1,value")


def test_manifest_roundtrip(tmp_path):
    path = tmp_path / "m.json"
    qio.write_manifest(path, {"b": np.float64(1.5), "a": np.arange(3), "p": tmp_path})
    m = qio.read_manifest(path)
    assert m["a"] == [0, 1, 2] and m["b"] == 1.5 and m["p"] == str(tmp_path)
    assert path.read_text().index('"a"') < path.read_text().index('"b"')
