import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dferclip import container
from dferclip.errors import DataError


def test_round_trip_exact(tmp_path):
    rng = np.random.default_rng(0)
    blobs = {"a": rng.standard_normal((3, 4)), "scalar": np.array(2.5), "empty": np.zeros((0, 2))}
    meta = {"kind": "test", "n": 3}
    container.write(tmp_path / "x.bin", meta, blobs)
    meta2, blobs2 = container.read(tmp_path / "x.bin")
    assert meta2 == meta
    assert list(blobs2) == list(blobs)
    for k in blobs:
        assert blobs2[k].shape == blobs[k].shape
        assert np.array_equal(blobs2[k], blobs[k])


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(0, 4), st.integers(1, 3)), elements=st.floats(allow_nan=False)))
def test_round_trip_property(arr):
    _, blobs = container.loads(container.dumps({}, {"w": arr}))
    assert np.array_equal(blobs["w"], arr)


def test_bytes_are_deterministic():
    blobs = {"w": np.arange(6.0).reshape(2, 3)}
    assert container.dumps({"b": 1, "a": 2}, blobs) == container.dumps({"a": 2, "b": 1}, blobs)


def test_layout_header():
    data = container.dumps({}, {})
    assert data[:4] == b"DFCL"
    assert struct.unpack("<II", data[4:12]) == (1, 2)  # version, len("{}")
    assert data[12:] == b"{}"


def test_bad_magic():
    data = b"XXXX" + container.dumps({}, {})[4:]
    with pytest.raises(DataError, match="bad magic.*offset 0"):
        container.loads(data, "f.bin")


def test_truncated_reports_offset():
    data = container.dumps({"k": 1}, {"w": np.ones((4, 4))})
    cut = data[:-10]
    with pytest.raises(DataError) as exc:
        container.loads(cut, "clip.bin")
    msg = str(exc.value)
    assert "clip.bin" in msg
    assert f"byte offset {len(cut)}" in msg
    assert "'w'" in msg


@pytest.mark.parametrize("n", [0, 3, 9, 11])
def test_truncated_anywhere_in_header(n):
    data = container.dumps({"k": 1}, {"w": np.ones(2)})
    with pytest.raises(DataError, match="truncated|bad magic|malformed"):
        container.loads(data[:n])


def test_malformed_json():
    data = b"DFCL" + struct.pack("<II", 1, 3) + b"{x}"
    with pytest.raises(DataError, match="malformed header"):
        container.loads(data)


def test_unsupported_version():
    data = b"DFCL" + struct.pack("<II", 9, 2) + b"{}"
    with pytest.raises(DataError, match="version 9"):
        container.loads(data)


def test_missing_file(tmp_path):
    with pytest.raises(DataError, match="nope.bin"):
        container.read(tmp_path / "nope.bin")
