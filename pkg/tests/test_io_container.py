import json
import struct

import numpy as np
import pytest

from isacbf.io_container import MAGIC, load_container, save_container


def test_roundtrip(tmp_path, rng):
    path = str(tmp_path / "c.bin")
    arrays = {
        "f": rng.normal(size=(3, 4)),
        "c": rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)),
        "i": np.arange(5, dtype=np.int64),
    }
    meta = {"kind": "test", "note": "hello"}
    save_container(path, meta, arrays)
    meta2, back = load_container(path)
    assert meta2 == meta
    assert list(back) == ["f", "c", "i"]       # header order preserved
    for name, arr in arrays.items():
        assert back[name].dtype == arr.dtype
        assert np.array_equal(back[name], arr)


def test_byte_layout(tmp_path):
    path = str(tmp_path / "c.bin")
    save_container(path, {"k": 1}, {"a": np.array([1.0, 2.0])})
    raw = open(path, "rb").read()
    assert raw[:8] == MAGIC == b"ISACBF01"
    (hlen,) = struct.unpack("<Q", raw[8:16])
    header = json.loads(raw[16:16 + hlen])
    assert header["meta"] == {"k": 1}
    assert header["arrays"] == [{"dtype": "float64", "name": "a", "shape": [2]}]
    payload = np.frombuffer(raw[16 + hlen:], dtype="<f8")
    assert np.array_equal(payload, [1.0, 2.0])


def test_rejects_bad_magic(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"NOTMAGIC" + b"\x00" * 16)
    with pytest.raises(ValueError):
        load_container(str(path))


def test_rejects_unsupported_dtype(tmp_path):
    with pytest.raises(TypeError):
        save_container(str(tmp_path / "x.bin"), {},
                       {"a": np.array([1, 2], dtype=np.float32)})


def test_zero_dim_array_promoted_to_length_one(tmp_path):
    path = str(tmp_path / "s.bin")
    save_container(path, {}, {"s": np.array(3.5)})
    _, back = load_container(path)
    assert back["s"].shape == (1,) and back["s"][0] == 3.5
