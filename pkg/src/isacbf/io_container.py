"""Self-describing binary container for models and datasets.

Byte layout:
  bytes 0..7    magic ``ISACBF01``
  bytes 8..15   little-endian uint64, JSON header length in bytes
  header        UTF-8 JSON: {"meta": {...}, "arrays": [{name, dtype, shape}]}
  payload       the arrays, concatenated in header order, little-endian,
                C-contiguous

Floats are stored as little-endian float64; complex arrays as complex128.
"""
from __future__ import annotations

import json
import struct

import numpy as np

MAGIC = b"ISACBF01"

_DTYPES = {"float64": "<f8", "complex128": "<c16", "int64": "<i8"}


def save_container(path: str, meta: dict, arrays: dict[str, np.ndarray]) -> None:
    entries = []
    payload = bytearray()
    for name, arr in arrays.items():
        arr = np.ascontiguousarray(arr)
        key = arr.dtype.name
        if key not in _DTYPES:
            raise TypeError(f"unsupported dtype {arr.dtype} for array {name!r}")
        arr = arr.astype(_DTYPES[key], copy=False)
        entries.append({"name": name, "dtype": key, "shape": list(arr.shape)})
        payload += arr.tobytes()
    header = json.dumps({"meta": meta, "arrays": entries},
                        sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(header)))
        fh.write(header)
        fh.write(bytes(payload))


def load_container(path: str) -> tuple[dict, dict[str, np.ndarray]]:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != MAGIC:
            raise ValueError(f"{path}: not an ISACBF container")
        (hlen,) = struct.unpack("<Q", fh.read(8))
        header = json.loads(fh.read(hlen).decode("utf-8"))
        arrays = {}
        for entry in header["arrays"]:
            dt = np.dtype(_DTYPES[entry["dtype"]])
            count = int(np.prod(entry["shape"])) if entry["shape"] else 1
            buf = fh.read(dt.itemsize * count)
            arrays[entry["name"]] = np.frombuffer(buf, dtype=dt).reshape(
                entry["shape"]).copy()
    return header["meta"], arrays
