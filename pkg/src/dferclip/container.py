"""Binary container shared by checkpoints and clip files.

Layout (all integers little-endian)::

    magic        4 bytes   b"DFCL"
    version      u32
    json_len     u32
    json         json_len bytes, UTF-8 metadata
    blobs until EOF, each:
        name_len u32, name (UTF-8), rank u32, rank x u64 extents,
        prod(extents) x float64 (little-endian)
"""

from __future__ import annotations

import io
import json
import struct
from pathlib import Path

import numpy as np

from .errors import DataError

MAGIC = b"DFCL"
VERSION = 1
_F64 = np.dtype("<f8")


def dumps(meta: dict, blobs: dict[str, np.ndarray]) -> bytes:
    buf = io.BytesIO()
    header = json.dumps(meta, sort_keys=True).encode("utf-8")
    buf.write(MAGIC)
    buf.write(struct.pack("<II", VERSION, len(header)))
    buf.write(header)
    for name, arr in blobs.items():
        arr = np.asarray(arr, dtype=_F64)  # ascontiguousarray would promote 0-d to 1-d
        raw = name.encode("utf-8")
        buf.write(struct.pack("<I", len(raw)))
        buf.write(raw)
        buf.write(struct.pack("<I", arr.ndim))
        buf.write(struct.pack(f"<{arr.ndim}Q", *arr.shape))
        buf.write(arr.tobytes(order="C"))
    return buf.getvalue()


class _Reader:
    def __init__(self, data: bytes, source: str):
        self.data = data
        self.pos = 0
        self.source = source

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.data):
            raise DataError(
                f"{self.source}: truncated at byte offset {len(self.data)} while reading {what} "
                f"(needed {n} bytes at offset {self.pos})"
            )
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def u32(self, what: str) -> int:
        return struct.unpack("<I", self.take(4, what))[0]


def loads(data: bytes, source: str = "<bytes>") -> tuple[dict, dict[str, np.ndarray]]:
    r = _Reader(data, source)
    magic = r.take(4, "magic")
    if magic != MAGIC:
        raise DataError(f"{source}: bad magic {magic!r} at byte offset 0")
    version = r.u32("version")
    if version != VERSION:
        raise DataError(f"{source}: unsupported container version {version}")
    n = r.u32("header length")
    try:
        meta = json.loads(r.take(n, "header").decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DataError(f"{source}: malformed header JSON ({exc})") from exc
    blobs: dict[str, np.ndarray] = {}
    while r.pos < len(data):
        start = r.pos
        name = r.take(r.u32("blob name length"), "blob name").decode("utf-8")
        rank = r.u32(f"rank of {name!r}")
        shape = struct.unpack(f"<{rank}Q", r.take(8 * rank, f"extents of {name!r}"))
        count = int(np.prod(shape)) if rank else 1
        raw = r.take(8 * count, f"data of {name!r} (blob starts at offset {start})")
        blobs[name] = np.frombuffer(raw, dtype=_F64).reshape(shape).astype(np.float64)
    return meta, blobs


def write(path: str | Path, meta: dict, blobs: dict[str, np.ndarray]) -> None:
    path = Path(path)
    try:
        path.write_bytes(dumps(meta, blobs))
    except OSError as exc:
        raise OSError(f"{path}: cannot write container ({exc})") from exc


def read(path: str | Path) -> tuple[dict, dict[str, np.ndarray]]:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise DataError(f"{path}: cannot read ({exc})") from exc
    return loads(data, str(path))
