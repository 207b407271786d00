"""Single-file binary checkpoint container.

Layout (little-endian):

    bytes 0-7   magic "UMELCKPT"
    u16         format version (currently 1)
    u32         metadata length, then that many bytes of canonical JSON
    u32         array count, then per array:
                  u16 name length, name (utf-8)
                  u8 dtype length, numpy dtype string (e.g. "<f4")
                  u8 ndim, u32 per dimension
                  u64 payload bytes, then the raw row-major data

Arrays are written sorted by name and the JSON uses sorted keys, so
save -> load -> save is byte-identical.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .errors import FileFormatError

MAGIC = b"UMELCKPT"
VERSION = 1


def write_checkpoint(path, meta: dict, arrays: dict[str, np.ndarray]) -> None:
    meta_bytes = json.dumps(meta, sort_keys=True, separators=(",", ":")).encode()
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<H", VERSION))
        f.write(struct.pack("<I", len(meta_bytes)))
        f.write(meta_bytes)
        f.write(struct.pack("<I", len(arrays)))
        for name in sorted(arrays):
            arr = np.asarray(arrays[name])  # tobytes() serializes in C order
            name_b = name.encode()
            dtype_b = arr.dtype.str.encode()
            f.write(struct.pack("<H", len(name_b)))
            f.write(name_b)
            f.write(struct.pack("<B", len(dtype_b)))
            f.write(dtype_b)
            f.write(struct.pack("<B", arr.ndim))
            for dim in arr.shape:
                f.write(struct.pack("<I", dim))
            payload = arr.tobytes()
            f.write(struct.pack("<Q", len(payload)))
            f.write(payload)


def _read_exact(f, n: int, path, what: str) -> bytes:
    raw = f.read(n)
    if len(raw) != n:
        raise FileFormatError(f"{path}: truncated while reading {what}")
    return raw


def read_checkpoint(path) -> tuple[dict, dict[str, np.ndarray]]:
    with open(path, "rb") as f:
        magic = _read_exact(f, 8, path, "magic")
        if magic != MAGIC:
            raise FileFormatError(f"{path}: bad magic {magic!r}")
        (version,) = struct.unpack("<H", _read_exact(f, 2, path, "version"))
        if version != VERSION:
            raise FileFormatError(
                f"{path}: unsupported checkpoint version {version} (expected {VERSION})"
            )
        (meta_len,) = struct.unpack("<I", _read_exact(f, 4, path, "meta length"))
        try:
            meta = json.loads(_read_exact(f, meta_len, path, "metadata"))
        except json.JSONDecodeError as e:
            raise FileFormatError(f"{path}: corrupt metadata: {e}") from e
        (count,) = struct.unpack("<I", _read_exact(f, 4, path, "array count"))
        arrays: dict[str, np.ndarray] = {}
        for _ in range(count):
            (name_len,) = struct.unpack("<H", _read_exact(f, 2, path, "array name"))
            name = _read_exact(f, name_len, path, "array name").decode()
            (dtype_len,) = struct.unpack("<B", _read_exact(f, 1, path, "dtype"))
            dtype = np.dtype(_read_exact(f, dtype_len, path, "dtype").decode())
            (ndim,) = struct.unpack("<B", _read_exact(f, 1, path, "ndim"))
            shape = tuple(
                struct.unpack("<I", _read_exact(f, 4, path, "shape"))[0]
                for _ in range(ndim)
            )
            (nbytes,) = struct.unpack("<Q", _read_exact(f, 8, path, f"data of {name}"))
            payload = _read_exact(f, nbytes, path, f"data of {name}")
            arrays[name] = np.frombuffer(payload, dtype=dtype).reshape(shape).copy()
        if f.read(1):
            raise FileFormatError(f"{path}: trailing bytes after last array")
    return meta, arrays
