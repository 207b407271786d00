"""Binary per-utterance feature container.

Layout (little-endian):

    bytes 0-7    magic "UMELFEAT"
    u16          format version (currently 1)
    u16          n_mels
    u32          T (frame count)
    f32          utterance mean (of the unnormalized log-mels)
    f32          utterance std
    f32 * n*T    normalized log-mel matrix, row-major (band-major)

The stored matrix is the normalized one the generator consumes; mean/std
let consumers reconstruct the unnormalized features.
"""

from __future__ import annotations

import struct

import numpy as np

from ..errors import FileFormatError, InvalidInputError
from .spectral import MelSpectrogram

MAGIC = b"UMELFEAT"
VERSION = 1
_HEADER = struct.Struct("<8sHHIff")


def write_feature_file(path, mel: MelSpectrogram) -> None:
    """Serialize a normalized MelSpectrogram."""
    if not mel.normalized or mel.mean is None or mel.std is None:
        raise InvalidInputError("feature files store normalized mel spectrograms")
    header = _HEADER.pack(
        MAGIC, VERSION, mel.n_mels, mel.frames, float(mel.mean), float(mel.std)
    )
    data = np.ascontiguousarray(mel.values, dtype="<f4")
    with open(path, "wb") as f:
        f.write(header)
        f.write(data.tobytes())


def read_feature_file(path) -> MelSpectrogram:
    with open(path, "rb") as f:
        raw = f.read(_HEADER.size)
        if len(raw) < _HEADER.size:
            raise FileFormatError(f"{path}: truncated header")
        magic, version, n_mels, frames, mean, std = _HEADER.unpack(raw)
        if magic != MAGIC:
            raise FileFormatError(f"{path}: bad magic {magic!r}")
        if version != VERSION:
            raise FileFormatError(f"{path}: unsupported version {version}")
        payload = f.read(4 * n_mels * frames + 1)
    if len(payload) != 4 * n_mels * frames:
        raise FileFormatError(
            f"{path}: expected {4 * n_mels * frames} data bytes, got {len(payload)}"
        )
    values = np.frombuffer(payload, dtype="<f4").reshape(n_mels, frames)
    return MelSpectrogram(
        values.astype(np.float64), mean=float(mean), std=float(std), normalized=True
    )


def peek_frames(path) -> int:
    """Frame count from the header alone (manifest validation)."""
    with open(path, "rb") as f:
        raw = f.read(_HEADER.size)
    if len(raw) < _HEADER.size:
        raise FileFormatError(f"{path}: truncated header")
    magic, version, _, frames, _, _ = _HEADER.unpack(raw)
    if magic != MAGIC:
        raise FileFormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FileFormatError(f"{path}: unsupported version {version}")
    return int(frames)
