"""On-disk binary format for feature stacks.

Layout (little-endian, 16-byte header):
    magic "LDRF" | u16 version | u16 channels | u32 height | u32 width
followed by the row-major float32 payload (channels * height * width values).
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import DecodeError
from .tensor_core import check_tensor

FEATURE_MAGIC = b"LDRF"
FEATURE_VERSION = 1
_HEADER = struct.Struct("<4sHHII")


def save_feature_stack(path, stack) -> None:
    """Write a (C, H, W) float32 feature stack."""
    arr = check_tensor(stack, "feature stack")
    c, h, w = arr.shape
    with open(path, "wb") as f:
        f.write(_HEADER.pack(FEATURE_MAGIC, FEATURE_VERSION, c, h, w))
        f.write(arr.astype("<f4").tobytes())


def load_feature_stack(path) -> np.ndarray:
    """Read a feature stack written by ``save_feature_stack``."""
    with open(path, "rb") as f:
        header = f.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise DecodeError(f"feature file {path} truncated header")
        magic, version, c, h, w = _HEADER.unpack(header)
        if magic != FEATURE_MAGIC:
            raise DecodeError(f"{path} is not a feature file (magic {magic!r})")
        if version != FEATURE_VERSION:
            raise DecodeError(f"unsupported feature file version {version}")
        payload = f.read(4 * c * h * w)
        if len(payload) != 4 * c * h * w:
            raise DecodeError(f"feature file {path} truncated payload")
        if f.read(1):
            raise DecodeError(f"trailing bytes in feature file {path}")
    return np.frombuffer(payload, dtype="<f4").reshape(c, h, w).astype(np.float32)
