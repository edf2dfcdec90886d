"""GTT1 binary tensor files.

Layout: 4-byte ASCII magic "GTT1"; u8 rank; rank x u32 little-endian dims;
payload of 32-bit little-endian IEEE-754 floats in row-major order.
Used for video, flow, and perturbation I/O.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"GTT1"


class Gtt1Error(ValueError):
    pass


def write_tensor(path: str | Path, tensor: np.ndarray) -> None:
    arr = np.ascontiguousarray(tensor, dtype="<f4")
    if arr.ndim < 1 or arr.ndim > 255:
        raise Gtt1Error(f"unsupported rank {arr.ndim}")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("B", arr.ndim))
        f.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
        f.write(arr.tobytes(order="C"))


def read_tensor(path: str | Path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise Gtt1Error(f"{path}: bad magic {raw[:4]!r}")
    if len(raw) < 5:
        raise Gtt1Error(f"{path}: truncated header")
    rank = raw[4]
    header_end = 5 + 4 * rank
    if len(raw) < header_end:
        raise Gtt1Error(f"{path}: truncated dims")
    dims = struct.unpack(f"<{rank}I", raw[5:header_end])
    count = int(np.prod(dims)) if rank else 0
    payload = raw[header_end:]
    if len(payload) != 4 * count:
        raise Gtt1Error(f"{path}: payload is {len(payload)} bytes, expected {4 * count}")
    return np.frombuffer(payload, dtype="<f4").reshape(dims).astype(np.float64)
