"""Binary container for persisted matrices.

Layout (all integers little-endian):

    magic   4 bytes  b"GKMX"
    version u16
    rows    u32
    cols    u32
    payload rows*cols float64, row-major, little-endian IEEE-754
    crc32   u32 of the payload

Round-trips are bit-exact; any structural damage raises
:class:`DataError` naming the file.
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np

from .errors import DataError

__all__ = ["read_matrix", "write_matrix"]

MAGIC = b"GKMX"
VERSION = 1
_HEADER = struct.Struct("<4sHII")


def write_matrix(path, m) -> None:
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"only 2-d matrices are persisted, got shape {m.shape}")
    payload = np.ascontiguousarray(m, dtype="<f8").tobytes()
    blob = (
        _HEADER.pack(MAGIC, VERSION, m.shape[0], m.shape[1])
        + payload
        + struct.pack("<I", zlib.crc32(payload))
    )
    Path(path).write_bytes(blob)


def read_matrix(path) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"{path}: matrix file not found")
    blob = path.read_bytes()
    if len(blob) < _HEADER.size:
        raise DataError(f"{path}: truncated header ({len(blob)} bytes)")
    magic, version, rows, cols = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise DataError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise DataError(f"{path}: unsupported format version {version}, expected {VERSION}")
    expected = _HEADER.size + rows * cols * 8 + 4
    if len(blob) != expected:
        raise DataError(f"{path}: truncated file ({len(blob)} bytes, expected {expected})")
    payload = blob[_HEADER.size : -4]
    (crc,) = struct.unpack("<I", blob[-4:])
    if zlib.crc32(payload) != crc:
        raise DataError(f"{path}: payload checksum mismatch")
    m = np.frombuffer(payload, dtype="<f8").reshape(rows, cols).astype(np.float64)
    m.flags.writeable = False
    return m
