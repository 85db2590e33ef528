"""Binary persistence for channel data and volumes, plus PGM and CSV export.

Both binary formats are little-endian with fixed-width headers and a
trailing CRC-32 (of every preceding byte) so corruption is detectable from
any language without a schema.

Channel data ("RCRF"):
    magic 4s | version u16 | state u8 (0 encoded, 1 decoded) | reserved u8
    | planes u32 | transmits u32 | channels u32 | samples u32
    | sampling_rate f64 | payload float32, sample index fastest | crc32 u32

Volumes ("RCBV"):
    magic 4s | version u16 | reserved u16 | x0 y0 z0 f64 | dx dy dz f64
    | nx ny nz u32 | payload float32, x index fastest | crc32 u32
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np

from .beamform import ImageGrid
from .encoding import DECODED, ENCODED, RfDataSet

__all__ = [
    "FileFormatError",
    "write_rf_file",
    "read_rf_file",
    "write_volume_file",
    "read_volume_file",
    "write_pgm",
    "write_csv",
]

RF_MAGIC = b"RCRF"
VOLUME_MAGIC = b"RCBV"
FORMAT_VERSION = 1

_RF_HEADER = struct.Struct("<4sHBBIIIId")
_VOL_HEADER = struct.Struct("<4sHHddddddIII")
_CRC = struct.Struct("<I")


class FileFormatError(ValueError):
    """Raised for malformed, truncated, or corrupted files."""


def _check_dims(shape):
    if min(shape) < 1:
        raise FileFormatError(f"zero-sized dimension in shape {tuple(shape)}")


def write_rf_file(path, rf: RfDataSet) -> None:
    """Persist a dataset; payload is float32, CRC over header plus payload."""
    _check_dims(rf.data.shape)
    p, t, c, n = rf.data.shape
    state_flag = 0 if rf.state == ENCODED else 1
    header = _RF_HEADER.pack(
        RF_MAGIC, FORMAT_VERSION, state_flag, 0, p, t, c, n, rf.sampling_rate
    )
    payload = np.ascontiguousarray(rf.data, dtype="<f4").tobytes()
    crc = zlib.crc32(payload, zlib.crc32(header))
    Path(path).write_bytes(header + payload + _CRC.pack(crc))


def read_rf_file(path) -> RfDataSet:
    """Read a dataset written by :func:`write_rf_file`.

    The float32 payload is widened back to float64 in memory; writing it
    out again reproduces the file byte for byte.
    """
    raw = Path(path).read_bytes()
    if len(raw) < _RF_HEADER.size + _CRC.size:
        raise FileFormatError(f"truncated file: {len(raw)} bytes")
    magic, version, state_flag, _, p, t, c, n, fs = _RF_HEADER.unpack_from(raw)
    if magic != RF_MAGIC:
        raise FileFormatError(f"bad magic {magic!r}, expected {RF_MAGIC!r}")
    if version != FORMAT_VERSION:
        raise FileFormatError(f"unsupported version {version}")
    if state_flag not in (0, 1):
        raise FileFormatError(f"invalid state flag {state_flag}")
    expected = _RF_HEADER.size + p * t * c * n * 4 + _CRC.size
    if len(raw) != expected:
        raise FileFormatError(
            f"truncated file: {len(raw)} bytes, header implies {expected}"
        )
    (stored,) = _CRC.unpack_from(raw, len(raw) - _CRC.size)
    if zlib.crc32(raw[: -_CRC.size]) != stored:
        raise FileFormatError("CRC mismatch")
    data = (
        np.frombuffer(raw, dtype="<f4", count=p * t * c * n, offset=_RF_HEADER.size)
        .reshape(p, t, c, n)
        .astype(np.float64)
    )
    return RfDataSet(data, fs, state=ENCODED if state_flag == 0 else DECODED)


def write_volume_file(path, grid: ImageGrid, values: np.ndarray) -> None:
    """Persist one scalar field sampled on ``grid`` (x index fastest)."""
    v = np.asarray(values)
    if v.shape != (grid.nx, grid.ny, grid.nz):
        raise FileFormatError(
            f"values shape {v.shape} does not match grid "
            f"({grid.nx}, {grid.ny}, {grid.nz})"
        )
    _check_dims(v.shape)
    header = _VOL_HEADER.pack(
        VOLUME_MAGIC,
        FORMAT_VERSION,
        0,
        grid.x0,
        grid.y0,
        grid.z0,
        grid.dx,
        grid.dy,
        grid.dz,
        grid.nx,
        grid.ny,
        grid.nz,
    )
    payload = np.asfortranarray(v.astype("<f4")).tobytes(order="F")
    crc = zlib.crc32(payload, zlib.crc32(header))
    Path(path).write_bytes(header + payload + _CRC.pack(crc))


def read_volume_file(path) -> tuple[ImageGrid, np.ndarray]:
    raw = Path(path).read_bytes()
    if len(raw) < _VOL_HEADER.size + _CRC.size:
        raise FileFormatError(f"truncated file: {len(raw)} bytes")
    magic, version, _, x0, y0, z0, dx, dy, dz, nx, ny, nz = _VOL_HEADER.unpack_from(raw)
    if magic != VOLUME_MAGIC:
        raise FileFormatError(f"bad magic {magic!r}, expected {VOLUME_MAGIC!r}")
    if version != FORMAT_VERSION:
        raise FileFormatError(f"unsupported version {version}")
    expected = _VOL_HEADER.size + nx * ny * nz * 4 + _CRC.size
    if len(raw) != expected:
        raise FileFormatError(
            f"truncated file: {len(raw)} bytes, header implies {expected}"
        )
    (stored,) = _CRC.unpack_from(raw, len(raw) - _CRC.size)
    if zlib.crc32(raw[: -_CRC.size]) != stored:
        raise FileFormatError("CRC mismatch")
    grid = ImageGrid(x0, y0, z0, dx, dy, dz, nx, ny, nz)
    values = np.frombuffer(
        raw, dtype="<f4", count=nx * ny * nz, offset=_VOL_HEADER.size
    ).reshape((nx, ny, nz), order="F").astype(np.float64)
    return grid, values


def write_pgm(path, db_image: np.ndarray, dynamic_range_db: float) -> None:
    """8-bit binary graymap of a dB image.

    Rows are the first axis. The dB window [-dynamic_range_db, 0] maps
    linearly to [0, 255]; the window is recorded in a comment line.
    """
    img = np.asarray(db_image, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError(f"expected a 2-D image, got shape {img.shape}")
    if dynamic_range_db <= 0:
        raise ValueError("dynamic_range_db must be positive")
    scaled = (img + dynamic_range_db) / dynamic_range_db * 255.0
    gray = np.clip(np.rint(scaled), 0, 255).astype(np.uint8)
    rows, cols = gray.shape
    header = (
        f"P5\n# dB window [{-dynamic_range_db:g}, 0] mapped to [0, 255]\n"
        f"{cols} {rows}\n255\n"
    )
    Path(path).write_bytes(header.encode("ascii") + gray.tobytes())


def _format_cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path, header, rows) -> None:
    """Plain CSV: header row then data rows, '.' decimal separator, floats
    via shortest round-trip repr."""
    lines = [",".join(str(h) for h in header)]
    for row in rows:
        lines.append(",".join(_format_cell(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")
