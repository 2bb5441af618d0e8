"""FTL1 tile and FMK1 mask files, as documented by the host package.

Both formats are little-endian. A tile is the magic ``FTL1``, u32 width,
u32 height, u32 band count (always 3), then float32 values band-major,
row-major within each band. A mask is the magic ``FMK1``, u32 width, u32
height, then one byte per pixel, 0 or 1, row-major.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

TILE_MAGIC = b"FTL1"
MASK_MAGIC = b"FMK1"
TILE_BANDS = 3

_TILE_HEADER = struct.Struct("<4sIII")
_MASK_HEADER = struct.Struct("<4sII")


class FormatError(ValueError):
    """The file does not follow the documented binary layout."""


def _header(data: bytes, layout: struct.Struct, path: Path) -> tuple:
    if len(data) < layout.size:
        raise FormatError(f"{path}: file too short for a header")
    return layout.unpack_from(data)


def read_tile(path: str | Path) -> np.ndarray:
    """Read a tile file into a float32 array shaped (bands, height, width)."""
    path = Path(path)
    data = path.read_bytes()
    magic, width, height, bands = _header(data, _TILE_HEADER, path)
    if magic != TILE_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if bands != TILE_BANDS:
        raise FormatError(f"{path}: expected {TILE_BANDS} bands, file declares {bands}")
    if width < 1 or height < 1:
        raise FormatError(f"{path}: degenerate dimensions {width}x{height}")
    expected = _TILE_HEADER.size + bands * height * width * 4
    if len(data) != expected:
        raise FormatError(f"{path}: expected {expected} bytes, found {len(data)}")
    values = np.frombuffer(data, dtype="<f4", offset=_TILE_HEADER.size)
    return values.reshape(bands, height, width)


def write_tile(path: str | Path, bands: np.ndarray) -> None:
    bands = np.asarray(bands, dtype="<f4")
    if bands.ndim != 3 or bands.shape[0] != TILE_BANDS:
        raise FormatError(f"tile array must be ({TILE_BANDS}, height, width), got {bands.shape}")
    header = _TILE_HEADER.pack(TILE_MAGIC, bands.shape[2], bands.shape[1], TILE_BANDS)
    Path(path).write_bytes(header + bands.tobytes())


def read_mask(path: str | Path) -> np.ndarray:
    """Read a mask file into a uint8 array shaped (height, width)."""
    path = Path(path)
    data = path.read_bytes()
    magic, width, height = _header(data, _MASK_HEADER, path)
    if magic != MASK_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if width < 1 or height < 1:
        raise FormatError(f"{path}: degenerate dimensions {width}x{height}")
    expected = _MASK_HEADER.size + height * width
    if len(data) != expected:
        raise FormatError(f"{path}: expected {expected} bytes, found {len(data)}")
    values = np.frombuffer(data, dtype=np.uint8, offset=_MASK_HEADER.size)
    if (values > 1).any():
        raise FormatError(f"{path}: mask bytes must be 0 or 1")
    return values.reshape(height, width)


def write_mask(path: str | Path, mask: np.ndarray) -> None:
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise FormatError(f"mask array must be 2-D, got shape {mask.shape}")
    if mask.dtype != np.uint8:
        raise FormatError(f"mask array must be uint8, got {mask.dtype}")
    if (mask > 1).any():
        raise FormatError("mask values must be 0 or 1")
    header = _MASK_HEADER.pack(MASK_MAGIC, mask.shape[1], mask.shape[0])
    Path(path).write_bytes(header + mask.tobytes())
