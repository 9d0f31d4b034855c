"""Readers/writers for the planner's wire formats.

VMAP1: text occupancy map. Line 1 "VMAP1", line 2 "<width> <height>", then
height rows of digits 0..3 (0 free, 1 obstacle, 2 start, 3 goal), row 0 top.

VGM1: binary guidance raster. Magic "VGM1", u32 width, u32 height
(little-endian), then width*height float32 values in [0, 1], row-major.
"""

from __future__ import annotations

import struct

import numpy as np


class FormatError(Exception):
    """Malformed VMAP1/VGM1 content."""


class ShapeMismatch(Exception):
    """Map dimensions the model cannot process."""


def read_vmap1(data: bytes) -> np.ndarray:
    """Class grid as uint8 (height, width)."""
    try:
        lines = data.decode("ascii").splitlines()
    except UnicodeDecodeError as exc:
        raise FormatError(f"map is not ASCII: {exc}") from None
    if not lines or lines[0] != "VMAP1":
        raise FormatError("bad VMAP1 magic")
    try:
        width, height = (int(p) for p in lines[1].split())
    except (IndexError, ValueError):
        raise FormatError("bad VMAP1 dimension line") from None
    rows = lines[2:]
    if len(rows) != height:
        raise FormatError(f"expected {height} rows, found {len(rows)}")
    grid = np.zeros((height, width), dtype=np.uint8)
    for y, row in enumerate(rows):
        if len(row) != width or any(c not in "0123" for c in row):
            raise FormatError(f"bad row {y}")
        grid[y] = np.frombuffer(row.encode("ascii"), dtype=np.uint8) - ord("0")
    if np.count_nonzero(grid == 2) != 1 or np.count_nonzero(grid == 3) != 1:
        raise FormatError("map must carry exactly one start (2) and one goal (3)")
    return grid


def load_vmap1(path) -> np.ndarray:
    with open(path, "rb") as fh:
        return read_vmap1(fh.read())


def read_vgm1(data: bytes) -> np.ndarray:
    """Raster as float32 (height, width), values in [0, 1]."""
    if len(data) < 12:
        raise FormatError("VGM1 shorter than its header")
    magic, width, height = struct.unpack_from("<4sII", data, 0)
    if magic != b"VGM1":
        raise FormatError(f"bad VGM1 magic {magic!r}")
    if width == 0 or height == 0 or len(data) - 12 != width * height * 4:
        raise FormatError("VGM1 payload does not match its dimensions")
    values = np.frombuffer(data, dtype="<f4", offset=12).reshape(height, width)
    if not np.all(np.isfinite(values)) or values.min() < 0.0 or values.max() > 1.0:
        raise FormatError("VGM1 values must be finite and in [0, 1]")
    return values.copy()


def load_vgm1(path) -> np.ndarray:
    with open(path, "rb") as fh:
        return read_vgm1(fh.read())


def write_vgm1(values: np.ndarray) -> bytes:
    values = np.ascontiguousarray(values, dtype="<f4")
    if values.ndim != 2:
        raise FormatError("VGM1 rasters are 2-D")
    if not np.all(np.isfinite(values)) or values.min() < 0.0 or values.max() > 1.0:
        raise FormatError("VGM1 values must be finite and in [0, 1]")
    h, w = values.shape
    return struct.pack("<4sII", b"VGM1", w, h) + values.tobytes()


def save_vgm1(values: np.ndarray, path) -> None:
    with open(path, "wb") as fh:
        fh.write(write_vgm1(values))
