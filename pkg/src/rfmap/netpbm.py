"""Minimal netpbm I/O: binary PBM (P4), PGM (P5, maxval 255), PPM (P6).

Writers emit a canonical byte layout (single-space header, one newline
before the raster, zero padding bits in P4 rows) so save -> load -> save
is byte-identical.
"""

from __future__ import annotations

import numpy as np

from .errors import CorruptFormatError


def _header(magic: bytes, w: int, h: int, maxval: int | None) -> bytes:
    head = magic + b"\n" + f"{w} {h}".encode() + b"\n"
    if maxval is not None:
        head += f"{maxval}".encode() + b"\n"
    return head


def _parse_header(data: bytes, magic: bytes, n_fields: int) -> tuple[list[int], int]:
    """Parse 'magic' + n_fields whitespace-separated ints; returns (fields, offset)."""
    if not data.startswith(magic):
        raise CorruptFormatError(f"expected magic {magic!r}")
    pos = len(magic)
    fields: list[int] = []
    while len(fields) < n_fields:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise CorruptFormatError("truncated netpbm header")
        try:
            fields.append(int(data[start:pos]))
        except ValueError as e:
            raise CorruptFormatError(f"bad netpbm header token: {e}") from e
    return fields, pos + 1  # single whitespace byte separates header from raster


def write_pbm(path, bits: np.ndarray) -> None:
    bits = np.asarray(bits, dtype=bool)
    h, w = bits.shape
    packed = np.packbits(bits, axis=1)
    with open(path, "wb") as f:
        f.write(_header(b"P4", w, h, None))
        f.write(packed.tobytes())


def read_pbm(path) -> np.ndarray:
    with open(path, "rb") as f:
        data = f.read()
    (w, h), off = _parse_header(data, b"P4", 2)
    row_bytes = (w + 7) // 8
    expected = row_bytes * h
    raster = data[off:]
    if len(raster) != expected:
        raise CorruptFormatError(
            f"PBM raster size mismatch: expected {expected} bytes, got {len(raster)}"
        )
    rows = np.frombuffer(raster, dtype=np.uint8).reshape(h, row_bytes)
    return np.unpackbits(rows, axis=1)[:, :w].astype(bool)


def write_pgm(path, gray: np.ndarray) -> None:
    gray = np.asarray(gray, dtype=np.uint8)
    h, w = gray.shape
    with open(path, "wb") as f:
        f.write(_header(b"P5", w, h, 255))
        f.write(gray.tobytes())


def read_pgm(path) -> np.ndarray:
    with open(path, "rb") as f:
        data = f.read()
    (w, h, maxval), off = _parse_header(data, b"P5", 3)
    if maxval != 255:
        raise CorruptFormatError(f"unsupported PGM maxval {maxval}")
    raster = data[off:]
    if len(raster) != w * h:
        raise CorruptFormatError(
            f"PGM raster size mismatch: expected {w * h} bytes, got {len(raster)}"
        )
    return np.frombuffer(raster, dtype=np.uint8).reshape(h, w).copy()


def write_ppm(path, rgb: np.ndarray) -> None:
    rgb = np.asarray(rgb, dtype=np.uint8)
    h, w, ch = rgb.shape
    if ch != 3:
        raise ValueError("PPM needs an (h, w, 3) array")
    with open(path, "wb") as f:
        f.write(_header(b"P6", w, h, 255))
        f.write(rgb.tobytes())


def read_ppm(path) -> np.ndarray:
    with open(path, "rb") as f:
        data = f.read()
    (w, h, maxval), off = _parse_header(data, b"P6", 3)
    if maxval != 255:
        raise CorruptFormatError(f"unsupported PPM maxval {maxval}")
    raster = data[off:]
    if len(raster) != 3 * w * h:
        raise CorruptFormatError(
            f"PPM raster size mismatch: expected {3 * w * h} bytes, got {len(raster)}"
        )
    return np.frombuffer(raster, dtype=np.uint8).reshape(h, w, 3).copy()
