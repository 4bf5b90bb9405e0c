"""Raster grid types: square pixel grids over a scene extent and binary maps.

Pixel convention: pixel (row r, col c) covers the square
``[c*mpp, (c+1)*mpp) x [r*mpp, (r+1)*mpp)`` in meters, with its center at
``((c + 0.5)*mpp, (r + 0.5)*mpp)``. Column index follows x, row index
follows y; row 0 sits at y = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError


@dataclass(frozen=True)
class GridSpec:
    width_px: int
    height_px: int
    side_m: float

    def __post_init__(self):
        if self.width_px != self.height_px:
            raise ValueError("grid must be square")
        if self.width_px < 16:
            raise ValueError("grid must be at least 16 px across")
        if not self.side_m > 0.0:
            raise ValueError("side_m must be positive")

    @property
    def meters_per_px(self) -> float:
        return self.side_m / self.width_px

    def pixel_centers(self) -> np.ndarray:
        """(h*w, 2) array of pixel-center coordinates in meters, row-major."""
        mpp = self.meters_per_px
        xs = (np.arange(self.width_px) + 0.5) * mpp
        ys = (np.arange(self.height_px) + 0.5) * mpp
        gx, gy = np.meshgrid(xs, ys)
        return np.stack([gx.ravel(), gy.ravel()], axis=1)

    @property
    def diagonal_m(self) -> float:
        return float(np.hypot(self.width_px, self.height_px) * self.meters_per_px)


@dataclass(frozen=True, eq=False)
class BinaryMap:
    """w x h occupancy raster; True marks building pixels."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=bool)
        if bits.ndim != 2 or bits.shape[0] < 1 or bits.shape[1] < 1:
            raise ValueError("bits must be a non-empty 2D array")
        bits = bits.copy()
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    @property
    def h(self) -> int:
        return int(self.bits.shape[0])

    @property
    def w(self) -> int:
        return int(self.bits.shape[1])

    def count(self) -> int:
        return int(self.bits.sum())

    def __eq__(self, other) -> bool:
        if not isinstance(other, BinaryMap):
            return NotImplemented
        return self.bits.shape == other.bits.shape and bool(
            (self.bits == other.bits).all()
        )

    def __hash__(self):
        return hash((self.bits.shape, self.bits.tobytes()))


def require_same_shape(a: BinaryMap, b: BinaryMap, what: str = "maps") -> None:
    if a.bits.shape != b.bits.shape:
        raise DimensionMismatchError(
            f"{what} differ in shape: {a.bits.shape} vs {b.bits.shape}"
        )


def pixels_near_segment(
    grid: GridSpec,
    ax: float,
    ay: float,
    bx: float,
    by: float,
    radius_m: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Indices (rows, cols) of pixels whose center lies within ``radius_m``
    of the segment (ax, ay)-(bx, by), by exact point-to-segment distance.

    Walks the major axis one pixel column/row per step; candidate rows per
    column come from the perpendicular band of the carrier line (a superset
    of the capsule), then the exact distance decides. Degenerate segments
    reduce to a disk around the point.
    """
    mpp = grid.meters_per_px
    h, w = grid.height_px, grid.width_px
    dx, dy = bx - ax, by - ay

    if abs(dx) >= abs(dy):
        lo, hi = min(ax, bx) - radius_m, max(ax, bx) + radius_m
        c0 = max(0, int(np.ceil(lo / mpp - 0.5)))
        c1 = min(w - 1, int(np.floor(hi / mpp - 0.5)))
        if c1 < c0:
            return np.zeros(0, np.int64), np.zeros(0, np.int64)
        cols = np.arange(c0, c1 + 1)
        xs = (cols + 0.5) * mpp
        if dx != 0.0:
            line = ay + (xs - ax) * (dy / dx)
            band = radius_m / abs(dx) * np.hypot(dx, dy)
        else:  # both components ~0: point
            line = np.full_like(xs, ay)
            band = radius_m
        k = int(np.ceil(band / mpp)) + 1
        base = np.round(line / mpp - 0.5).astype(np.int64)
        offs = np.arange(-k, k + 1)
        rows = base[:, None] + offs[None, :]
        cols2 = np.broadcast_to(cols[:, None], rows.shape)
    else:
        lo, hi = min(ay, by) - radius_m, max(ay, by) + radius_m
        r0 = max(0, int(np.ceil(lo / mpp - 0.5)))
        r1 = min(h - 1, int(np.floor(hi / mpp - 0.5)))
        if r1 < r0:
            return np.zeros(0, np.int64), np.zeros(0, np.int64)
        rws = np.arange(r0, r1 + 1)
        ys = (rws + 0.5) * mpp
        line = ax + (ys - ay) * (dx / dy)
        band = radius_m / abs(dy) * np.hypot(dx, dy)
        k = int(np.ceil(band / mpp)) + 1
        base = np.round(line / mpp - 0.5).astype(np.int64)
        offs = np.arange(-k, k + 1)
        cols2 = base[:, None] + offs[None, :]
        rows = np.broadcast_to(rws[:, None], cols2.shape)

    xs2 = (cols2 + 0.5) * mpp
    ys2 = (rows + 0.5) * mpp
    valid = (rows >= 0) & (rows < h) & (cols2 >= 0) & (cols2 < w)

    dd = dx * dx + dy * dy
    if dd == 0.0:
        d2 = (xs2 - ax) ** 2 + (ys2 - ay) ** 2
    else:
        t = np.clip(((xs2 - ax) * dx + (ys2 - ay) * dy) / dd, 0.0, 1.0)
        d2 = (xs2 - (ax + t * dx)) ** 2 + (ys2 - (ay + t * dy)) ** 2
    hit = valid & (d2 <= radius_m * radius_m)
    return rows[hit], cols2[hit]
