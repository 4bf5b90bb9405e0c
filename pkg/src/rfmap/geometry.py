"""Exact 2D primitives shared by every other module.

Conventions, used everywhere in the toolkit:

* angles are radians, measured counter-clockwise from the +x axis and
  normalized to ``[0, 2*pi)``;
* geometric predicates use an absolute tolerance of 1e-9 m (``TOL``);
  scene extents stay well below 1 km, so doubles leave ~1e-10 m of slack;
* polygon boundaries do not block visibility: all blocking tests are
  against the *open* interior, so tangency at an edge or corner is free.

Scalar predicates here are plain-Python reference implementations;
:class:`PolygonSet` provides the vectorized equivalents used in hot loops.
The two are cross-checked in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

TOL = 1e-9
TWO_PI = 2.0 * math.pi

# Relative threshold below which a 2x2 cross-product determinant is treated
# as parallel.
_PARALLEL_EPS = 1e-12


def normalize_angle(theta: float) -> float:
    """Map an angle in radians to ``[0, 2*pi)``."""
    r = math.fmod(theta, TWO_PI)
    if r < 0.0:
        r += TWO_PI
    if r >= TWO_PI:  # fmod rounding can land exactly on 2*pi
        r = 0.0
    return r


def angle_gap(a: float, b: float) -> float:
    """Smallest absolute angular difference, accounting for wrap-around."""
    d = abs(normalize_angle(a) - normalize_angle(b))
    return min(d, TWO_PI - d)


@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite coordinates ({self.x}, {self.y})")

    def dist(self, other: "Point2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=np.float64)


@dataclass(frozen=True)
class Segment:
    a: Point2
    b: Point2

    def __post_init__(self):
        if self.a == self.b:
            raise ValueError("degenerate segment: endpoints coincide")

    @property
    def length(self) -> float:
        return self.a.dist(self.b)

    def point_at(self, t: float) -> Point2:
        return Point2(
            self.a.x + t * (self.b.x - self.a.x),
            self.a.y + t * (self.b.y - self.a.y),
        )


@dataclass(frozen=True)
class Ray:
    origin: Point2
    angle: float  # normalized to [0, 2*pi) on construction

    def __post_init__(self):
        if not math.isfinite(self.angle):
            raise ValueError("non-finite ray angle")
        object.__setattr__(self, "angle", normalize_angle(self.angle))

    @property
    def direction(self) -> tuple[float, float]:
        return (math.cos(self.angle), math.sin(self.angle))


def _cross(ox: float, oy: float, px: float, py: float) -> float:
    return ox * py - oy * px


def _point_segment_dist_sq(
    px: float, py: float, ax: float, ay: float, bx: float, by: float
) -> float:
    ex, ey = bx - ax, by - ay
    dd = ex * ex + ey * ey
    if dd == 0.0:
        dx, dy = px - ax, py - ay
        return dx * dx + dy * dy
    t = ((px - ax) * ex + (py - ay) * ey) / dd
    t = min(1.0, max(0.0, t))
    cx, cy = ax + t * ex, ay + t * ey
    dx, dy = px - cx, py - cy
    return dx * dx + dy * dy


def _segments_min_dist_sq(
    a1: Point2, b1: Point2, a2: Point2, b2: Point2
) -> float:
    # Proper crossing => distance zero.
    d1 = _cross(b1.x - a1.x, b1.y - a1.y, a2.x - a1.x, a2.y - a1.y)
    d2 = _cross(b1.x - a1.x, b1.y - a1.y, b2.x - a1.x, b2.y - a1.y)
    d3 = _cross(b2.x - a2.x, b2.y - a2.y, a1.x - a2.x, a1.y - a2.y)
    d4 = _cross(b2.x - a2.x, b2.y - a2.y, b1.x - a2.x, b1.y - a2.y)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)):
        return 0.0
    return min(
        _point_segment_dist_sq(a1.x, a1.y, a2.x, a2.y, b2.x, b2.y),
        _point_segment_dist_sq(b1.x, b1.y, a2.x, a2.y, b2.x, b2.y),
        _point_segment_dist_sq(a2.x, a2.y, a1.x, a1.y, b1.x, b1.y),
        _point_segment_dist_sq(b2.x, b2.y, a1.x, a1.y, b1.x, b1.y),
    )


@dataclass(frozen=True)
class SimplePolygon:
    """Simple polygon with counter-clockwise vertices and positive area."""

    vertices: tuple[Point2, ...]

    def __post_init__(self):
        vs = tuple(self.vertices)
        object.__setattr__(self, "vertices", vs)
        n = len(vs)
        if n < 3:
            raise ValueError("polygon needs at least 3 vertices")
        for i in range(n):
            if vs[i].dist(vs[(i + 1) % n]) <= TOL:
                raise ValueError("polygon has a (near) zero-length edge")
        if self.signed_area() <= 0.0:
            raise ValueError("polygon must be counter-clockwise (positive area)")
        self._check_simple()

    def signed_area(self) -> float:
        vs = self.vertices
        s = 0.0
        for i, p in enumerate(vs):
            q = vs[(i + 1) % len(vs)]
            s += p.x * q.y - q.x * p.y
        return 0.5 * s

    def _check_simple(self) -> None:
        vs = self.vertices
        n = len(vs)
        for i in range(n):
            a1, b1 = vs[i], vs[(i + 1) % n]
            for j in range(i + 1, n):
                adjacent = (j == i + 1) or (i == 0 and j == n - 1)
                a2, b2 = vs[j], vs[(j + 1) % n]
                if adjacent:
                    # Shared vertex is fine; a fold-back spike is not.
                    ux, uy = b1.x - a1.x, b1.y - a1.y
                    wx, wy = b2.x - a2.x, b2.y - a2.y
                    if abs(_cross(ux, uy, wx, wy)) <= TOL * math.hypot(ux, uy) * math.hypot(wx, wy):
                        if ux * wx + uy * wy < 0.0:
                            raise ValueError("polygon folds back on itself")
                    continue
                if _segments_min_dist_sq(a1, b1, a2, b2) <= TOL * TOL:
                    raise ValueError("polygon is self-intersecting")

    @cached_property
    def points(self) -> np.ndarray:
        """Vertices as an (n, 2) float64 array."""
        return np.array([[p.x, p.y] for p in self.vertices], dtype=np.float64)

    @cached_property
    def bbox(self) -> tuple[float, float, float, float]:
        pts = self.points
        return (
            float(pts[:, 0].min()),
            float(pts[:, 1].min()),
            float(pts[:, 0].max()),
            float(pts[:, 1].max()),
        )

    def edges(self) -> tuple[Segment, ...]:
        vs = self.vertices
        return tuple(
            Segment(vs[i], vs[(i + 1) % len(vs)]) for i in range(len(vs))
        )

    def on_boundary(self, p: Point2, tol: float = TOL) -> bool:
        vs = self.vertices
        n = len(vs)
        t2 = tol * tol
        for i in range(n):
            a, b = vs[i], vs[(i + 1) % n]
            if _point_segment_dist_sq(p.x, p.y, a.x, a.y, b.x, b.y) <= t2:
                return True
        return False

    def _crossing_parity(self, p: Point2) -> bool:
        vs = self.vertices
        n = len(vs)
        inside = False
        for i in range(n):
            a, b = vs[i], vs[(i + 1) % n]
            if (a.y > p.y) != (b.y > p.y):
                xint = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y)
                if p.x < xint:
                    inside = not inside
        return inside

    def contains_strict(self, p: Point2) -> bool:
        """True iff ``p`` lies in the open interior."""
        if self.on_boundary(p):
            return False
        return self._crossing_parity(p)

    def contains_closed(self, p: Point2) -> bool:
        """True iff ``p`` lies in the interior or on the boundary."""
        return self.on_boundary(p) or self._crossing_parity(p)


def axis_aligned_rectangle(x0: float, y0: float, x1: float, y1: float) -> SimplePolygon:
    """CCW rectangle from two opposite corners (x0 < x1, y0 < y1)."""
    if not (x1 > x0 and y1 > y0):
        raise ValueError("rectangle corners must satisfy x0 < x1, y0 < y1")
    return SimplePolygon(
        (Point2(x0, y0), Point2(x1, y0), Point2(x1, y1), Point2(x0, y1))
    )


def reflect_point_across_line(p: Point2, s: Segment) -> Point2:
    """Mirror image of ``p`` across the infinite line through ``s``."""
    ax, ay = s.a.x, s.a.y
    ex, ey = s.b.x - ax, s.b.y - ay
    dd = ex * ex + ey * ey
    t = ((p.x - ax) * ex + (p.y - ay) * ey) / dd
    projx, projy = ax + t * ex, ay + t * ey
    return Point2(2.0 * projx - p.x, 2.0 * projy - p.y)


def ray_ray_intersection(r1: Ray, r2: Ray) -> Optional[Point2]:
    """Intersection point with both ray parameters strictly positive.

    Returns None for parallel/anti-parallel rays and for intersections
    behind either origin.
    """
    d1x, d1y = r1.direction
    d2x, d2y = r2.direction
    denom = _cross(d1x, d1y, d2x, d2y)
    if abs(denom) <= _PARALLEL_EPS:
        return None
    ox, oy = r2.origin.x - r1.origin.x, r2.origin.y - r1.origin.y
    t1 = _cross(ox, oy, d2x, d2y) / denom
    t2 = _cross(ox, oy, d1x, d1y) / denom
    if t1 <= 0.0 or t2 <= 0.0:
        return None
    return Point2(r1.origin.x + t1 * d1x, r1.origin.y + t1 * d1y)


def _segment_edge_cut_params(
    p0: Point2, p1: Point2, a: Point2, b: Point2
) -> list[float]:
    """Parameters t in [0, 1] where segment p0->p1 meets edge a->b.

    Transversal contact yields one parameter; a collinear overlap yields the
    two overlap endpoints. Contacts slightly outside either extent (within
    TOL) are included and clipped; extra cut points only refine the
    partition used by the interior test and never change its answer.
    """
    dx, dy = p1.x - p0.x, p1.y - p0.y
    ex, ey = b.x - a.x, b.y - a.y
    seg_len = math.hypot(dx, dy)
    edge_len = math.hypot(ex, ey)
    aox, aoy = a.x - p0.x, a.y - p0.y
    denom = _cross(dx, dy, ex, ey)
    if abs(denom) > _PARALLEL_EPS * seg_len * edge_len:
        t = _cross(aox, aoy, ex, ey) / denom
        s = _cross(aox, aoy, dx, dy) / denom
        dt = TOL / seg_len
        ds = TOL / edge_len
        if -ds <= s <= 1.0 + ds and -dt <= t <= 1.0 + dt:
            return [min(1.0, max(0.0, t))]
        return []
    # Parallel: collinear iff the edge start sits on the segment's line.
    if abs(_cross(dx, dy, aox, aoy)) > TOL * seg_len:
        return []
    dd = seg_len * seg_len
    ta = (aox * dx + aoy * dy) / dd
    tb = ((b.x - p0.x) * dx + (b.y - p0.y) * dy) / dd
    lo, hi = min(ta, tb), max(ta, tb)
    lo, hi = max(0.0, lo), min(1.0, hi)
    if hi < lo:
        return []
    return [lo, hi]


def segment_intersects_polygon_interior(s: Segment, p: SimplePolygon) -> bool:
    """True iff the open segment passes through the open interior of ``p``.

    Boundary tangency alone (running along an edge, touching a corner)
    returns False. The segment is partitioned at every boundary contact and
    each sub-segment midpoint is tested against the open interior.
    """
    cuts = [0.0, 1.0]
    for e in range(len(p.vertices)):
        a = p.vertices[e]
        b = p.vertices[(e + 1) % len(p.vertices)]
        cuts.extend(_segment_edge_cut_params(s.a, s.b, a, b))
    cuts.sort()
    for t0, t1 in zip(cuts, cuts[1:]):
        if t1 - t0 <= 1e-12:
            continue
        if p.contains_strict(s.point_at(0.5 * (t0 + t1))):
            return True
    return False


class PolygonSet:
    """Vectorized point/segment queries against a fixed set of polygons.

    Semantics match the scalar predicates above; this is the workhorse for
    the ray tracer and rasterizers, where queries arrive in batches.
    """

    def __init__(self, polygons: Sequence[SimplePolygon]):
        self.polygons = tuple(polygons)
        counts = [len(p.vertices) for p in self.polygons]
        self.n_edges = int(sum(counts))
        if self.n_edges:
            ea = np.concatenate([p.points for p in self.polygons], axis=0)
            eb = np.concatenate(
                [np.roll(p.points, -1, axis=0) for p in self.polygons], axis=0
            )
        else:
            ea = np.zeros((0, 2))
            eb = np.zeros((0, 2))
        self._ea = ea
        self._eb = eb
        self._ev = eb - ea
        self._elen = np.hypot(self._ev[:, 0], self._ev[:, 1])
        self._elen2 = np.maximum(self._elen**2, 1e-300)
        # reduceat offsets: one contiguous block of edges per polygon
        self._offsets = np.cumsum([0] + counts[:-1]).astype(np.intp) if counts else None

    def _parity_boundary(self, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Per-(point, polygon) crossing parity and on-boundary flags."""
        n = pts.shape[0]
        b = len(self.polygons)
        if n == 0 or b == 0:
            return np.zeros((n, b), bool), np.zeros((n, b), bool)
        px = pts[:, 0][:, None]
        py = pts[:, 1][:, None]
        ax, ay = self._ea[:, 0][None, :], self._ea[:, 1][None, :]
        bx, by = self._eb[:, 0][None, :], self._eb[:, 1][None, :]
        straddles = (ay > py) != (by > py)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = ax + (py - ay) * (bx - ax) / (by - ay)
        crossed = straddles & (px < xint)
        counts = np.add.reduceat(crossed, self._offsets, axis=1)
        parity = (counts % 2).astype(bool)

        # squared distance from each point to each edge
        apx, apy = px - ax, py - ay
        t = (apx * self._ev[None, :, 0] + apy * self._ev[None, :, 1]) / self._elen2[None, :]
        t = np.clip(t, 0.0, 1.0)
        cx = ax + t * self._ev[None, :, 0]
        cy = ay + t * self._ev[None, :, 1]
        d2 = (px - cx) ** 2 + (py - cy) ** 2
        onb_edge = d2 <= TOL * TOL
        onb = np.logical_or.reduceat(onb_edge, self._offsets, axis=1)
        return parity, onb

    def points_strictly_inside(self, pts: np.ndarray) -> np.ndarray:
        """(n,) bool: point in the open interior of any polygon."""
        parity, onb = self._parity_boundary(np.asarray(pts, dtype=np.float64))
        return (parity & ~onb).any(axis=1)

    def points_in_closed(self, pts: np.ndarray) -> np.ndarray:
        """(n,) bool: point inside or on the boundary of any polygon."""
        parity, onb = self._parity_boundary(np.asarray(pts, dtype=np.float64))
        return (parity | onb).any(axis=1)

    def segments_cross_interior(
        self, p0: np.ndarray, p1: np.ndarray
    ) -> np.ndarray:
        """(n,) bool: open segment p0[i]->p1[i] meets any open interior.

        Each segment is partitioned at all boundary contacts; sub-segment
        midpoints are then tested with :meth:`points_strictly_inside`.
        """
        p0 = np.asarray(p0, dtype=np.float64)
        p1 = np.asarray(p1, dtype=np.float64)
        n = p0.shape[0]
        if n == 0:
            return np.zeros(0, bool)
        if self.n_edges == 0:
            return np.zeros(n, bool)
        d = p1 - p0
        seg_len = np.hypot(d[:, 0], d[:, 1])
        seg_len = np.maximum(seg_len, 1e-300)

        ao = self._ea[None, :, :] - p0[:, None, :]
        bo = self._eb[None, :, :] - p0[:, None, :]
        denom = d[:, None, 0] * self._ev[None, :, 1] - d[:, None, 1] * self._ev[None, :, 0]
        cross_ao_e = ao[:, :, 0] * self._ev[None, :, 1] - ao[:, :, 1] * self._ev[None, :, 0]
        cross_ao_d = ao[:, :, 0] * d[:, None, 1] - ao[:, :, 1] * d[:, None, 0]

        par = np.abs(denom) <= _PARALLEL_EPS * seg_len[:, None] * self._elen[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = cross_ao_e / denom
            s = cross_ao_d / denom
        dt = TOL / seg_len[:, None]
        ds = TOL / np.maximum(self._elen[None, :], 1e-300)
        transversal = (~par) & (s >= -ds) & (s <= 1.0 + ds) & (t >= -dt) & (t <= 1.0 + dt)

        colin = par & (np.abs(cross_ao_d) <= TOL * seg_len[:, None])
        dd = (seg_len**2)[:, None]
        ta = (ao[:, :, 0] * d[:, None, 0] + ao[:, :, 1] * d[:, None, 1]) / dd
        tb = (bo[:, :, 0] * d[:, None, 0] + bo[:, :, 1] * d[:, None, 1]) / dd
        lo = np.clip(np.minimum(ta, tb), 0.0, 1.0)
        hi = np.clip(np.maximum(ta, tb), 0.0, 1.0)
        colin &= hi >= lo

        tc = np.clip(t, 0.0, 1.0)
        cut_a = np.where(transversal, tc, np.where(colin, lo, 1.0))
        cut_b = np.where(transversal, tc, np.where(colin, hi, 1.0))
        ones = np.ones((n, 1))
        cuts = np.concatenate([cut_a, cut_b, np.zeros((n, 1)), ones], axis=1)
        cuts.sort(axis=1)
        gaps = cuts[:, 1:] - cuts[:, :-1]
        mids_t = 0.5 * (cuts[:, 1:] + cuts[:, :-1])
        rows, cols = np.nonzero(gaps > 1e-12)
        if rows.size == 0:
            return np.zeros(n, bool)
        mpts = p0[rows] + mids_t[rows, cols][:, None] * d[rows]
        inside = self.points_strictly_inside(mpts)
        blocked = np.zeros(n, bool)
        np.logical_or.at(blocked, rows, inside)
        return blocked
