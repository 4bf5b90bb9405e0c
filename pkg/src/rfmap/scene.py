"""Scene data model and procedural generator for synthetic urban maps.

Scenes are square, hold axis-aligned-rectangle buildings by default (the
`Scene` type accepts any simple polygon) plus UE and BS device locations.
Generation is rejection sampling driven by a single seeded RNG stream, so a
seed fully determines the scene.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ExtentMismatchError, InvariantViolationError, PlacementError
from .geometry import (
    Point2,
    PolygonSet,
    SimplePolygon,
    TOL,
    axis_aligned_rectangle,
    segment_intersects_polygon_interior,
)
from .grids import BinaryMap, GridSpec

SCENE_FORMAT_FIELDS = ("id", "side_m", "buildings", "ues", "bss")

_MAX_ATTEMPTS = 10_000


@dataclass(frozen=True)
class GenParams:
    """Knobs for the synthetic scene generator.

    ``n_buildings`` is an inclusive integer range. Defaults (30 UEs, 5 BSs,
    200 m extent) echo typical per-map device densities in dense-urban radio
    datasets; building count/size defaults are tuned so rejection sampling
    converges quickly at 200 m while leaving streets between blocks.
    """

    n_buildings: tuple[int, int] = (3, 7)
    building_w_m: tuple[float, float] = (20.0, 60.0)
    building_h_m: tuple[float, float] = (20.0, 60.0)
    n_ues: int = 30
    n_bss: int = 5
    side_m: float = 200.0
    min_gap_m: float = 4.0
    seed: int = 0

    def __post_init__(self):
        lo, hi = self.n_buildings
        if lo < 0 or hi < lo:
            raise ValueError("n_buildings range is empty or negative")
        for rng_ in (self.building_w_m, self.building_h_m):
            if not (0.0 < rng_[0] <= rng_[1]):
                raise ValueError("building size range is empty or non-positive")
        if self.n_ues < 1 or self.n_bss < 1:
            raise ValueError("need at least one UE and one BS")
        if self.side_m <= 0.0 or self.min_gap_m < 0.0:
            raise ValueError("side_m must be positive, min_gap_m non-negative")
        if not (0 <= int(self.seed) < 2**64):
            raise ValueError("seed must fit in 64 unsigned bits")


@dataclass(frozen=True)
class Scene:
    """Ground-truth world: buildings, devices, square extent."""

    id: str
    side_m: float
    buildings: tuple[SimplePolygon, ...]
    ues: tuple[Point2, ...]
    bss: tuple[Point2, ...]

    def __post_init__(self):
        object.__setattr__(self, "buildings", tuple(self.buildings))
        object.__setattr__(self, "ues", tuple(self.ues))
        object.__setattr__(self, "bss", tuple(self.bss))
        validate_scene(self)

    def devices(self) -> tuple[Point2, ...]:
        return self.ues + self.bss


def validate_scene(scene: Scene) -> None:
    """Check every Scene invariant; raises InvariantViolationError.

    Deliberately independent of the generator's bookkeeping: everything is
    re-derived from the stored geometry.
    """
    if scene.side_m <= 0.0:
        raise InvariantViolationError(f"{scene.id}: non-positive extent")
    if len(scene.ues) < 1 or len(scene.bss) < 1:
        raise InvariantViolationError(f"{scene.id}: needs >= 1 UE and >= 1 BS")
    lo, hi = -TOL, scene.side_m + TOL
    for b in scene.buildings:
        for v in b.vertices:
            if not (lo <= v.x <= hi and lo <= v.y <= hi):
                raise InvariantViolationError(
                    f"{scene.id}: building vertex ({v.x}, {v.y}) outside extent"
                )
    for kind, pts in (("ue", scene.ues), ("bs", scene.bss)):
        for i, p in enumerate(pts):
            if not (lo <= p.x <= hi and lo <= p.y <= hi):
                raise InvariantViolationError(
                    f"{scene.id}: {kind} {i} outside extent"
                )
            for b in scene.buildings:
                if b.contains_strict(p):
                    raise InvariantViolationError(
                        f"{scene.id}: {kind} {i} strictly inside a building"
                    )
    # pairwise interior disjointness
    n = len(scene.buildings)
    for i in range(n):
        for j in range(i + 1, n):
            if _interiors_overlap(scene.buildings[i], scene.buildings[j]):
                raise InvariantViolationError(
                    f"{scene.id}: buildings {i} and {j} overlap"
                )


def _interiors_overlap(a: SimplePolygon, b: SimplePolygon) -> bool:
    ax0, ay0, ax1, ay1 = a.bbox
    bx0, by0, bx1, by1 = b.bbox
    if ax1 < bx0 or bx1 < ax0 or ay1 < by0 or by1 < ay0:
        return False
    for s in a.edges():
        if segment_intersects_polygon_interior(s, b):
            return True
    for s in b.edges():
        if segment_intersects_polygon_interior(s, a):
            return True
    # containment without boundary contact
    if b.contains_strict(a.vertices[0]) or a.contains_strict(b.vertices[0]):
        return True
    return False


def generate_scene(params: GenParams, scene_id: str | None = None) -> Scene:
    """Rejection-sample a scene; deterministic in ``params.seed``.

    Buildings are axis-aligned rectangles separated by at least
    ``min_gap_m``; devices are uniform over free space (outside every closed
    building polygon). Raises PlacementError after 10,000 failed attempts
    for any single entity.
    """
    rng = np.random.default_rng(int(params.seed))
    side = params.side_m
    n_b = int(rng.integers(params.n_buildings[0], params.n_buildings[1] + 1))

    rects: list[tuple[float, float, float, float]] = []
    gap = params.min_gap_m
    for k in range(n_b):
        for attempt in range(_MAX_ATTEMPTS):
            w = float(rng.uniform(*params.building_w_m))
            h = float(rng.uniform(*params.building_h_m))
            if w >= side or h >= side:
                continue
            x0 = float(rng.uniform(0.0, side - w))
            y0 = float(rng.uniform(0.0, side - h))
            candidate = (x0, y0, x0 + w, y0 + h)
            if all(_rects_clear(candidate, r, gap) for r in rects):
                rects.append(candidate)
                break
        else:
            raise PlacementError(
                f"could not place building {k + 1}/{n_b} after {_MAX_ATTEMPTS} attempts"
            )
    buildings = tuple(axis_aligned_rectangle(*r) for r in rects)
    occupied = PolygonSet(buildings)

    def place(count: int, what: str) -> tuple[Point2, ...]:
        out: list[Point2] = []
        for k in range(count):
            for attempt in range(_MAX_ATTEMPTS):
                p = rng.uniform(0.0, side, size=2)
                if not occupied.points_in_closed(p[None, :])[0]:
                    out.append(Point2(float(p[0]), float(p[1])))
                    break
            else:
                raise PlacementError(
                    f"could not place {what} {k + 1}/{count} after {_MAX_ATTEMPTS} attempts"
                )
        return tuple(out)

    ues = place(params.n_ues, "ue")
    bss = place(params.n_bss, "bs")
    sid = scene_id if scene_id is not None else f"scene_{int(params.seed)}"
    return Scene(id=sid, side_m=side, buildings=buildings, ues=ues, bss=bss)


def _rects_clear(
    a: tuple[float, float, float, float],
    b: tuple[float, float, float, float],
    gap: float,
) -> bool:
    return (
        a[2] + gap <= b[0]
        or b[2] + gap <= a[0]
        or a[3] + gap <= b[1]
        or b[3] + gap <= a[1]
    )


def rasterize_scene(scene: Scene, grid: GridSpec) -> BinaryMap:
    """Pixel-center rasterization: 1 iff the center is in a closed building."""
    if not math.isclose(grid.side_m, scene.side_m, rel_tol=0.0, abs_tol=TOL):
        raise ExtentMismatchError(
            f"grid extent {grid.side_m} != scene extent {scene.side_m}"
        )
    if not scene.buildings:
        return BinaryMap(np.zeros((grid.height_px, grid.width_px), bool))
    pset = PolygonSet(scene.buildings)
    inside = pset.points_in_closed(grid.pixel_centers())
    return BinaryMap(inside.reshape(grid.height_px, grid.width_px))


# --- serialization ---------------------------------------------------------


def scene_to_json(scene: Scene) -> str:
    doc = {
        "id": scene.id,
        "side_m": scene.side_m,
        "buildings": [
            [[v.x, v.y] for v in b.vertices] for b in scene.buildings
        ],
        "ues": [[p.x, p.y] for p in scene.ues],
        "bss": [[p.x, p.y] for p in scene.bss],
    }
    return json.dumps(doc, separators=(",", ":"))


def scene_from_json(text: str) -> Scene:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise InvariantViolationError(f"scene JSON is not valid JSON: {e}") from e
    try:
        buildings = tuple(
            SimplePolygon(tuple(Point2(float(x), float(y)) for x, y in poly))
            for poly in doc["buildings"]
        )
        return Scene(
            id=str(doc["id"]),
            side_m=float(doc["side_m"]),
            buildings=buildings,
            ues=tuple(Point2(float(x), float(y)) for x, y in doc["ues"]),
            bss=tuple(Point2(float(x), float(y)) for x, y in doc["bss"]),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise InvariantViolationError(f"malformed scene JSON: {e}") from e
