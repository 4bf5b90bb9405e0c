"""Deterministic geometric baseline: carve free space, triangulate walls.

Pipeline per path: LOS-classified paths carve the direct segment free;
remaining paths are triangulated by intersecting the UE's departure ray
with the BS's arrival ray, and kept as wall evidence when the two legs
reproduce the measured path length. Only single-bounce geometry survives
that length test; double bounces intersect somewhere meaningless and are
rejected by it. Free votes always beat wall votes, because carving is
sound by construction while triangulation can alias.

Carving marks pixels whose center lies within a thin band around each
unobstructed leg; the band half-width (``_CARVE_HIT_FRAC`` of the pixel
size, times ``carve_width_px``) and the end insets near reflection points
are chosen so that, on noise-free inputs, carved pixels never land on
ground-truth building pixels (legs may graze walls tangentially, so a
full half-pixel band would occasionally swallow just-inside centers).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .errors import ExtentMismatchError, InvariantViolationError
from .geometry import Point2, Ray, TOL, angle_gap, normalize_angle, ray_ray_intersection
from .grids import BinaryMap, GridSpec, pixels_near_segment
from .raytracer import C_LIGHT, PathDescriptor, RadioLink

# Fraction of one pixel used as the carve band half-width. Calibrated by
# scripts/measure_carve_soundness.py: 0.02 gave zero carved-on-building
# pixels over several thousand random 224px/200m scenes, while 0.05 grazed
# a just-inside corner center roughly once per ~1300 scenes.
_CARVE_HIT_FRAC = 0.02
# Legs that end on a wall are inset at least this many pixels there.
_REFLECT_TRIM_PX = 1.0

# Angular slack for LOS classification; exact data is off by rounding only.
DEFAULT_ANGLE_TOL_RAD = 1e-3


@dataclass(frozen=True)
class ReconConfig:
    length_tol_m: float = 0.5
    carve_width_px: int = 1
    wall_dilate_px: int = 1
    min_evidence: int = 1
    unknown_fill: Literal["free", "building"] = "free"

    def __post_init__(self):
        if self.length_tol_m <= 0.0:
            raise ValueError("length_tol_m must be positive")
        if self.carve_width_px < 1 or self.wall_dilate_px < 0:
            raise ValueError("carve_width_px >= 1, wall_dilate_px >= 0 required")
        if self.min_evidence < 1:
            raise ValueError("min_evidence must be >= 1")
        if self.unknown_fill not in ("free", "building"):
            raise ValueError("unknown_fill must be 'free' or 'building'")


@dataclass(frozen=True)
class EvidencePoint:
    """Triangulated wall-reflection hypothesis."""

    position: Point2
    normal: float  # estimated wall normal, radians in [0, 2*pi)
    residual: float  # |leg sum - c*tau| in meters
    source: tuple[int, int, int]  # (ue_index, bs_index, path_index)


@dataclass(frozen=True)
class ReconInputs:
    """Reconstruction inputs: device locations plus descriptor-only links."""

    side_m: float
    ues: tuple[Point2, ...]
    bss: tuple[Point2, ...]
    links: tuple[RadioLink, ...]

    def __post_init__(self):
        for link in self.links:
            if any(p.truth is not None for p in link.paths):
                raise InvariantViolationError(
                    "reconstruction inputs must not carry trace truth metadata"
                )


def recon_inputs(scene, links: Sequence[RadioLink]) -> ReconInputs:
    """Strip truth metadata and bundle what the estimator may see."""
    return ReconInputs(
        side_m=scene.side_m,
        ues=tuple(scene.ues),
        bss=tuple(scene.bss),
        links=tuple(l.strip_truth() for l in links),
    )


def classify_los(
    ue: Point2,
    bs: Point2,
    path: PathDescriptor,
    tol: float,
    angle_tol_rad: float = DEFAULT_ANGLE_TOL_RAD,
) -> bool:
    """True iff the descriptor is consistent with the direct UE->BS path."""
    d = ue.dist(bs)
    if abs(path.delay * C_LIGHT - d) > tol:
        return False
    if angle_gap(path.aod, math.atan2(bs.y - ue.y, bs.x - ue.x)) > angle_tol_rad:
        return False
    if angle_gap(path.aoa, math.atan2(ue.y - bs.y, ue.x - bs.x)) > angle_tol_rad:
        return False
    return True


def estimate_single_bounce(
    ue: Point2,
    bs: Point2,
    path: PathDescriptor,
    cfg: ReconConfig,
    side_m: float | None = None,
    source: tuple[int, int, int] = (-1, -1, -1),
) -> EvidencePoint | None:
    """Triangulate the reflection point; accept only length-consistent hits."""
    q = ray_ray_intersection(Ray(ue, path.aod), Ray(bs, path.aoa))
    if q is None:
        return None
    leg_sum = ue.dist(q) + q.dist(bs)
    residual = abs(leg_sum - path.delay * C_LIGHT)
    if residual > cfg.length_tol_m:
        return None
    if side_m is not None and not (
        -TOL <= q.x <= side_m + TOL and -TOL <= q.y <= side_m + TOL
    ):
        return None
    in_x, in_y = q.x - ue.x, q.y - ue.y
    in_n = math.hypot(in_x, in_y)
    out_x, out_y = bs.x - q.x, bs.y - q.y
    out_n = math.hypot(out_x, out_y)
    if in_n <= TOL or out_n <= TOL:
        return None
    nx = out_x / out_n - in_x / in_n
    ny = out_y / out_n - in_y / in_n
    if math.hypot(nx, ny) <= TOL:  # straight-through: no wall orientation
        return None
    return EvidencePoint(
        position=q,
        normal=normalize_angle(math.atan2(ny, nx)),
        residual=residual,
        source=source,
    )


@dataclass
class EvidenceGrid:
    """Commutative per-pixel counters; accumulation order never matters."""

    grid: GridSpec
    free_votes: np.ndarray = field(init=False)
    wall_votes: np.ndarray = field(init=False)

    def __post_init__(self):
        shape = (self.grid.height_px, self.grid.width_px)
        self.free_votes = np.zeros(shape, np.int32)
        self.wall_votes = np.zeros(shape, np.int32)


def _carve_leg(
    acc: EvidenceGrid,
    a: Point2,
    b: Point2,
    cfg: ReconConfig,
    trim_start_m: float = 0.0,
    trim_end_m: float = 0.0,
) -> None:
    length = a.dist(b)
    if length - trim_start_m - trim_end_m <= TOL:
        return
    ux, uy = (b.x - a.x) / length, (b.y - a.y) / length
    ax, ay = a.x + ux * trim_start_m, a.y + uy * trim_start_m
    bx, by = b.x - ux * trim_end_m, b.y - uy * trim_end_m
    radius = _CARVE_HIT_FRAC * cfg.carve_width_px * acc.grid.meters_per_px
    rows, cols = pixels_near_segment(acc.grid, ax, ay, bx, by, radius)
    np.add.at(acc.free_votes, (rows, cols), 1)


def _reflective_trim(
    leg_from_q: tuple[float, float], ev_normal: float, radius_m: float, base_m: float
) -> float:
    """Inset for a leg end that sits on a wall of known orientation.

    A leg leaving the reflection point at angle theta above the wall plane
    stays within ``radius_m`` of the wall out to arclength radius/sin(theta);
    pixels carved there could sit just inside the wall. Doubling the bound
    leaves margin for the band width on the wall side.
    """
    ln = math.hypot(*leg_from_q)
    if ln <= TOL:
        return base_m
    sin_theta = abs(
        (leg_from_q[0] * math.cos(ev_normal) + leg_from_q[1] * math.sin(ev_normal))
        / ln
    )
    return max(base_m, 2.0 * radius_m / max(sin_theta, 1e-9))


def carve_free(
    acc: EvidenceGrid,
    ue: Point2,
    bs: Point2,
    path_set: Sequence[PathDescriptor],
    grid: GridSpec,
    cfg: ReconConfig = ReconConfig(),
) -> None:
    """Deposit free votes for one pair's LOS segments and accepted bounce legs.

    Legs of accepted single-bounce paths are inset at the reflection end,
    so the pixel containing the reflection point itself is never carved.
    """
    if acc.grid != grid:
        raise ExtentMismatchError("evidence grid does not match the given grid")
    _accumulate_pair(acc, ue, bs, path_set, cfg, deposit_walls=False)


def _accumulate_pair(
    acc: EvidenceGrid,
    ue: Point2,
    bs: Point2,
    paths: Sequence[PathDescriptor],
    cfg: ReconConfig,
    deposit_walls: bool,
    source_base: tuple[int, int] = (-1, -1),
) -> list[EvidencePoint]:
    mpp = acc.grid.meters_per_px
    base_trim = _REFLECT_TRIM_PX * mpp
    radius = _CARVE_HIT_FRAC * cfg.carve_width_px * mpp
    side = acc.grid.side_m
    evidence: list[EvidencePoint] = []
    for k, p in enumerate(paths):
        if classify_los(ue, bs, p, cfg.length_tol_m):
            _carve_leg(acc, ue, bs, cfg)
            continue
        ev = estimate_single_bounce(
            ue, bs, p, cfg, side_m=side, source=(source_base[0], source_base[1], k)
        )
        if ev is None:
            continue
        evidence.append(ev)
        q = ev.position
        if deposit_walls:
            col = min(acc.grid.width_px - 1, max(0, int(q.x / mpp)))
            row = min(acc.grid.height_px - 1, max(0, int(q.y / mpp)))
            acc.wall_votes[row, col] += 1
        trim_in = _reflective_trim((ue.x - q.x, ue.y - q.y), ev.normal, radius, base_trim)
        trim_out = _reflective_trim((bs.x - q.x, bs.y - q.y), ev.normal, radius, base_trim)
        _carve_leg(acc, ue, q, cfg, trim_end_m=trim_in)
        _carve_leg(acc, q, bs, cfg, trim_start_m=trim_out)
    return evidence


def _dilate(mask: np.ndarray, k: int) -> np.ndarray:
    if k <= 0:
        return mask.copy()
    out = mask.copy()
    h, w = mask.shape
    for dy in range(-k, k + 1):
        for dx in range(-k, k + 1):
            if dy == 0 and dx == 0:
                continue
            src = mask[
                max(0, -dy) : h - max(0, dy), max(0, -dx) : w - max(0, dx)
            ]
            out[max(0, dy) : h - max(0, -dy), max(0, dx) : w - max(0, -dx)] |= src
    return out


@dataclass(frozen=True)
class ReconResult:
    binary: BinaryMap
    prob: np.ndarray  # (h, w) float32 in [0, 1]; binary == (prob >= 0.5)
    evidence: tuple[EvidencePoint, ...]
    free_votes: np.ndarray
    wall_votes: np.ndarray


def reconstruct(
    inputs: ReconInputs,
    grid: GridSpec,
    cfg: ReconConfig = ReconConfig(),
) -> ReconResult:
    """Run the full baseline over every link of a scene.

    The probability map embeds the binary decision (thresholding it at
    exactly 0.5 reproduces the binary output) and shades by wall-vote
    share: 1.0 confirmed walls, 0.75 dilation halo, below 0.5 everything
    rejected or unknown, 0.0 carved-free with no contest.
    """
    if not math.isclose(grid.side_m, inputs.side_m, rel_tol=0.0, abs_tol=TOL):
        raise ExtentMismatchError(
            f"grid extent {grid.side_m} != scene extent {inputs.side_m}"
        )
    acc = EvidenceGrid(grid)
    evidence: list[EvidencePoint] = []
    for link in inputs.links:
        ue = inputs.ues[link.ue_index]
        bs = inputs.bss[link.bs_index]
        evidence.extend(
            _accumulate_pair(
                acc,
                ue,
                bs,
                link.paths,
                cfg,
                deposit_walls=True,
                source_base=(link.ue_index, link.bs_index),
            )
        )

    free = acc.free_votes
    wall = acc.wall_votes
    wall_core = (wall >= cfg.min_evidence) & (free == 0)
    halo = _dilate(wall_core, cfg.wall_dilate_px) & (free == 0)
    fill_building = cfg.unknown_fill == "building"
    binary = (free == 0) if fill_building else halo

    with np.errstate(divide="ignore", invalid="ignore"):
        share = np.where(wall + free > 0, wall / np.maximum(wall + free, 1), 0.0)
    prob = np.where(
        free > 0,
        np.where(wall > 0, 0.49 * share, 0.0),
        np.where(
            wall_core,
            1.0,
            np.where(
                halo,
                0.75,
                np.where(
                    wall > 0,
                    0.55 if fill_building else 0.45,
                    0.75 if fill_building else 0.25,
                ),
            ),
        ),
    ).astype(np.float32)

    return ReconResult(
        binary=BinaryMap(binary),
        prob=prob,
        evidence=tuple(evidence),
        free_votes=free,
        wall_votes=wall,
    )
