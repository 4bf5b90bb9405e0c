"""Specular multipath tracer: LOS plus single/double wall bounces.

Paths are found with the mirror-image method: reflecting the UE across
ordered tuples of building edges and intersecting the unfolded straight
line back through each edge. Every leg of every candidate is then
occlusion-checked against all building interiors, so emitted paths are
geometrically realizable by construction.

Descriptor conventions (see geometry module for the angle frame):

* AoD = direction of the first leg leaving the UE;
* AoA = direction from the BS toward the last path vertex before the BS
  (the back-propagation direction);
* delay = total polyline length / c.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DeviceInsideBuildingError, InvariantViolationError
from .geometry import Point2, PolygonSet, TOL, angle_gap, normalize_angle
from .scene import Scene

C_LIGHT = 299_792_458.0

# Descriptor components closer than this (radians / seconds) are duplicates.
_DEDUP_EPS = 1e-9


@dataclass(frozen=True)
class PathTruth:
    """Trace metadata carried for testing only; reconstruction never sees it."""

    bounces: int
    vertices: tuple[Point2, ...]  # full polyline, UE first, BS last


@dataclass(frozen=True)
class PathDescriptor:
    aoa: float
    aod: float
    delay: float
    truth: PathTruth | None = None

    def __post_init__(self):
        if not self.delay > 0.0:
            raise ValueError("path delay must be positive")
        object.__setattr__(self, "aoa", normalize_angle(self.aoa))
        object.__setattr__(self, "aod", normalize_angle(self.aod))

    def length_m(self, c: float = C_LIGHT) -> float:
        return self.delay * c

    def strip_truth(self) -> "PathDescriptor":
        return self if self.truth is None else replace(self, truth=None)


@dataclass(frozen=True)
class RadioLink:
    ue_index: int
    bs_index: int
    paths: tuple[PathDescriptor, ...]

    def __post_init__(self):
        object.__setattr__(self, "paths", tuple(self.paths))
        delays = [p.delay for p in self.paths]
        if any(b < a for a, b in zip(delays, delays[1:])):
            raise ValueError("link paths must be sorted by delay ascending")

    @property
    def n_paths(self) -> int:
        return len(self.paths)

    def strip_truth(self) -> "RadioLink":
        return replace(self, paths=tuple(p.strip_truth() for p in self.paths))


@dataclass(frozen=True)
class PathNoise:
    """Descriptor perturbation hook; all-zero stds make it a no-op."""

    angle_std_rad: float = 0.0
    delay_std_s: float = 0.0
    seed: int = 0


@dataclass(frozen=True)
class TraceConfig:
    max_bounces: int = 2
    max_paths_per_pair: int = 25
    c: float = C_LIGHT
    noise: PathNoise | None = None

    def __post_init__(self):
        if self.max_bounces not in (0, 1, 2):
            raise ValueError("max_bounces must be 0, 1 or 2")
        if self.max_paths_per_pair < 1:
            raise ValueError("max_paths_per_pair must be >= 1")
        if self.c <= 0.0:
            raise ValueError("c must be positive")


class SceneIndex:
    """Per-scene arrays reused across trace_pair calls."""

    def __init__(self, scene: Scene):
        self.scene = scene
        self.pset = PolygonSet(scene.buildings)
        if scene.buildings:
            self.ea = np.concatenate([b.points for b in scene.buildings], axis=0)
            self.eb = np.concatenate(
                [np.roll(b.points, -1, axis=0) for b in scene.buildings], axis=0
            )
        else:
            self.ea = np.zeros((0, 2))
            self.eb = np.zeros((0, 2))
        self.ev = self.eb - self.ea
        elen2 = self.ev[:, 0] ** 2 + self.ev[:, 1] ** 2
        self.elen2 = np.maximum(elen2, 1e-300)
        self.n_edges = self.ea.shape[0]

    def mirror(self, pts: np.ndarray) -> np.ndarray:
        """Mirror points (..., 2) across every edge line -> (..., E, 2)."""
        rel = pts[..., None, :] - self.ea  # (..., E, 2)
        t = (rel * self.ev).sum(-1) / self.elen2
        proj = self.ea + t[..., None] * self.ev
        return 2.0 * proj - pts[..., None, :]

    def device_inside(self, p: Point2) -> bool:
        return bool(self.pset.points_strictly_inside(p.as_array()[None, :])[0])


def _cross2(ax, ay, bx, by):
    return ax * by - ay * bx


def trace_pair(
    scene: Scene,
    ue: Point2,
    bs: Point2,
    cfg: TraceConfig = TraceConfig(),
    index: SceneIndex | None = None,
) -> list[PathDescriptor]:
    """All valid paths between one UE-BS pair, sorted by delay ascending."""
    idx = index if index is not None else SceneIndex(scene)
    if idx.device_inside(ue):
        raise DeviceInsideBuildingError(f"ue at ({ue.x}, {ue.y}) is inside a building")
    if idx.device_inside(bs):
        raise DeviceInsideBuildingError(f"bs at ({bs.x}, {bs.y}) is inside a building")

    u = ue.as_array()
    b = bs.as_array()
    candidates: list[tuple[int, np.ndarray]] = []  # (bounces, vertex array (k+2, 2))

    if float(np.hypot(*(b - u))) > TOL:
        candidates.append((0, np.stack([u, b])))

    if cfg.max_bounces >= 1 and idx.n_edges:
        for verts in _single_bounce_candidates(idx, u, b):
            candidates.append((1, verts))
    if cfg.max_bounces >= 2 and idx.n_edges >= 2:
        for verts in _double_bounce_candidates(idx, u, b):
            candidates.append((2, verts))

    if not candidates:
        return []

    # occlusion-check every leg of every candidate in one batch
    leg_p0, leg_p1, owner = [], [], []
    for ci, (_, verts) in enumerate(candidates):
        for k in range(verts.shape[0] - 1):
            leg_p0.append(verts[k])
            leg_p1.append(verts[k + 1])
            owner.append(ci)
    blocked = idx.pset.segments_cross_interior(np.array(leg_p0), np.array(leg_p1))
    bad = np.zeros(len(candidates), bool)
    np.logical_or.at(bad, np.array(owner), blocked)

    paths: list[PathDescriptor] = []
    for ci, (bounces, verts) in enumerate(candidates):
        if bad[ci]:
            continue
        legs = np.diff(verts, axis=0)
        length = float(np.hypot(legs[:, 0], legs[:, 1]).sum())
        aod = math.atan2(verts[1, 1] - verts[0, 1], verts[1, 0] - verts[0, 0])
        aoa = math.atan2(verts[-2, 1] - verts[-1, 1], verts[-2, 0] - verts[-1, 0])
        truth = PathTruth(
            bounces=bounces,
            vertices=tuple(Point2(float(x), float(y)) for x, y in verts),
        )
        paths.append(
            PathDescriptor(aoa=aoa, aod=aod, delay=length / cfg.c, truth=truth)
        )

    paths.sort(key=lambda p: (p.delay, p.aoa, p.aod))
    paths = _dedupe(paths)
    return paths[: cfg.max_paths_per_pair]


def _single_bounce_candidates(idx: SceneIndex, u: np.ndarray, b: np.ndarray):
    m = idx.mirror(u)  # (E, 2)
    w = b - m  # unfolded line from mirror image to BS
    denom = _cross2(w[:, 0], w[:, 1], idx.ev[:, 0], idx.ev[:, 1])
    am = idx.ea - m
    with np.errstate(divide="ignore", invalid="ignore"):
        t = _cross2(am[:, 0], am[:, 1], idx.ev[:, 0], idx.ev[:, 1]) / denom
        s = _cross2(am[:, 0], am[:, 1], w[:, 0], w[:, 1]) / denom
    ok = (
        (np.abs(denom) > 1e-300)
        & (t > 0.0)
        & (t < 1.0)
        & (s >= 0.0)
        & (s <= 1.0)
    )
    out = []
    for e in np.nonzero(ok)[0]:
        q = idx.ea[e] + s[e] * idx.ev[e]
        if np.hypot(*(q - u)) <= TOL or np.hypot(*(b - q)) <= TOL:
            continue
        out.append(np.stack([u, q, b]))
    return out


def _double_bounce_candidates(idx: SceneIndex, u: np.ndarray, b: np.ndarray):
    e = idx.n_edges
    m1 = idx.mirror(u)  # (E, 2), first reflection edge i
    m2 = idx.mirror(m1)  # (E, E, 2): m1[i] mirrored across edge j

    ea_j = idx.ea[None, :, :]
    ev_j = idx.ev[None, :, :]
    w2 = b[None, None, :] - m2  # segment m2 -> bs crosses edge j at q2
    am2 = ea_j - m2
    denom2 = _cross2(w2[..., 0], w2[..., 1], ev_j[..., 0], ev_j[..., 1])
    with np.errstate(divide="ignore", invalid="ignore"):
        t2 = _cross2(am2[..., 0], am2[..., 1], ev_j[..., 0], ev_j[..., 1]) / denom2
        s2 = _cross2(am2[..., 0], am2[..., 1], w2[..., 0], w2[..., 1]) / denom2
    ok = (
        (np.abs(denom2) > 1e-300)
        & (t2 > 0.0)
        & (t2 < 1.0)
        & (s2 >= 0.0)
        & (s2 <= 1.0)
        & ~np.eye(e, dtype=bool)
    )
    with np.errstate(invalid="ignore"):
        q2 = ea_j + np.nan_to_num(s2, posinf=0.0, neginf=0.0)[..., None] * ev_j

    ea_i = idx.ea[:, None, :]
    ev_i = idx.ev[:, None, :]
    w1 = q2 - m1[:, None, :]  # segment m1 -> q2 crosses edge i at q1
    am1 = ea_i - m1[:, None, :]
    denom1 = _cross2(w1[..., 0], w1[..., 1], ev_i[..., 0], ev_i[..., 1])
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = _cross2(am1[..., 0], am1[..., 1], ev_i[..., 0], ev_i[..., 1]) / denom1
        s1 = _cross2(am1[..., 0], am1[..., 1], w1[..., 0], w1[..., 1]) / denom1
    ok &= (
        (np.abs(denom1) > 1e-300)
        & (t1 > 0.0)
        & (t1 < 1.0)
        & (s1 >= 0.0)
        & (s1 <= 1.0)
    )
    with np.errstate(invalid="ignore"):
        q1 = ea_i + np.nan_to_num(s1, posinf=0.0, neginf=0.0)[..., None] * ev_i

    out = []
    for i, j in zip(*np.nonzero(ok)):
        v1, v2 = q1[i, j], q2[i, j]
        if (
            np.hypot(*(v1 - u)) <= TOL
            or np.hypot(*(v2 - v1)) <= TOL
            or np.hypot(*(b - v2)) <= TOL
        ):
            continue
        out.append(np.stack([u, v1, v2, b]))
    return out


def _dedupe(paths: list[PathDescriptor]) -> list[PathDescriptor]:
    kept: list[PathDescriptor] = []
    for p in paths:
        dup = False
        for q in reversed(kept):
            if p.delay - q.delay > _DEDUP_EPS:
                break
            if (
                angle_gap(p.aoa, q.aoa) <= _DEDUP_EPS
                and angle_gap(p.aod, q.aod) <= _DEDUP_EPS
            ):
                dup = True
                break
        if not dup:
            kept.append(p)
    return kept


def _apply_noise(
    paths: list[PathDescriptor], noise: PathNoise, i: int, j: int
) -> list[PathDescriptor]:
    if noise.angle_std_rad == 0.0 and noise.delay_std_s == 0.0:
        return paths
    rng = np.random.default_rng([int(noise.seed), i, j])
    out = []
    for p in paths:
        aoa = p.aoa + float(rng.normal(0.0, noise.angle_std_rad)) if noise.angle_std_rad else p.aoa
        aod = p.aod + float(rng.normal(0.0, noise.angle_std_rad)) if noise.angle_std_rad else p.aod
        delay = p.delay
        if noise.delay_std_s:
            delay = max(1e-15, delay + float(rng.normal(0.0, noise.delay_std_s)))
        out.append(PathDescriptor(aoa=aoa, aod=aod, delay=delay, truth=p.truth))
    out.sort(key=lambda p: (p.delay, p.aoa, p.aod))
    return out


def trace_scene(scene: Scene, cfg: TraceConfig = TraceConfig()) -> list[RadioLink]:
    """One RadioLink per (ue, bs) pair, in lexicographic (i, j) order."""
    idx = SceneIndex(scene)
    for i, p in enumerate(scene.ues):
        if idx.device_inside(p):
            raise DeviceInsideBuildingError(f"ue {i} is inside a building")
    for j, p in enumerate(scene.bss):
        if idx.device_inside(p):
            raise DeviceInsideBuildingError(f"bs {j} is inside a building")
    links = []
    for i, ue in enumerate(scene.ues):
        for j, bs in enumerate(scene.bss):
            paths = trace_pair(scene, ue, bs, cfg, index=idx)
            if cfg.noise is not None:
                paths = _apply_noise(paths, cfg.noise, i, j)
            links.append(RadioLink(ue_index=i, bs_index=j, paths=tuple(paths)))
    return links


# --- serialization ---------------------------------------------------------


def links_to_json(scene_id: str, links: list[RadioLink]) -> str:
    """Descriptor-only serialization; truth metadata is never written."""
    ordered = sorted(links, key=lambda l: (l.ue_index, l.bs_index))
    doc = {
        "scene_id": scene_id,
        "links": [
            {
                "ue": l.ue_index,
                "bs": l.bs_index,
                "paths": [[p.aoa, p.aod, p.delay] for p in l.paths],
            }
            for l in ordered
        ],
    }
    return json.dumps(doc, separators=(",", ":"))


def links_from_json(text: str) -> tuple[str, list[RadioLink]]:
    try:
        doc = json.loads(text)
        scene_id = str(doc["scene_id"])
        links = [
            RadioLink(
                ue_index=int(entry["ue"]),
                bs_index=int(entry["bs"]),
                paths=tuple(
                    PathDescriptor(aoa=float(a), aod=float(d), delay=float(t))
                    for a, d, t in entry["paths"]
                ),
            )
            for entry in doc["links"]
        ]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise InvariantViolationError(f"malformed links JSON: {e}") from e
    return scene_id, links
