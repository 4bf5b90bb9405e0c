"""Link encoders: multi-channel ray-raster tensors and fixed-width features.

Ray channels: for every path, a ray is drawn from the BS along the AoA (or
from the UE along the AoD) out to the map boundary. A pixel is hit when the
ray passes within half a pixel of its center, so diagonal rays leave no
gaps. The ray value is the normalized path length ``min(1, delay*c/side)``
(the raw time-over-meters rule is dimensionally inconsistent), combined by
elementwise maximum.

Feature vectors: 5 path slots x 7 features, zero-padded, everything
normalized into the unit range except the unclamped normalized length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import LabelMismatchError
from .geometry import Point2, TWO_PI
from .grids import GridSpec, pixels_near_segment
from .raytracer import C_LIGHT, RadioLink
from .scene import Scene

N_PATH_SLOTS = 5
N_SLOT_FEATURES = 7
FEATURE_LEN = N_PATH_SLOTS * N_SLOT_FEATURES


@dataclass(frozen=True)
class ChannelLabel:
    """Which link(s) and which angle a channel encodes.

    ``bs is None`` marks a channel already max-combined across base
    stations for one UE.
    """

    role: str  # "aoa" | "aod"
    ue: int
    bs: int | None = None

    def __post_init__(self):
        if self.role not in ("aoa", "aod"):
            raise ValueError(f"bad channel role {self.role!r}")

    def to_dict(self) -> dict:
        d = {"role": self.role, "ue": self.ue}
        if self.bs is not None:
            d["bs"] = self.bs
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ChannelLabel":
        return cls(role=str(d["role"]), ue=int(d["ue"]), bs=int(d["bs"]) if "bs" in d else None)


def pair_labels(n_ues: int, n_bss: int) -> tuple[ChannelLabel, ...]:
    return tuple(
        ChannelLabel(role, ue, bs)
        for ue in range(n_ues)
        for bs in range(n_bss)
        for role in ("aoa", "aod")
    )


def combined_labels(n_ues: int) -> tuple[ChannelLabel, ...]:
    return tuple(
        ChannelLabel(role, ue) for ue in range(n_ues) for role in ("aoa", "aod")
    )


@dataclass(frozen=True, eq=False)
class RayImageTensor:
    data: np.ndarray  # (C, h, w) float32 in [0, 1]
    labels: tuple[ChannelLabel, ...]
    grid: GridSpec

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float32)
        if data.ndim != 3:
            raise ValueError("tensor data must be (C, h, w)")
        if data.shape[0] != len(self.labels):
            raise LabelMismatchError(
                f"{data.shape[0]} channels but {len(self.labels)} labels"
            )
        if data.shape[1:] != (self.grid.height_px, self.grid.width_px):
            raise ValueError("tensor spatial shape does not match grid")
        if data.size and (float(data.min()) < 0.0 or float(data.max()) > 1.0):
            raise ValueError("tensor values must lie in [0, 1]")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def n_channels(self) -> int:
        return int(self.data.shape[0])


def rasterize_path_ray(
    origin: Point2,
    angle: float,
    value: float,
    grid: GridSpec,
    channel: np.ndarray,
) -> None:
    """Max-combine ``value`` into every pixel within half a pixel of the ray.

    The ray runs from ``origin`` to the map boundary. Traversal walks the
    major axis one pixel-step at a time and exact point-to-segment distance
    decides hits, so the result is independent of step phase.
    """
    if not 0.0 <= value <= 1.0:
        raise ValueError("ray value must lie in [0, 1]")
    side = grid.side_m
    if not (0.0 <= origin.x <= side and 0.0 <= origin.y <= side):
        raise ValueError("ray origin must lie within the map extent")
    if channel.shape != (grid.height_px, grid.width_px):
        raise ValueError("channel shape does not match grid")
    if value == 0.0:
        return

    dx, dy = math.cos(angle), math.sin(angle)
    u_exit = math.inf
    for o, d in ((origin.x, dx), (origin.y, dy)):
        if d > 1e-300:
            u_exit = min(u_exit, (side - o) / d)
        elif d < -1e-300:
            u_exit = min(u_exit, (0.0 - o) / d)
    u_exit = max(0.0, u_exit)
    rows, cols = pixels_near_segment(
        grid,
        origin.x,
        origin.y,
        origin.x + u_exit * dx,
        origin.y + u_exit * dy,
        0.5 * grid.meters_per_px,
    )
    np.maximum.at(channel, (rows, cols), np.float32(value))
    # the origin's own pixel always carries the value, even when the origin
    # sits in a pixel corner and the center misses the half-pixel band
    mpp = grid.meters_per_px
    orow = min(grid.height_px - 1, int(origin.y / mpp))
    ocol = min(grid.width_px - 1, int(origin.x / mpp))
    channel[orow, ocol] = max(channel[orow, ocol], np.float32(value))


def ray_value(delay: float, side_m: float, c: float = C_LIGHT) -> float:
    """Normalized path length, clamped to 1."""
    return min(1.0, delay * c / side_m)


def encode_pair(
    side_m: float,
    link: RadioLink,
    ue: Point2,
    bs: Point2,
    grid: GridSpec,
) -> tuple[np.ndarray, np.ndarray]:
    """AoA channel (rays from the BS) and AoD channel (rays from the UE)."""
    aoa_ch = np.zeros((grid.height_px, grid.width_px), np.float32)
    aod_ch = np.zeros((grid.height_px, grid.width_px), np.float32)
    for p in link.paths:
        v = ray_value(p.delay, side_m)
        rasterize_path_ray(bs, p.aoa, v, grid, aoa_ch)
        rasterize_path_ray(ue, p.aod, v, grid, aod_ch)
    return aoa_ch, aod_ch


def encode_scene_pair_tensor(
    scene: Scene, links: list[RadioLink], grid: GridSpec
) -> RayImageTensor:
    """Full per-pair tensor with 2|V||W| channels (ue-major, bs, aoa/aod)."""
    v, w = len(scene.ues), len(scene.bss)
    data = np.zeros((2 * v * w, grid.height_px, grid.width_px), np.float32)
    by_pair = {(l.ue_index, l.bs_index): l for l in links}
    for i in range(v):
        for j in range(w):
            link = by_pair.get((i, j))
            if link is None:
                continue
            aoa_ch, aod_ch = encode_pair(scene.side_m, link, scene.ues[i], scene.bss[j], grid)
            base = 2 * (i * w + j)
            data[base] = aoa_ch
            data[base + 1] = aod_ch
    return RayImageTensor(data=data, labels=pair_labels(v, w), grid=grid)


def combine_max_per_bs(
    tensor: RayImageTensor, n_ues: int, n_bss: int
) -> RayImageTensor:
    """Elementwise max over the BS axis, keeping one (AoA, AoD) pair per UE.

    Accepts channels in any order as long as the labels form exactly the
    (ue, bs, role) grid.
    """
    expected = set(pair_labels(n_ues, n_bss))
    got = list(tensor.labels)
    if len(got) != len(expected) or set(got) != expected:
        raise LabelMismatchError(
            f"labels do not form the {n_ues}x{n_bss}x2 pair grid"
        )
    out = np.zeros((2 * n_ues, tensor.grid.height_px, tensor.grid.width_px), np.float32)
    role_slot = {"aoa": 0, "aod": 1}
    for ch, lab in enumerate(tensor.labels):
        dst = 2 * lab.ue + role_slot[lab.role]
        np.maximum(out[dst], tensor.data[ch], out=out[dst])
    return RayImageTensor(data=out, labels=combined_labels(n_ues), grid=tensor.grid)


def encode_scene_tensor(
    scene: Scene, links: list[RadioLink], grid: GridSpec
) -> RayImageTensor:
    """Combined 2|V|-channel tensor, built without materializing pair channels.

    Equivalent to ``combine_max_per_bs(encode_scene_pair_tensor(...))``
    because max-combining is associative and commutative.
    """
    v = len(scene.ues)
    data = np.zeros((2 * v, grid.height_px, grid.width_px), np.float32)
    for link in links:
        ue = scene.ues[link.ue_index]
        bs = scene.bss[link.bs_index]
        for p in link.paths:
            val = ray_value(p.delay, scene.side_m)
            rasterize_path_ray(bs, p.aoa, val, grid, data[2 * link.ue_index])
            rasterize_path_ray(ue, p.aod, val, grid, data[2 * link.ue_index + 1])
    return RayImageTensor(data=data, labels=combined_labels(v), grid=grid)


def encode_link_features(
    link: RadioLink, ue: Point2, bs: Point2, side_m: float
) -> np.ndarray:
    """35 floats: 5 shortest paths x (ue, bs, aoa, aod, normalized length).

    Links are stored delay-sorted, so the first slots hold the shortest
    paths; missing paths stay zero.
    """
    out = np.zeros(FEATURE_LEN, np.float64)
    for k, p in enumerate(link.paths[:N_PATH_SLOTS]):
        out[k * N_SLOT_FEATURES : (k + 1) * N_SLOT_FEATURES] = (
            ue.x / side_m,
            ue.y / side_m,
            bs.x / side_m,
            bs.y / side_m,
            p.aoa / TWO_PI,
            p.aod / TWO_PI,
            p.delay * C_LIGHT / side_m,
        )
    return out


@dataclass(frozen=True)
class SubsampleResult:
    ue_keep: np.ndarray  # (|V|,) bool
    bs_keep: np.ndarray  # (|W|,) bool
    links: tuple[RadioLink, ...]  # links whose UE and BS are both kept


def subsample_links(
    links: list[RadioLink], n_ues: int, n_bss: int, rng: np.random.Generator
) -> SubsampleResult:
    """Epoch-style subsampling: keep uniform(ceil(n/2)..n) UEs and BSs.

    Dropped entities' channels are zeroed by :func:`mask_channels`; the
    channel count never changes.
    """
    n_keep_ue = int(rng.integers(math.ceil(n_ues / 2), n_ues + 1))
    ue_idx = np.sort(rng.choice(n_ues, size=n_keep_ue, replace=False))
    n_keep_bs = int(rng.integers(math.ceil(n_bss / 2), n_bss + 1))
    bs_idx = np.sort(rng.choice(n_bss, size=n_keep_bs, replace=False))
    ue_keep = np.zeros(n_ues, bool)
    ue_keep[ue_idx] = True
    bs_keep = np.zeros(n_bss, bool)
    bs_keep[bs_idx] = True
    kept = tuple(
        l for l in links if ue_keep[l.ue_index] and bs_keep[l.bs_index]
    )
    return SubsampleResult(ue_keep=ue_keep, bs_keep=bs_keep, links=kept)


def mask_channels(
    tensor: RayImageTensor, ue_keep: np.ndarray, bs_keep: np.ndarray
) -> RayImageTensor:
    """Zero the channels of dropped UEs/BSs, preserving the channel count."""
    data = tensor.data.copy()
    for ch, lab in enumerate(tensor.labels):
        dropped = not ue_keep[lab.ue] or (lab.bs is not None and not bs_keep[lab.bs])
        if dropped:
            data[ch] = 0.0
    return RayImageTensor(data=data, labels=tensor.labels, grid=tensor.grid)
