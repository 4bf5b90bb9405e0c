"""Dataset persistence: per-scene artifact files plus a manifest.

Directory layout::

    root/manifest.json
    root/scenes/<id>.json      scene geometry + devices
    root/links/<id>.json       traced radio links (descriptors only)
    root/tensors/<id>.rft      combined ray tensor (+ .rft.json sidecar)
    root/gt/<id>.pbm           ground-truth occupancy raster

The manifest is written last, so its presence marks a complete dataset.
Scene content depends only on (seed, index, params), never on worker
scheduling, which keeps directory trees byte-identical across runs.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import netpbm, tensorio
from .encoder import RayImageTensor, encode_scene_tensor
from .errors import CorruptFormatError, InvariantViolationError, RatioError
from .grids import BinaryMap, GridSpec
from .raytracer import RadioLink, TraceConfig, links_from_json, links_to_json, trace_scene
from .scene import GenParams, Scene, generate_scene, rasterize_scene, scene_from_json, scene_to_json

FORMAT_VERSION = 1
SPLIT_NAMES = ("train", "val", "test")
_SPLIT_STREAM_SALT = 7919


@dataclass(frozen=True)
class DatasetManifest:
    root: Path  # runtime location; not serialized
    format_version: int
    seed: int
    n_scenes: int
    generator: GenParams
    grid: GridSpec
    trace: TraceConfig
    split_ratios: tuple[float, float, float]
    scene_ids: tuple[str, ...]
    splits: dict[str, tuple[str, ...]]

    def __post_init__(self):
        ids = list(self.scene_ids)
        if len(set(ids)) != len(ids):
            raise InvariantViolationError("duplicate scene ids in manifest")
        assigned = [i for name in SPLIT_NAMES for i in self.splits.get(name, ())]
        if sorted(assigned) != sorted(ids):
            raise InvariantViolationError("splits are not disjoint and exhaustive")

    def split_of(self, scene_id: str) -> str:
        for name in SPLIT_NAMES:
            if scene_id in self.splits[name]:
                return name
        raise KeyError(scene_id)

    def ids_for(self, split: str) -> tuple[str, ...]:
        if split == "all":
            return self.scene_ids
        return self.splits[split]


def scene_seed(master_seed: int, k: int) -> int:
    """Per-scene RNG seed derived from the dataset seed and scene index."""
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(k),))
    return int(ss.generate_state(1, np.uint64)[0])


def largest_remainder_split(n: int, ratios: tuple[float, float, float]) -> tuple[int, int, int]:
    """Apportion n items to the ratios exactly (largest-remainder rounding)."""
    if len(ratios) != 3 or any(r <= 0.0 for r in ratios):
        raise RatioError(f"ratios must be three positive numbers, got {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise RatioError(f"ratios must sum to 1, got {sum(ratios)}")
    raw = [n * r for r in ratios]
    base = [int(x) for x in raw]
    rem = n - sum(base)
    order = sorted(range(3), key=lambda i: (-(raw[i] - base[i]), i))
    for i in order[:rem]:
        base[i] += 1
    return tuple(base)  # type: ignore[return-value]


def assign_splits(
    scene_ids: list[str], ratios: tuple[float, float, float], seed: int
) -> dict[str, tuple[str, ...]]:
    """Random split assignment, deterministic in (seed, n, ratios) only."""
    sizes = largest_remainder_split(len(scene_ids), ratios)
    rng = np.random.default_rng([int(seed), _SPLIT_STREAM_SALT])
    perm = rng.permutation(len(scene_ids))
    out: dict[str, tuple[str, ...]] = {}
    pos = 0
    for name, size in zip(SPLIT_NAMES, sizes):
        chunk = perm[pos : pos + size]
        out[name] = tuple(scene_ids[i] for i in sorted(chunk))
        pos += size
    return out


# --- per-scene jobs (top-level so worker pools can pickle them) ------------


def paths_for(root: Path, scene_id: str) -> dict[str, Path]:
    return {
        "scene": root / "scenes" / f"{scene_id}.json",
        "links": root / "links" / f"{scene_id}.json",
        "tensor": root / "tensors" / f"{scene_id}.rft",
        "gt": root / "gt" / f"{scene_id}.pbm",
    }


def build_scene_files(
    root: Path,
    scene_id: str,
    params: GenParams,
    grid: GridSpec,
    trace_cfg: TraceConfig,
) -> str:
    """Generate, trace, encode and rasterize one scene; writes all files."""
    scene = generate_scene(params, scene_id=scene_id)
    links = trace_scene(scene, trace_cfg)
    tensor = encode_scene_tensor(scene, links, grid)
    gt = rasterize_scene(scene, grid)
    p = paths_for(root, scene_id)
    p["scene"].write_text(scene_to_json(scene), encoding="utf-8")
    p["links"].write_text(links_to_json(scene.id, links), encoding="utf-8")
    tensorio.write_rft(p["tensor"], tensor)
    netpbm.write_pbm(p["gt"], gt.bits)
    return scene_id


def _build_scene_files_star(args) -> str:
    return build_scene_files(*args)


def build_dataset(
    params: GenParams,
    n_scenes: int,
    split_ratios: tuple[float, float, float],
    seed: int,
    root,
    grid: GridSpec | None = None,
    trace_cfg: TraceConfig = TraceConfig(),
    workers: int = 1,
) -> DatasetManifest:
    """Write a complete dataset under ``root`` and return its manifest.

    ``params.seed`` is ignored: each scene uses a seed derived from
    (``seed``, index), and ids follow ``scene_<seed>_<k>``.
    """
    if n_scenes < 1:
        raise ValueError("n_scenes must be >= 1")
    sizes = largest_remainder_split(n_scenes, split_ratios)  # validates ratios
    del sizes
    root = Path(root)
    if grid is None:
        grid = GridSpec(224, 224, params.side_m)
    for sub in ("scenes", "links", "tensors", "gt"):
        (root / sub).mkdir(parents=True, exist_ok=True)

    scene_ids = [f"scene_{int(seed)}_{k}" for k in range(n_scenes)]
    jobs = [
        (root, sid, replace(params, seed=scene_seed(seed, k)), grid, trace_cfg)
        for k, sid in enumerate(scene_ids)
    ]
    if workers <= 1:
        for job in jobs:
            _build_scene_files_star(job)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            list(pool.map(_build_scene_files_star, jobs))

    manifest = DatasetManifest(
        root=root,
        format_version=FORMAT_VERSION,
        seed=int(seed),
        n_scenes=n_scenes,
        generator=params,
        grid=grid,
        trace=trace_cfg,
        split_ratios=tuple(split_ratios),  # type: ignore[arg-type]
        scene_ids=tuple(scene_ids),
        splits=assign_splits(scene_ids, tuple(split_ratios), seed),  # type: ignore[arg-type]
    )
    save_manifest(manifest)
    return manifest


# --- manifest serialization -------------------------------------------------


def _genparams_to_dict(p: GenParams) -> dict:
    return {
        "n_buildings": list(p.n_buildings),
        "building_w_m": list(p.building_w_m),
        "building_h_m": list(p.building_h_m),
        "n_ues": p.n_ues,
        "n_bss": p.n_bss,
        "side_m": p.side_m,
        "min_gap_m": p.min_gap_m,
        "seed": int(p.seed),
    }


def _genparams_from_dict(d: dict) -> GenParams:
    return GenParams(
        n_buildings=tuple(d["n_buildings"]),
        building_w_m=tuple(d["building_w_m"]),
        building_h_m=tuple(d["building_h_m"]),
        n_ues=int(d["n_ues"]),
        n_bss=int(d["n_bss"]),
        side_m=float(d["side_m"]),
        min_gap_m=float(d["min_gap_m"]),
        seed=int(d["seed"]),
    )


def save_manifest(manifest: DatasetManifest) -> None:
    doc = {
        "format_version": manifest.format_version,
        "seed": manifest.seed,
        "n_scenes": manifest.n_scenes,
        "generator": _genparams_to_dict(manifest.generator),
        "grid": {
            "width_px": manifest.grid.width_px,
            "height_px": manifest.grid.height_px,
            "side_m": manifest.grid.side_m,
        },
        "trace": {
            "max_bounces": manifest.trace.max_bounces,
            "max_paths_per_pair": manifest.trace.max_paths_per_pair,
            "c": manifest.trace.c,
        },
        "split_ratios": list(manifest.split_ratios),
        "scene_ids": list(manifest.scene_ids),
        "splits": {k: list(v) for k, v in manifest.splits.items()},
    }
    (manifest.root / "manifest.json").write_text(
        json.dumps(doc, separators=(",", ":")), encoding="utf-8"
    )


def load_manifest(root) -> DatasetManifest:
    root = Path(root)
    path = root / "manifest.json"
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise CorruptFormatError(f"{path}: not valid JSON: {e}") from e
    try:
        g = doc["grid"]
        t = doc["trace"]
        return DatasetManifest(
            root=root,
            format_version=int(doc["format_version"]),
            seed=int(doc["seed"]),
            n_scenes=int(doc["n_scenes"]),
            generator=_genparams_from_dict(doc["generator"]),
            grid=GridSpec(int(g["width_px"]), int(g["height_px"]), float(g["side_m"])),
            trace=TraceConfig(
                max_bounces=int(t["max_bounces"]),
                max_paths_per_pair=int(t["max_paths_per_pair"]),
                c=float(t["c"]),
            ),
            split_ratios=tuple(float(r) for r in doc["split_ratios"]),  # type: ignore[arg-type]
            scene_ids=tuple(doc["scene_ids"]),
            splits={k: tuple(v) for k, v in doc["splits"].items()},
        )
    except (KeyError, TypeError, ValueError) as e:
        raise CorruptFormatError(f"{path}: malformed manifest: {e}") from e


# --- loading ---------------------------------------------------------------


@dataclass(frozen=True)
class SceneBundle:
    scene: Scene
    links: tuple[RadioLink, ...]
    tensor: RayImageTensor
    gt: BinaryMap


def load_scene_bundle(manifest: DatasetManifest, scene_id: str) -> SceneBundle:
    """Load and validate all four artifacts of one scene."""
    if scene_id not in manifest.scene_ids:
        raise KeyError(f"{scene_id} not in manifest")
    p = paths_for(manifest.root, scene_id)
    scene = scene_from_json(p["scene"].read_text(encoding="utf-8"))
    if scene.id != scene_id:
        raise InvariantViolationError(
            f"{p['scene']}: contains id {scene.id!r}, expected {scene_id!r}"
        )
    sid, links = links_from_json(p["links"].read_text(encoding="utf-8"))
    if sid != scene_id:
        raise InvariantViolationError(
            f"{p['links']}: contains id {sid!r}, expected {scene_id!r}"
        )
    tensor = tensorio.read_rft(p["tensor"])
    if tensor.grid != manifest.grid:
        raise InvariantViolationError(
            f"{p['tensor']}: grid differs from manifest grid"
        )
    if tensor.n_channels != 2 * len(scene.ues):
        raise InvariantViolationError(
            f"{p['tensor']}: {tensor.n_channels} channels for {len(scene.ues)} UEs"
        )
    gt_bits = netpbm.read_pbm(p["gt"])
    if gt_bits.shape != (manifest.grid.height_px, manifest.grid.width_px):
        raise InvariantViolationError(f"{p['gt']}: dimensions differ from manifest grid")
    return SceneBundle(scene=scene, links=tuple(links), tensor=tensor, gt=BinaryMap(gt_bits))
