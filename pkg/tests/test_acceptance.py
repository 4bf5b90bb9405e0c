"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines and
timings. Every tolerance is pinned here; nothing is deferred.
"""

import functools
import hashlib
import json
import math
import shutil
import time
from pathlib import Path

import numpy as np
import pytest

from rfmap import netpbm, tensorio
from rfmap.cli import main
from rfmap.dataset import build_dataset, load_manifest, load_scene_bundle, paths_for
from rfmap.geometry import Segment, segment_intersects_polygon_interior
from rfmap.grids import BinaryMap, GridSpec
from rfmap.metrics import chamfer_points, hausdorff_points, iou, precision_recall
from rfmap.raytracer import (
    C_LIGHT,
    TraceConfig,
    links_from_json,
    links_to_json,
    trace_scene,
)
from rfmap.geometry import Ray, ray_ray_intersection
from rfmap.reconstructor import recon_inputs, reconstruct
from rfmap.scene import (
    GenParams,
    generate_scene,
    rasterize_scene,
    scene_from_json,
    scene_to_json,
)

# Frozen on the first validated run of `pipeline --seed 7 --scenes 50`
# (defaults: 224 px, 200 m, 30 UEs, 5 BSs, 2 bounces).
PIPELINE_MEAN_IOU_FIXTURE = 0.022546668012873316


def criterion(name, budget_s=None):
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            t0 = time.time()
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"\n[FAIL] {name}")
                raise
            dt = time.time() - t0
            print(f"\n[PASS] {name} ({dt:.1f}s)")
            if budget_s is not None:
                assert dt < budget_s, f"{name}: {dt:.1f}s exceeds {budget_s}s budget"
        return wrapper
    return deco


# --- 1. metric oracle equivalence -------------------------------------------


def _brute_min_sq(a, b):
    dx = a[:, 0][:, None] - b[:, 0][None, :]
    dy = a[:, 1][:, None] - b[:, 1][None, :]
    return (dx * dx + dy * dy).min(axis=1)


def _brute_hausdorff(a, b):
    return math.sqrt(max(_brute_min_sq(a, b).max(), _brute_min_sq(b, a).max()))


def _brute_chamfer(a, b):
    return 0.5 * (
        float(np.sqrt(_brute_min_sq(a, b)).mean())
        + float(np.sqrt(_brute_min_sq(b, a)).mean())
    )


@criterion("metric oracle equivalence (bitwise, 200 point-set pairs + masks)", 10.0)
def test_metric_oracle_equivalence():
    rng = np.random.default_rng(424242)
    for _ in range(200):
        na, nb = rng.integers(1, 501, 2)
        a = rng.uniform(-1000.0, 1000.0, (int(na), 2))
        b = rng.uniform(-1000.0, 1000.0, (int(nb), 2))
        assert hausdorff_points(a, b) == _brute_hausdorff(a, b)
        assert chamfer_points(a, b) == _brute_chamfer(a, b)

    def bm(rows):
        return BinaryMap(np.array(rows, dtype=bool))

    z = [[0, 0], [0, 0]]
    o = [[1, 1], [1, 1]]
    cases = [
        # (gt, pred, iou, precision, recall) -- hand-enumerated
        (o, o, 1.0, 1.0, 1.0),
        (z, z, 1.0, 1.0, 1.0),
        (o, z, 0.0, 0.0, 0.0),
        (z, o, 0.0, 0.0, 0.0),
        ([[1, 0], [0, 0]], [[0, 1], [0, 0]], 0.0, 0.0, 0.0),
        ([[1, 1], [0, 0]], [[1, 0], [0, 0]], 0.5, 1.0, 0.5),
        ([[1, 1], [1, 1]], [[1, 1], [0, 0]], 0.5, 1.0, 0.5),
        ([[1, 0], [0, 1]], [[1, 1], [1, 1]], 0.5, 0.5, 1.0),
        ([[1, 1], [1, 0]], [[0, 1], [1, 1]], 2 / 4, 2 / 3, 2 / 3),
        ([[1, 1, 0], [0, 0, 0]], [[0, 1, 1], [0, 0, 0]], 1 / 3, 0.5, 0.5),
        ([[1, 1, 1], [1, 0, 0]], [[1, 0, 0], [1, 0, 0]], 0.5, 1.0, 0.5),
        ([[0, 1], [1, 1]], [[1, 1], [1, 0]], 2 / 4, 2 / 3, 2 / 3),
    ]
    assert len(cases) >= 10
    for gt, pred, want_iou, want_p, want_r in cases:
        g, p = bm(gt), bm(pred)
        assert iou(g, p) == pytest.approx(want_iou, abs=1e-15)
        got_p, got_r = precision_recall(g, p)
        assert got_p == pytest.approx(want_p, abs=1e-15)
        assert got_r == pytest.approx(want_r, abs=1e-15)


# --- 2. ray-tracer correctness -----------------------------------------------


@criterion("ray tracer: specular consistency, occlusion soundness, LOS delay", 60.0)
def test_ray_tracer_correctness():
    for k in range(100):
        scene = generate_scene(GenParams(seed=600_000 + k))
        links = trace_scene(scene, TraceConfig())
        for link in links:
            ue = scene.ues[link.ue_index]
            bs = scene.bss[link.bs_index]
            for p in link.paths:
                # occlusion soundness: re-check every leg with the scalar op
                vs = p.truth.vertices
                for a, b in zip(vs, vs[1:]):
                    seg = Segment(a, b)
                    for poly in scene.buildings:
                        assert not segment_intersects_polygon_interior(seg, poly)
                if p.truth.bounces == 0:
                    want = ue.dist(bs) / C_LIGHT
                    assert abs(p.delay - want) <= 1e-12 * want
                elif p.truth.bounces == 1:
                    q = ray_ray_intersection(Ray(ue, p.aod), Ray(bs, p.aoa))
                    assert q is not None
                    d = min(
                        _point_edge_dist(q, e)
                        for b_ in scene.buildings
                        for e in b_.edges()
                    )
                    assert d < 1e-6
                    assert abs(ue.dist(q) + q.dist(bs) - p.delay * C_LIGHT) < 1e-6


def _point_edge_dist(p, e):
    ex, ey = e.b.x - e.a.x, e.b.y - e.a.y
    t = ((p.x - e.a.x) * ex + (p.y - e.a.y) * ey) / (ex * ex + ey * ey)
    t = min(1.0, max(0.0, t))
    return math.hypot(p.x - (e.a.x + t * ex), p.y - (e.a.y + t * ey))


# --- 3. reconstruction soundness ---------------------------------------------


@criterion("reconstruction: zero carved-on-building pixels, 95% evidence on walls", 180.0)
def test_reconstruction_soundness():
    grid = GridSpec(224, 224, 200.0)
    mpp = grid.meters_per_px
    violations = 0
    ev_total = 0
    ev_on_wall = 0
    for k in range(100):
        scene = generate_scene(
            GenParams(n_ues=30, n_bss=5, side_m=200.0, seed=1 + k)
        )
        gt = rasterize_scene(scene, grid)
        links = trace_scene(scene, TraceConfig())
        result = reconstruct(recon_inputs(scene, links), grid)
        violations += int(((result.free_votes > 0) & gt.bits).sum())
        edges = [e for b in scene.buildings for e in b.edges()]
        for ev in result.evidence:
            ev_total += 1
            d = min(_point_edge_dist(ev.position, e) for e in edges)
            if d <= mpp:  # 1 px discretization tolerance
                ev_on_wall += 1
    assert violations == 0, f"{violations} carved pixels overlap ground truth"
    assert ev_total > 0
    frac = ev_on_wall / ev_total
    assert frac >= 0.95, f"only {frac:.4f} of evidence within 1 px of a wall"


# --- 4. end-to-end regression --------------------------------------------------


def _run_pipeline(out: Path, workers: int) -> bytes:
    rc = main(
        ["pipeline", "--seed", "7", "--scenes", "50", "--out", str(out),
         "--workers", str(workers)]
    )
    assert rc == 0
    data = (out / "eval.json").read_bytes()
    shutil.rmtree(out)  # ~600 MB per tree; free it immediately
    return data


@criterion("end-to-end: byte-stable eval report, frozen mean IoU fixture")
def test_end_to_end_regression(tmp_path):
    a = _run_pipeline(tmp_path / "a", workers=1)
    b = _run_pipeline(tmp_path / "b", workers=1)
    c = _run_pipeline(tmp_path / "c", workers=3)
    assert hashlib.sha256(a).hexdigest() == hashlib.sha256(b).hexdigest()
    assert hashlib.sha256(a).hexdigest() == hashlib.sha256(c).hexdigest()
    mean_iou = json.loads(a)["mean"]["iou"]
    assert abs(mean_iou - PIPELINE_MEAN_IOU_FIXTURE) <= 0.001, (
        f"mean IoU {mean_iou} drifted from fixture {PIPELINE_MEAN_IOU_FIXTURE}"
    )


# --- 5. format round-trips ------------------------------------------------------


@criterion("format round-trips: scene/links JSON, RFT1, PBM/PGM/PPM byte-identical")
def test_format_round_trips(tmp_path):
    manifest = build_dataset(
        GenParams(n_ues=5, n_bss=2),
        n_scenes=3,
        split_ratios=(0.5, 0.25, 0.25),
        seed=11,
        root=tmp_path / "data",
        grid=GridSpec(64, 64, 200.0),
    )
    for sid in manifest.scene_ids:
        p = paths_for(manifest.root, sid)
        bundle = load_scene_bundle(manifest, sid)

        scene_bytes = p["scene"].read_bytes()
        assert scene_to_json(scene_from_json(scene_bytes.decode())).encode() == scene_bytes

        links_bytes = p["links"].read_bytes()
        sid2, links = links_from_json(links_bytes.decode())
        assert links_to_json(sid2, links).encode() == links_bytes

        tensor_bytes = p["tensor"].read_bytes()
        sidecar_bytes = tensorio.sidecar_path(p["tensor"]).read_bytes()
        out = tmp_path / "resave.rft"
        tensorio.write_rft(out, bundle.tensor)
        assert out.read_bytes() == tensor_bytes
        assert tensorio.sidecar_path(out).read_bytes() == sidecar_bytes

        gt_bytes = p["gt"].read_bytes()
        out_gt = tmp_path / "resave.pbm"
        netpbm.write_pbm(out_gt, netpbm.read_pbm(p["gt"]))
        assert out_gt.read_bytes() == gt_bytes

    # PGM / PPM via the prediction and render paths
    pred_dir = tmp_path / "pred"
    assert main(["reconstruct", "--data", str(manifest.root), "--out", str(pred_dir)]) == 0
    assert main(["render", "--data", str(manifest.root), "--pred", str(pred_dir),
                 "--out", str(tmp_path / "render")]) == 0
    pgm = sorted(pred_dir.glob("*.prob.pgm"))[0]
    out_pgm = tmp_path / "resave.pgm"
    netpbm.write_pgm(out_pgm, netpbm.read_pgm(pgm))
    assert out_pgm.read_bytes() == pgm.read_bytes()
    ppm = sorted((tmp_path / "render").glob("*.overlay.ppm"))[0]
    out_ppm = tmp_path / "resave.ppm"
    netpbm.write_ppm(out_ppm, netpbm.read_ppm(ppm))
    assert out_ppm.read_bytes() == ppm.read_bytes()
