#!/usr/bin/env python3
"""End-to-end demo on a single scene.

Generates a random scene, traces the radio links, encodes the ray tensor,
runs the geometric baseline, scores it, and writes the artifacts (scene
JSON, prediction maps, confusion overlay) into the output directory.

Usage: python3 scripts/run_demo.py [seed] [outdir]
"""

import sys
from pathlib import Path

import numpy as np

from rfmap import netpbm
from rfmap.grids import GridSpec
from rfmap.metrics import render_overlay, score_map
from rfmap.raytracer import TraceConfig, links_to_json, trace_scene
from rfmap.reconstructor import recon_inputs, reconstruct
from rfmap.scene import GenParams, generate_scene, rasterize_scene, scene_to_json


def main() -> int:
    seed = int(sys.argv[1]) if len(sys.argv) > 1 else 7
    outdir = Path(sys.argv[2]) if len(sys.argv) > 2 else Path("demo_out")
    outdir.mkdir(parents=True, exist_ok=True)

    scene = generate_scene(GenParams(seed=seed))
    grid = GridSpec(224, 224, scene.side_m)
    links = trace_scene(scene, TraceConfig())
    n_paths = sum(l.n_paths for l in links)
    print(f"{scene.id}: {len(scene.buildings)} buildings, "
          f"{len(links)} links, {n_paths} paths")

    gt = rasterize_scene(scene, grid)
    result = reconstruct(recon_inputs(scene, links), grid)
    scores = score_map(gt, result.binary, grid)
    print(f"evidence points: {len(result.evidence)}")
    print(f"iou={scores.iou:.4f} precision={scores.precision:.4f} "
          f"recall={scores.recall:.4f} hausdorff={scores.hausdorff_m:.1f}m "
          f"chamfer={scores.chamfer_m:.1f}m")

    (outdir / f"{scene.id}.json").write_text(scene_to_json(scene))
    (outdir / f"{scene.id}.links.json").write_text(links_to_json(scene.id, links))
    netpbm.write_pbm(outdir / f"{scene.id}.gt.pbm", gt.bits)
    netpbm.write_pbm(outdir / f"{scene.id}.pred.pbm", result.binary.bits)
    netpbm.write_pgm(
        outdir / f"{scene.id}.prob.pgm",
        np.round(result.prob * 255.0).astype(np.uint8),
    )
    overlay = render_overlay(gt, result.binary, scene.ues, scene.bss, grid)
    netpbm.write_ppm(outdir / f"{scene.id}.overlay.ppm", overlay)
    print(f"artifacts written to {outdir}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
