#!/usr/bin/env python3
"""Sweep carve-band widths against ground truth to validate soundness.

The reconstructor may only mark pixels free when their centers provably
avoid buildings, yet propagation legs graze walls tangentially and end on
them at reflection points. This experiment runs the full baseline over
many random scenes and counts carved (free-voted) pixel centers landing on
ground-truth building pixels, for a range of carve band half-widths. The
shipped ``_CARVE_HIT_FRAC`` in rfmap.reconstructor was chosen from this
sweep: the widest band whose violation count stays zero with margin.

Usage: python3 scripts/measure_carve_soundness.py [n_scenes] [base_seed]
"""

import sys
import time

import numpy as np

from rfmap import reconstructor
from rfmap.grids import GridSpec
from rfmap.raytracer import TraceConfig, trace_scene
from rfmap.reconstructor import ReconConfig, recon_inputs, reconstruct
from rfmap.scene import GenParams, generate_scene, rasterize_scene

FRACS = [0.5, 0.25, 0.1, 0.05, 0.02]


def main() -> int:
    n_scenes = int(sys.argv[1]) if len(sys.argv) > 1 else 100
    base_seed = int(sys.argv[2]) if len(sys.argv) > 2 else 1000
    grid = GridSpec(224, 224, 200.0)
    cfg = ReconConfig()
    shipped = reconstructor._CARVE_HIT_FRAC

    violations = {f: 0 for f in FRACS}
    carved = {f: 0 for f in FRACS}
    t0 = time.time()
    for k in range(n_scenes):
        scene = generate_scene(GenParams(seed=base_seed + k))
        gt = rasterize_scene(scene, grid).bits
        links = trace_scene(scene, TraceConfig())
        inputs = recon_inputs(scene, links)
        for frac in FRACS:
            reconstructor._CARVE_HIT_FRAC = frac
            try:
                result = reconstruct(inputs, grid, cfg)
            finally:
                reconstructor._CARVE_HIT_FRAC = shipped
            free = result.free_votes > 0
            violations[frac] += int((free & gt).sum())
            carved[frac] += int(free.sum())
    dt = time.time() - t0
    print(f"{n_scenes} scenes (base seed {base_seed}), {dt:.1f}s")
    print(f"{'frac':>6} {'violations':>11} {'carved_px':>11}")
    for frac in FRACS:
        print(f"{frac:>6} {violations[frac]:>11} {carved[frac]:>11}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
