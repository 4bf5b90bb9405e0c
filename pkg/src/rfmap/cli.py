"""Command-line entry point wiring the toolkit into reproducible pipelines.

Subcommands: generate, trace, encode, reconstruct, evaluate, render, and
pipeline (generate -> trace -> encode -> reconstruct -> evaluate). All
randomness derives from --seed; --workers only changes wall-clock time,
never artifacts. Exit codes: 0 success, 1 validation/usage error, 2 I/O
error. The last stdout line of ``evaluate`` (and ``pipeline``) is the JSON
report on a single line for downstream tools to parse.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import netpbm, tensorio
from .dataset import (
    DatasetManifest,
    build_dataset,
    load_manifest,
    paths_for,
)
from .encoder import encode_link_features, encode_scene_tensor
from .errors import RfmapError
from .grids import BinaryMap, GridSpec
from .metrics import EvalReport, evaluate_maps, render_overlay
from .raytracer import TraceConfig, links_from_json, links_to_json, trace_scene
from .reconstructor import ReconConfig, recon_inputs, reconstruct
from .scene import GenParams, scene_from_json


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on unknown flags, not argparse's 2
        self.print_usage(sys.stderr)
        raise _UsageError(message)


def _parse_ratios(text: str) -> tuple[float, float, float]:
    parts = [float(x) for x in text.split(",")]
    if len(parts) != 3:
        raise _UsageError(f"--split needs three comma-separated ratios, got {text!r}")
    return tuple(parts)  # type: ignore[return-value]


def _pmap(fn, jobs, workers: int) -> list:
    if workers <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


# --- per-scene jobs (top-level for pickling) --------------------------------


def _retrace_job(args) -> str:
    root, sid, trace_cfg = args
    p = paths_for(root, sid)
    scene = scene_from_json(p["scene"].read_text(encoding="utf-8"))
    links = trace_scene(scene, trace_cfg)
    p["links"].write_text(links_to_json(scene.id, links), encoding="utf-8")
    return sid


def _encode_job(args) -> str:
    root, sid, grid = args
    p = paths_for(root, sid)
    scene = scene_from_json(p["scene"].read_text(encoding="utf-8"))
    _, links = links_from_json(p["links"].read_text(encoding="utf-8"))
    tensor = encode_scene_tensor(scene, links, grid)
    tensorio.write_rft(p["tensor"], tensor)
    feats = {
        "scene_id": sid,
        "vectors": [
            {
                "ue": l.ue_index,
                "bs": l.bs_index,
                "v": encode_link_features(
                    l, scene.ues[l.ue_index], scene.bss[l.bs_index], scene.side_m
                ).tolist(),
            }
            for l in sorted(links, key=lambda l: (l.ue_index, l.bs_index))
        ],
    }
    fdir = root / "features"
    fdir.mkdir(parents=True, exist_ok=True)
    (fdir / f"{sid}.json").write_text(
        json.dumps(feats, separators=(",", ":")), encoding="utf-8"
    )
    return sid


def _reconstruct_job(args) -> str:
    root, sid, grid, cfg, outdir = args
    p = paths_for(root, sid)
    scene = scene_from_json(p["scene"].read_text(encoding="utf-8"))
    _, links = links_from_json(p["links"].read_text(encoding="utf-8"))
    result = reconstruct(recon_inputs(scene, links), grid, cfg)
    netpbm.write_pgm(
        Path(outdir) / f"{sid}.prob.pgm",
        np.round(result.prob * 255.0).astype(np.uint8),
    )
    netpbm.write_pbm(Path(outdir) / f"{sid}.pred.pbm", result.binary.bits)
    return sid


# --- subcommand implementations ---------------------------------------------


def _genparams_from_args(args) -> GenParams:
    return GenParams(
        n_ues=args.ues, n_bss=args.bss, side_m=args.side_m, seed=args.seed
    )


def _cmd_generate(args) -> int:
    params = _genparams_from_args(args)
    grid = GridSpec(args.grid_px, args.grid_px, args.side_m)
    trace_cfg = TraceConfig(max_bounces=args.max_bounces)
    build_dataset(
        params,
        n_scenes=args.scenes,
        split_ratios=_parse_ratios(args.split),
        seed=args.seed,
        root=Path(args.out),
        grid=grid,
        trace_cfg=trace_cfg,
        workers=args.workers,
    )
    print(f"dataset with {args.scenes} scenes written to {args.out}")
    return 0


def _cmd_trace(args) -> int:
    manifest = load_manifest(args.data)
    jobs = [(manifest.root, sid, manifest.trace) for sid in manifest.scene_ids]
    _pmap(_retrace_job, jobs, args.workers)
    print(f"re-traced {len(jobs)} scenes")
    return 0


def _cmd_encode(args) -> int:
    manifest = load_manifest(args.data)
    jobs = [(manifest.root, sid, manifest.grid) for sid in manifest.scene_ids]
    _pmap(_encode_job, jobs, args.workers)
    print(f"encoded {len(jobs)} scenes")
    return 0


def _cmd_reconstruct(args) -> int:
    manifest = load_manifest(args.data)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    cfg = ReconConfig()
    ids = manifest.ids_for(args.split)
    jobs = [(manifest.root, sid, manifest.grid, cfg, outdir) for sid in ids]
    _pmap(_reconstruct_job, jobs, args.workers)
    print(f"reconstructed {len(jobs)} scenes into {args.out}")
    return 0


def _load_pred_dir(pred_dir: Path) -> dict[str, BinaryMap]:
    preds = {}
    for path in sorted(pred_dir.glob("*.pred.pbm")):
        sid = path.name[: -len(".pred.pbm")]
        preds[sid] = BinaryMap(netpbm.read_pbm(path))
    return preds


def _load_gt_dir(gt_dir: Path) -> dict[str, BinaryMap]:
    gts = {}
    for path in sorted(gt_dir.glob("*.pbm")):
        if path.name.endswith(".pred.pbm"):
            continue
        gts[path.name[: -len(".pbm")]] = BinaryMap(netpbm.read_pbm(path))
    return gts


def _evaluate(pred_dir: Path, gt_dir: Path, side_m: float, out: Path | None) -> EvalReport:
    report = evaluate_maps(_load_gt_dir(gt_dir), _load_pred_dir(pred_dir), side_m)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "eval.json").write_text(report.to_json(), encoding="utf-8")
        (out / "eval.txt").write_text(report.to_table() + "\n", encoding="utf-8")
    print(report.to_table())
    print(report.to_json())
    return report


def _cmd_evaluate(args) -> int:
    _evaluate(
        Path(args.pred),
        Path(args.gt),
        args.side_m,
        Path(args.out) if args.out else None,
    )
    return 0


def _cmd_render(args) -> int:
    manifest = load_manifest(args.data)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    pred_dir = Path(args.pred)
    count = 0
    for sid in manifest.scene_ids:
        pred_path = pred_dir / f"{sid}.pred.pbm"
        if not pred_path.exists():
            continue
        p = paths_for(manifest.root, sid)
        scene = scene_from_json(p["scene"].read_text(encoding="utf-8"))
        gt = BinaryMap(netpbm.read_pbm(p["gt"]))
        pred = BinaryMap(netpbm.read_pbm(pred_path))
        img = render_overlay(gt, pred, scene.ues, scene.bss, manifest.grid)
        netpbm.write_ppm(outdir / f"{sid}.overlay.ppm", img)
        count += 1
    print(f"rendered {count} overlays into {args.out}")
    return 0


def _cmd_pipeline(args) -> int:
    out = Path(args.out)
    data = out / "data"
    pred = out / "pred"

    class _A:  # forward shared flags to the stage commands
        pass

    gen = _A()
    gen.__dict__.update(vars(args))
    gen.out = data
    _cmd_generate(gen)

    stage = _A()
    stage.data = data
    stage.workers = args.workers
    _cmd_trace(stage)
    _cmd_encode(stage)

    rec = _A()
    rec.data = data
    rec.out = pred
    rec.split = "all"
    rec.workers = args.workers
    _cmd_reconstruct(rec)

    _evaluate(pred, data / "gt", args.side_m, out)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="rfmap", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add_gen_flags(p):
        p.add_argument("--seed", type=int, required=True)
        p.add_argument("--scenes", type=int, default=50)
        p.add_argument("--grid-px", dest="grid_px", type=int, default=224)
        p.add_argument("--side-m", dest="side_m", type=float, default=200.0)
        p.add_argument("--ues", type=int, default=30)
        p.add_argument("--bss", type=int, default=5)
        p.add_argument("--max-bounces", dest="max_bounces", type=int, default=2)
        p.add_argument("--split", default="0.93,0.06,0.01", help="train,val,test ratios")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--out", required=True)

    p = sub.add_parser("generate", help="build a dataset (scenes, links, tensors, gt)")
    add_gen_flags(p)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("trace", help="re-trace links for an existing dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_trace)

    p = sub.add_parser("encode", help="re-encode tensors and feature vectors")
    p.add_argument("--data", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_encode)

    p = sub.add_parser("reconstruct", help="run the geometric baseline")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--split", default="all", choices=["all", "train", "val", "test"])
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_reconstruct)

    p = sub.add_parser("evaluate", help="score predictions against ground truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--side-m", dest="side_m", type=float, default=200.0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("render", help="write confusion overlays as PPM images")
    p.add_argument("--data", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("pipeline", help="generate, trace, encode, reconstruct, evaluate")
    add_gen_flags(p)
    p.set_defaults(func=_cmd_pipeline)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except RfmapError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
