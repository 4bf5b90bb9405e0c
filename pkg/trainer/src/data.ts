/** Dataset access: manifest, per-scene tensors and ground-truth rasters. */

import * as fs from 'node:fs';
import * as path from 'node:path';
import { Bitmap, readPbm } from './netpbm.js';
import { RayTensor, readRft } from './rft.js';

export interface Manifest {
  root: string;
  seed: number;
  nScenes: number;
  nUes: number;
  nBss: number;
  gridPx: number;
  sideM: number;
  sceneIds: string[];
  splits: { train: string[]; val: string[]; test: string[] };
}

export function loadManifest(root: string): Manifest {
  const file = path.join(root, 'manifest.json');
  if (!fs.existsSync(file)) {
    throw new Error(`dataset manifest not found at ${file}`);
  }
  const doc = JSON.parse(fs.readFileSync(file, 'utf-8'));
  return {
    root,
    seed: doc.seed,
    nScenes: doc.n_scenes,
    nUes: doc.generator.n_ues,
    nBss: doc.generator.n_bss,
    gridPx: doc.grid.width_px,
    sideM: doc.grid.side_m,
    sceneIds: doc.scene_ids,
    splits: doc.splits,
  };
}

export interface Sample {
  id: string;
  tensor: RayTensor;
  gt: Bitmap;
  /** target as 0/1 floats, row-major, same layout as a prediction map */
  target: Float64Array;
}

export function tensorPath(m: Manifest, id: string): string {
  return path.join(m.root, 'tensors', `${id}.rft`);
}

export function gtPath(m: Manifest, id: string): string {
  return path.join(m.root, 'gt', `${id}.pbm`);
}

export function loadSample(m: Manifest, id: string): Sample {
  let t: RayTensor;
  try {
    t = readRft(tensorPath(m, id));
  } catch (e) {
    throw new Error(`scene ${id}: ${(e as Error).message}`);
  }
  const expected = 2 * m.nUes;
  if (t.channels !== expected) {
    throw new Error(
      `scene ${id}: tensor has ${t.channels} channels, manifest expects ${expected}`
    );
  }
  const gt = readPbm(gtPath(m, id));
  if (gt.width !== t.width || gt.height !== t.height) {
    throw new Error(`scene ${id}: ground truth ${gt.width}x${gt.height} != tensor`);
  }
  const target = new Float64Array(gt.bits.length);
  for (let i = 0; i < gt.bits.length; i++) target[i] = gt.bits[i];
  return { id, tensor: t, gt, target };
}

export function loadSplit(m: Manifest, split: 'train' | 'val' | 'test'): Sample[] {
  return m.splits[split].map((id) => loadSample(m, id));
}
