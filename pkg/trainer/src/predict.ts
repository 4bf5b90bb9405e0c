/** Export binarized predictions in the evaluation CLI's PBM format. */

import * as fs from 'node:fs';
import * as path from 'node:path';
import { Manifest, loadManifest, loadSample } from './data.js';
import { writePbm } from './netpbm.js';
import { UNet } from './unet.js';

export function predictSplit(
  checkpointPath: string,
  datasetRoot: string,
  split: 'train' | 'val' | 'test',
  outDir: string,
  log: (msg: string) => void = console.log
): string[] {
  const manifest: Manifest = loadManifest(datasetRoot);
  const net = UNet.load(checkpointPath);
  fs.mkdirSync(outDir, { recursive: true });
  const h = manifest.gridPx;
  const written: string[] = [];
  for (const id of manifest.splits[split]) {
    const sample = loadSample(manifest, id);
    const input = new Float64Array(sample.tensor.data.length);
    for (let i = 0; i < input.length; i++) input[i] = sample.tensor.data[i];
    const prob = net.predict(input, h, h);
    const bits = new Uint8Array(prob.length);
    for (let i = 0; i < prob.length; i++) bits[i] = prob[i] >= 0.5 ? 1 : 0;
    const file = path.join(outDir, `${id}.pred.pbm`);
    writePbm(file, { width: h, height: h, bits });
    written.push(file);
  }
  log(`wrote ${written.length} ${split}-split predictions to ${outDir}`);
  return written;
}
