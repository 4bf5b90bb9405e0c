/**
 * Training loop: seeded, single-threaded, gradient accumulation over small
 * batches, epoch-wise device subsampling, best checkpoint by validation
 * dice loss.
 */

import * as fs from 'node:fs';
import * as path from 'node:path';
import { Manifest, Sample, loadManifest, loadSplit } from './data.js';
import { diceLossWithGrad, diceLoss } from './loss.js';
import { Tape, tensor } from './nn.js';
import { Rng } from './rng.js';
import { applyUeMask, drawSubsample } from './subsample.js';
import { UNet } from './unet.js';

export interface TrainConfig {
  datasetRoot: string;
  outDir: string;
  epochs: number; // default 10
  batchSize: number;
  lr: number; // default 3e-4
  seed: number;
  subsample: boolean;
  baseFilters: number;
  levels: number;
}

export const DEFAULTS = {
  epochs: 10,
  batchSize: 4,
  lr: 3e-4,
  seed: 0,
  subsample: true,
  baseFilters: 8,
  levels: 4,
};

export interface EpochStats {
  epoch: number;
  trainLoss: number;
  valLoss: number;
}

export interface TrainResult {
  checkpointPath: string;
  logPath: string;
  epochs: EpochStats[];
  bestEpoch: number;
}

export function train(cfg: TrainConfig, log: (msg: string) => void = console.log): TrainResult {
  const manifest = loadManifest(cfg.datasetRoot);
  const trainSet = loadSplit(manifest, 'train');
  const valSet = loadSplit(manifest, 'val');
  if (trainSet.length === 0 || valSet.length === 0) {
    throw new Error('dataset needs non-empty train and val splits');
  }
  const h = manifest.gridPx;
  const inCh = 2 * manifest.nUes;
  if (h % (1 << (cfg.levels - 1)) !== 0) {
    throw new Error(`grid ${h} not divisible by 2^${cfg.levels - 1}`);
  }

  const net = new UNet({ inChannels: inCh, base: cfg.baseFilters, levels: cfg.levels }, cfg.seed);
  log(`unet: ${net.countParams()} params, ${inCh} input channels, ${h}x${h} grid`);
  log(`train ${trainSet.length} / val ${valSet.length} scenes`);
  const opt = net.makeOptimizer(cfg.lr);
  const rng = new Rng(cfg.seed ^ 0x5eed);
  const pixels = h * h;
  const masked = new Float64Array(inCh * pixels);

  const sampleInput = (s: Sample, epochRng: Rng | null): Float64Array => {
    if (epochRng !== null && cfg.subsample) {
      const mask = drawSubsample(manifest.nUes, manifest.nBss, epochRng);
      applyUeMask(s.tensor.data, inCh, pixels, mask.ueKeep, masked);
    } else {
      for (let i = 0; i < masked.length; i++) masked[i] = s.tensor.data[i];
    }
    return masked;
  };

  const valLoss = (): number => {
    let total = 0;
    for (const s of valSet) {
      const pred = net.predict(sampleInput(s, null), h, h);
      total += diceLoss(pred, s.target);
    }
    return total / valSet.length;
  };

  const epochs: EpochStats[] = [];
  let bestEpoch = -1;
  let bestVal = Infinity;
  fs.mkdirSync(cfg.outDir, { recursive: true });
  const checkpointPath = path.join(cfg.outDir, 'best.unet.json');

  for (let epoch = 1; epoch <= cfg.epochs; epoch++) {
    const t0 = Date.now();
    const order = [...trainSet];
    rng.shuffle(order);
    const epochRng = new Rng((cfg.seed ^ (epoch * 0x9e37)) >>> 0);
    let lossSum = 0;
    let sinceStep = 0;
    opt.zeroGrads();
    for (const s of order) {
      const x = tensor(inCh, h, h);
      x.data.set(sampleInput(s, epochRng));
      const tape = new Tape();
      const out = net.forward(x, tape);
      const loss = diceLossWithGrad(out.data, s.target, out.grad);
      lossSum += loss;
      // scale so accumulated grads average over the batch
      for (let i = 0; i < out.grad.length; i++) out.grad[i] /= cfg.batchSize;
      tape.backward();
      sinceStep += 1;
      if (sinceStep === cfg.batchSize) {
        opt.step();
        opt.zeroGrads();
        sinceStep = 0;
      }
    }
    if (sinceStep > 0) {
      opt.step();
      opt.zeroGrads();
    }
    const trainLoss = lossSum / order.length;
    const vl = valLoss();
    epochs.push({ epoch, trainLoss, valLoss: vl });
    log(
      `epoch ${epoch}/${cfg.epochs}: train dice ${trainLoss.toFixed(4)} ` +
        `val dice ${vl.toFixed(4)} (${((Date.now() - t0) / 1000).toFixed(1)}s)`
    );
    if (vl < bestVal) {
      bestVal = vl;
      bestEpoch = epoch;
      net.save(checkpointPath);
    }
  }

  const logPath = path.join(cfg.outDir, 'training_log.json');
  fs.writeFileSync(
    logPath,
    JSON.stringify({ config: cfg, epochs, bestEpoch }, null, 1)
  );
  return { checkpointPath, logPath, epochs, bestEpoch };
}
