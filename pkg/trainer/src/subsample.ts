/**
 * Epoch-wise device subsampling, mirroring the dataset toolkit's rule:
 * keep a uniform count in [ceil(n/2), n] of UEs and of BSs each epoch and
 * zero the channels of everything dropped. The stored tensors are already
 * max-combined across base stations (two channels per UE), so only the UE
 * mask has channels to zero; the BS draw is still performed so the rule
 * stays faithful where it can act.
 */

import { Rng } from './rng.js';

export interface SubsampleMask {
  ueKeep: boolean[];
  bsKeep: boolean[];
}

export function drawSubsample(nUes: number, nBss: number, rng: Rng): SubsampleMask {
  const nKeepUe = rng.int(Math.ceil(nUes / 2), nUes);
  const ueIdx = new Set(rng.choose(nUes, nKeepUe));
  const nKeepBs = rng.int(Math.ceil(nBss / 2), nBss);
  const bsIdx = new Set(rng.choose(nBss, nKeepBs));
  return {
    ueKeep: Array.from({ length: nUes }, (_, i) => ueIdx.has(i)),
    bsKeep: Array.from({ length: nBss }, (_, i) => bsIdx.has(i)),
  };
}

/**
 * Copy a combined (2 channels per UE) tensor into `out`, zeroing the
 * channels of dropped UEs. Channel count never changes.
 */
export function applyUeMask(
  data: ArrayLike<number>,
  channels: number,
  pixelsPerChannel: number,
  ueKeep: boolean[],
  out: Float64Array
): void {
  if (channels !== 2 * ueKeep.length) {
    throw new Error(`channel count ${channels} does not match ${ueKeep.length} UEs`);
  }
  for (let ch = 0; ch < channels; ch++) {
    const base = ch * pixelsPerChannel;
    if (ueKeep[ch >> 1]) {
      for (let i = 0; i < pixelsPerChannel; i++) out[base + i] = data[base + i];
    } else {
      out.fill(0, base, base + pixelsPerChannel);
    }
  }
}
