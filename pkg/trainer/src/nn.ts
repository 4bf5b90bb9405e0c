/**
 * Minimal CPU neural-net kernels: enough to train a small U-Net.
 *
 * Single-sample tensors in CHW layout on Float64Array; batching is gradient
 * accumulation. Forward ops record backward closures on a tape, so the
 * network definition reads top-to-bottom and backward() replays it in
 * reverse. Everything is single-threaded and deterministic.
 */

import { Rng } from './rng.js';

export interface Tensor {
  data: Float64Array;
  grad: Float64Array;
  c: number;
  h: number;
  w: number;
}

export function tensor(c: number, h: number, w: number): Tensor {
  return {
    data: new Float64Array(c * h * w),
    grad: new Float64Array(c * h * w),
    c,
    h,
    w,
  };
}

export interface Param {
  name: string;
  data: Float64Array;
  grad: Float64Array;
  m: Float64Array; // Adam first moment
  v: Float64Array; // Adam second moment
}

export function param(name: string, size: number): Param {
  return {
    name,
    data: new Float64Array(size),
    grad: new Float64Array(size),
    m: new Float64Array(size),
    v: new Float64Array(size),
  };
}

export class Tape {
  private backs: Array<() => void> = [];

  record(fn: () => void): void {
    this.backs.push(fn);
  }

  /** Run all recorded backward closures, newest first, then clear. */
  backward(): void {
    for (let i = this.backs.length - 1; i >= 0; i--) this.backs[i]();
    this.backs = [];
  }

  clear(): void {
    this.backs = [];
  }
}

export interface ConvParam {
  w: Param; // (F, C, k, k) flattened
  b: Param; // (F)
  inC: number;
  outC: number;
  k: 1 | 3;
}

export function convParam(
  name: string,
  inC: number,
  outC: number,
  k: 1 | 3,
  rng: Rng
): ConvParam {
  const w = param(`${name}.w`, outC * inC * k * k);
  const b = param(`${name}.b`, outC);
  const std = Math.sqrt(2.0 / (inC * k * k)); // He init for relu nets
  for (let i = 0; i < w.data.length; i++) w.data[i] = rng.gauss() * std;
  return { w, b, inC, outC, k };
}

/** 3x3 same-padding convolution (k=3) or pointwise (k=1). */
export function conv(x: Tensor, p: ConvParam, tape: Tape): Tensor {
  const { h, w } = x;
  const out = tensor(p.outC, h, w);
  const k = p.k;
  const off = k === 3 ? 1 : 0;
  const X = x.data;
  const W = p.w.data;
  const O = out.data;
  for (let f = 0; f < p.outC; f++) {
    const oBase = f * h * w;
    const bias = p.b.data[f];
    for (let i = 0; i < h * w; i++) O[oBase + i] = bias;
    for (let c = 0; c < p.inC; c++) {
      const xBase = c * h * w;
      const wBase = (f * p.inC + c) * k * k;
      for (let ky = -off; ky <= off; ky++) {
        for (let kx = -off; kx <= off; kx++) {
          const wv = W[wBase + (ky + off) * k + (kx + off)];
          const y0 = Math.max(0, -ky);
          const y1 = Math.min(h, h - ky);
          const x0 = Math.max(0, -kx);
          const x1 = Math.min(w, w - kx);
          for (let y = y0; y < y1; y++) {
            const oRow = oBase + y * w;
            const xRow = xBase + (y + ky) * w + kx;
            for (let xx = x0; xx < x1; xx++) {
              O[oRow + xx] += wv * X[xRow + xx];
            }
          }
        }
      }
    }
  }
  tape.record(() => {
    const GO = out.grad;
    const GX = x.grad;
    const GW = p.w.grad;
    const GB = p.b.grad;
    for (let f = 0; f < p.outC; f++) {
      const oBase = f * h * w;
      let gb = 0;
      for (let i = 0; i < h * w; i++) gb += GO[oBase + i];
      GB[f] += gb;
      for (let c = 0; c < p.inC; c++) {
        const xBase = c * h * w;
        const wBase = (f * p.inC + c) * k * k;
        for (let ky = -off; ky <= off; ky++) {
          for (let kx = -off; kx <= off; kx++) {
            const wIdx = wBase + (ky + off) * k + (kx + off);
            const wv = W[wIdx];
            const y0 = Math.max(0, -ky);
            const y1 = Math.min(h, h - ky);
            const x0 = Math.max(0, -kx);
            const x1 = Math.min(w, w - kx);
            let gw = 0;
            for (let y = y0; y < y1; y++) {
              const oRow = oBase + y * w;
              const xRow = xBase + (y + ky) * w + kx;
              for (let xx = x0; xx < x1; xx++) {
                const go = GO[oRow + xx];
                gw += go * X[xRow + xx];
                GX[xRow + xx] += go * wv;
              }
            }
            GW[wIdx] += gw;
          }
        }
      }
    }
  });
  return out;
}

export function relu(x: Tensor, tape: Tape): Tensor {
  const out = tensor(x.c, x.h, x.w);
  const n = x.data.length;
  for (let i = 0; i < n; i++) out.data[i] = x.data[i] > 0 ? x.data[i] : 0;
  tape.record(() => {
    for (let i = 0; i < n; i++) {
      if (x.data[i] > 0) x.grad[i] += out.grad[i];
    }
  });
  return out;
}

/** 2x2 max pooling with stride 2; h and w must be even. */
export function maxPool2(x: Tensor, tape: Tape): Tensor {
  const { c, h, w } = x;
  const oh = h >> 1;
  const ow = w >> 1;
  const out = tensor(c, oh, ow);
  const arg = new Int32Array(c * oh * ow);
  for (let ch = 0; ch < c; ch++) {
    const xBase = ch * h * w;
    const oBase = ch * oh * ow;
    for (let y = 0; y < oh; y++) {
      for (let xx = 0; xx < ow; xx++) {
        const i00 = xBase + 2 * y * w + 2 * xx;
        let best = i00;
        if (x.data[i00 + 1] > x.data[best]) best = i00 + 1;
        if (x.data[i00 + w] > x.data[best]) best = i00 + w;
        if (x.data[i00 + w + 1] > x.data[best]) best = i00 + w + 1;
        out.data[oBase + y * ow + xx] = x.data[best];
        arg[oBase + y * ow + xx] = best;
      }
    }
  }
  tape.record(() => {
    for (let i = 0; i < arg.length; i++) x.grad[arg[i]] += out.grad[i];
  });
  return out;
}

/** 2x nearest-neighbor upsampling. */
export function upsample2(x: Tensor, tape: Tape): Tensor {
  const { c, h, w } = x;
  const out = tensor(c, h * 2, w * 2);
  const ow = w * 2;
  for (let ch = 0; ch < c; ch++) {
    const xBase = ch * h * w;
    const oBase = ch * h * w * 4;
    for (let y = 0; y < h; y++) {
      for (let xx = 0; xx < w; xx++) {
        const v = x.data[xBase + y * w + xx];
        const o = oBase + 2 * y * ow + 2 * xx;
        out.data[o] = v;
        out.data[o + 1] = v;
        out.data[o + ow] = v;
        out.data[o + ow + 1] = v;
      }
    }
  }
  tape.record(() => {
    for (let ch = 0; ch < c; ch++) {
      const xBase = ch * h * w;
      const oBase = ch * h * w * 4;
      for (let y = 0; y < h; y++) {
        for (let xx = 0; xx < w; xx++) {
          const o = oBase + 2 * y * ow + 2 * xx;
          x.grad[xBase + y * w + xx] +=
            out.grad[o] + out.grad[o + 1] + out.grad[o + ow] + out.grad[o + ow + 1];
        }
      }
    }
  });
  return out;
}

/** Channel concatenation [a; b]. */
export function concat(a: Tensor, b: Tensor, tape: Tape): Tensor {
  const out = tensor(a.c + b.c, a.h, a.w);
  out.data.set(a.data, 0);
  out.data.set(b.data, a.data.length);
  tape.record(() => {
    const na = a.data.length;
    for (let i = 0; i < na; i++) a.grad[i] += out.grad[i];
    for (let i = 0; i < b.data.length; i++) b.grad[i] += out.grad[na + i];
  });
  return out;
}

export function sigmoid(x: Tensor, tape: Tape): Tensor {
  const out = tensor(x.c, x.h, x.w);
  for (let i = 0; i < x.data.length; i++) {
    out.data[i] = 1.0 / (1.0 + Math.exp(-x.data[i]));
  }
  tape.record(() => {
    for (let i = 0; i < x.data.length; i++) {
      const p = out.data[i];
      x.grad[i] += out.grad[i] * p * (1.0 - p);
    }
  });
  return out;
}

/** Adam with the usual bias correction; step count is caller-owned. */
export class Adam {
  private t = 0;

  constructor(
    readonly params: Param[],
    readonly lr: number,
    readonly beta1 = 0.9,
    readonly beta2 = 0.999,
    readonly eps = 1e-8
  ) {}

  step(): void {
    this.t += 1;
    const c1 = 1.0 - Math.pow(this.beta1, this.t);
    const c2 = 1.0 - Math.pow(this.beta2, this.t);
    for (const p of this.params) {
      for (let i = 0; i < p.data.length; i++) {
        const g = p.grad[i];
        p.m[i] = this.beta1 * p.m[i] + (1 - this.beta1) * g;
        p.v[i] = this.beta2 * p.v[i] + (1 - this.beta2) * g * g;
        p.data[i] -= (this.lr * (p.m[i] / c1)) / (Math.sqrt(p.v[i] / c2) + this.eps);
      }
    }
  }

  zeroGrads(): void {
    for (const p of this.params) p.grad.fill(0);
  }
}
