/**
 * Four-level U-Net: two 3x3 conv+relu per block, 2x max pooling down,
 * nearest-neighbor upsampling with skip concatenation up, 1x1 sigmoid head.
 */

import * as fs from 'node:fs';
import {
  Adam,
  ConvParam,
  Param,
  Tape,
  Tensor,
  concat,
  conv,
  convParam,
  maxPool2,
  relu,
  sigmoid,
  tensor,
  upsample2,
} from './nn.js';
import { Rng } from './rng.js';

export interface UNetSpec {
  inChannels: number;
  base: number; // filters at full resolution; doubles per level
  levels: number;
}

export class UNet {
  readonly spec: UNetSpec;
  readonly convs: ConvParam[] = [];
  private byName = new Map<string, ConvParam>();

  constructor(spec: UNetSpec, seed: number) {
    this.spec = spec;
    const rng = new Rng(seed);
    const add = (name: string, inC: number, outC: number, k: 1 | 3) => {
      const p = convParam(name, inC, outC, k, rng);
      this.convs.push(p);
      this.byName.set(name, p);
      return p;
    };
    const { inChannels, base, levels } = spec;
    for (let d = 0; d < levels; d++) {
      const f = base << d;
      const inC = d === 0 ? inChannels : base << (d - 1);
      add(`enc${d}a`, inC, f, 3);
      add(`enc${d}b`, f, f, 3);
    }
    for (let d = levels - 2; d >= 0; d--) {
      const f = base << d;
      const skipC = f;
      const upC = base << (d + 1);
      add(`dec${d}a`, upC + skipC, f, 3);
      add(`dec${d}b`, f, f, 3);
    }
    add('head', base, 1, 1);
  }

  get params(): Param[] {
    return this.convs.flatMap((c) => [c.w, c.b]);
  }

  countParams(): number {
    return this.params.reduce((n, p) => n + p.data.length, 0);
  }

  /** Forward pass; records backward closures on the tape when given. */
  forward(x: Tensor, tape: Tape): Tensor {
    const { base, levels } = this.spec;
    const block = (t: Tensor, name: string) => {
      t = relu(conv(t, this.byName.get(`${name}a`)!, tape), tape);
      return relu(conv(t, this.byName.get(`${name}b`)!, tape), tape);
    };
    const skips: Tensor[] = [];
    let t = x;
    for (let d = 0; d < levels; d++) {
      if (d > 0) t = maxPool2(t, tape);
      t = block(t, `enc${d}`);
      skips.push(t);
    }
    for (let d = levels - 2; d >= 0; d--) {
      t = upsample2(t, tape);
      t = concat(t, skips[d], tape);
      t = block(t, `dec${d}`);
    }
    return sigmoid(conv(t, this.byName.get('head')!, tape), tape);
  }

  /** Inference without gradient bookkeeping. */
  predict(data: Float64Array, h: number, w: number): Float64Array {
    const x = tensor(this.spec.inChannels, h, w);
    x.data.set(data);
    const tape = new Tape();
    const out = this.forward(x, tape);
    tape.clear();
    return out.data;
  }

  makeOptimizer(lr: number): Adam {
    return new Adam(this.params, lr);
  }

  save(path: string): void {
    const weights: Record<string, string> = {};
    for (const p of this.params) {
      weights[p.name] = Buffer.from(
        p.data.buffer.slice(p.data.byteOffset, p.data.byteOffset + p.data.byteLength)
      ).toString('base64');
    }
    const doc = { format: 'rfmap-unet-v1', spec: this.spec, weights };
    fs.writeFileSync(path, JSON.stringify(doc));
  }

  static load(path: string): UNet {
    const doc = JSON.parse(fs.readFileSync(path, 'utf-8'));
    if (doc.format !== 'rfmap-unet-v1') {
      throw new Error(`${path}: unknown checkpoint format ${doc.format}`);
    }
    const net = new UNet(doc.spec as UNetSpec, 0);
    for (const p of net.params) {
      const b64 = doc.weights[p.name];
      if (!b64) throw new Error(`${path}: missing weights for ${p.name}`);
      const buf = Buffer.from(b64, 'base64');
      if (buf.byteLength !== p.data.byteLength) {
        throw new Error(`${path}: size mismatch for ${p.name}`);
      }
      p.data.set(new Float64Array(buf.buffer.slice(buf.byteOffset, buf.byteOffset + buf.byteLength)));
    }
    return net;
  }
}
