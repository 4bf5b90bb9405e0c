import { describe, expect, it } from 'vitest';
import { diceLossWithGrad } from '../src/loss.js';
import {
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
} from '../src/nn.js';
import { Rng } from '../src/rng.js';
import { UNet } from '../src/unet.js';

/** Scalar loss = sum(coeffs * out) so dL/dout = coeffs. */
function scalarLoss(out: Tensor, coeffs: Float64Array): number {
  let s = 0;
  for (let i = 0; i < out.data.length; i++) s += coeffs[i] * out.data[i];
  return s;
}

function checkGrad(
  buildForward: () => { out: Tensor; tape: Tape },
  values: Float64Array,
  grads: Float64Array,
  coeffs: Float64Array,
  eps = 1e-5,
  tol = 1e-6
): void {
  const { out, tape } = buildForward();
  for (let i = 0; i < out.data.length; i++) out.grad[i] = coeffs[i];
  tape.backward();
  const analytic = grads.slice();
  for (let i = 0; i < values.length; i++) {
    const orig = values[i];
    values[i] = orig + eps;
    const plus = scalarLoss(buildForward().out, coeffs);
    values[i] = orig - eps;
    const minus = scalarLoss(buildForward().out, coeffs);
    values[i] = orig;
    const numeric = (plus - minus) / (2 * eps);
    expect(Math.abs(analytic[i] - numeric)).toBeLessThan(
      tol * Math.max(1, Math.abs(numeric))
    );
  }
}

function randomTensor(c: number, h: number, w: number, rng: Rng): Tensor {
  const t = tensor(c, h, w);
  for (let i = 0; i < t.data.length; i++) t.data[i] = rng.gauss();
  return t;
}

describe('gradient checks against central differences', () => {
  it('conv3x3: input, weight and bias gradients', () => {
    const rng = new Rng(1);
    const p = convParam('c', 2, 3, 3, rng);
    const xData = new Float64Array(2 * 4 * 4).map(() => rng.gauss());
    const coeffs = new Float64Array(3 * 4 * 4).map(() => rng.gauss());

    const build = () => {
      const x = tensor(2, 4, 4);
      x.data.set(xData);
      const tape = new Tape();
      const out = conv(x, p, tape);
      return { out, tape, x };
    };
    // input gradient
    {
      const { out, tape, x } = build();
      for (let i = 0; i < out.data.length; i++) out.grad[i] = coeffs[i];
      tape.backward();
      const analytic = x.grad.slice();
      for (let i = 0; i < xData.length; i++) {
        const orig = xData[i];
        const eps = 1e-5;
        xData[i] = orig + eps;
        const plus = scalarLoss(build().out, coeffs);
        xData[i] = orig - eps;
        const minus = scalarLoss(build().out, coeffs);
        xData[i] = orig;
        expect(Math.abs(analytic[i] - (plus - minus) / (2 * eps))).toBeLessThan(1e-5);
      }
    }
    // weight + bias gradients
    for (const par of [p.w, p.b]) {
      par.grad.fill(0);
      const { out, tape } = build();
      for (let i = 0; i < out.data.length; i++) out.grad[i] = coeffs[i];
      tape.backward();
      const analytic = par.grad.slice();
      for (let i = 0; i < par.data.length; i++) {
        const orig = par.data[i];
        const eps = 1e-5;
        par.data[i] = orig + eps;
        const plus = scalarLoss(build().out, coeffs);
        par.data[i] = orig - eps;
        const minus = scalarLoss(build().out, coeffs);
        par.data[i] = orig;
        expect(Math.abs(analytic[i] - (plus - minus) / (2 * eps))).toBeLessThan(1e-5);
      }
      par.grad.fill(0);
    }
  });

  it('maxPool2 routes gradients to argmax cells', () => {
    const rng = new Rng(2);
    const xData = new Float64Array(1 * 4 * 4).map(() => rng.gauss());
    const coeffs = new Float64Array(1 * 2 * 2).map(() => rng.gauss());
    const grads = new Float64Array(xData.length);
    checkGrad(
      () => {
        const x = tensor(1, 4, 4);
        x.data.set(xData);
        x.grad = grads;
        const tape = new Tape();
        return { out: maxPool2(x, tape), tape };
      },
      xData,
      grads,
      coeffs
    );
  });

  it('upsample2 sums gradients over each 2x2 patch', () => {
    const rng = new Rng(3);
    const xData = new Float64Array(2 * 2 * 2).map(() => rng.gauss());
    const coeffs = new Float64Array(2 * 4 * 4).map(() => rng.gauss());
    const grads = new Float64Array(xData.length);
    checkGrad(
      () => {
        const x = tensor(2, 2, 2);
        x.data.set(xData);
        x.grad = grads;
        const tape = new Tape();
        return { out: upsample2(x, tape), tape };
      },
      xData,
      grads,
      coeffs
    );
  });

  it('sigmoid and relu chain', () => {
    const rng = new Rng(4);
    const xData = new Float64Array(1 * 2 * 2).map(() => rng.gauss() + 0.3);
    const coeffs = new Float64Array(1 * 2 * 2).map(() => rng.gauss());
    const grads = new Float64Array(xData.length);
    checkGrad(
      () => {
        const x = tensor(1, 2, 2);
        x.data.set(xData);
        x.grad = grads;
        const tape = new Tape();
        return { out: sigmoid(relu(x, tape), tape), tape };
      },
      xData,
      grads,
      coeffs,
      1e-5,
      1e-4
    );
  });

  it('concat splits gradients back to both inputs', () => {
    const rng = new Rng(5);
    const aData = new Float64Array(1 * 2 * 2).map(() => rng.gauss());
    const bData = new Float64Array(2 * 2 * 2).map(() => rng.gauss());
    const coeffs = new Float64Array(3 * 2 * 2).map(() => rng.gauss());
    const aGrads = new Float64Array(aData.length);
    checkGrad(
      () => {
        const a = tensor(1, 2, 2);
        a.data.set(aData);
        a.grad = aGrads;
        const b = tensor(2, 2, 2);
        b.data.set(bData);
        const tape = new Tape();
        return { out: concat(a, b, tape), tape };
      },
      aData,
      aGrads,
      coeffs
    );
  });

  it('dice loss gradient', () => {
    const rng = new Rng(6);
    const pred = new Float64Array(16).map(() => 0.2 + 0.6 * rng.next());
    const target = new Float64Array(16).map(() => (rng.next() < 0.4 ? 1 : 0));
    const grad = new Float64Array(16);
    diceLossWithGrad(pred, target, grad);
    for (let i = 0; i < pred.length; i++) {
      const eps = 1e-7;
      const orig = pred[i];
      pred[i] = orig + eps;
      const plus = diceLossWithGrad(pred, target, new Float64Array(16));
      pred[i] = orig - eps;
      const minus = diceLossWithGrad(pred, target, new Float64Array(16));
      pred[i] = orig;
      expect(Math.abs(grad[i] - (plus - minus) / (2 * eps))).toBeLessThan(1e-4);
    }
  });

  it('whole U-Net end to end on a tiny grid', () => {
    const rng = new Rng(7);
    const net = new UNet({ inChannels: 2, base: 2, levels: 3 }, 11);
    const xData = new Float64Array(2 * 8 * 8).map(() => rng.gauss());
    const target = new Float64Array(8 * 8).map(() => (rng.next() < 0.3 ? 1 : 0));

    const lossOf = (): number => {
      const x = tensor(2, 8, 8);
      x.data.set(xData);
      const tape = new Tape();
      const out = net.forward(x, tape);
      tape.clear();
      return diceLossWithGrad(out.data, target, new Float64Array(out.data.length));
    };

    // analytic gradients for a few sampled weights
    const x = tensor(2, 8, 8);
    x.data.set(xData);
    const tape = new Tape();
    const out = net.forward(x, tape);
    diceLossWithGrad(out.data, target, out.grad);
    tape.backward();

    const p = net.convs[0].w;
    for (const i of [0, 3, p.data.length - 1]) {
      const analytic = p.grad[i];
      const eps = 1e-5;
      const orig = p.data[i];
      p.data[i] = orig + eps;
      const plus = lossOf();
      p.data[i] = orig - eps;
      const minus = lossOf();
      p.data[i] = orig;
      const numeric = (plus - minus) / (2 * eps);
      expect(Math.abs(analytic - numeric)).toBeLessThan(
        1e-4 * Math.max(1, Math.abs(numeric))
      );
    }
  });
});
