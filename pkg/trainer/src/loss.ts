/** Soft dice loss over probability maps. */

const EPS = 1e-6;

/** 1 - 2*sum(p*t) / (sum(p) + sum(t) + eps). Shapes must match. */
export function diceLoss(pred: ArrayLike<number>, target: ArrayLike<number>): number {
  if (pred.length !== target.length) {
    throw new Error(`dice loss shape mismatch: ${pred.length} vs ${target.length}`);
  }
  let inter = 0;
  let sp = 0;
  let st = 0;
  for (let i = 0; i < pred.length; i++) {
    inter += pred[i] * target[i];
    sp += pred[i];
    st += target[i];
  }
  return 1.0 - (2.0 * inter) / (sp + st + EPS);
}

/**
 * Dice loss plus its gradient with respect to the predictions.
 * d/dp_i [1 - 2I/D] = -(2 t_i D - 2I) / D^2 with I = sum(p t), D = sum(p)+sum(t)+eps.
 */
export function diceLossWithGrad(
  pred: Float64Array,
  target: ArrayLike<number>,
  gradOut: Float64Array
): number {
  if (pred.length !== target.length || gradOut.length !== pred.length) {
    throw new Error('dice loss shape mismatch');
  }
  let inter = 0;
  let sp = 0;
  let st = 0;
  for (let i = 0; i < pred.length; i++) {
    inter += pred[i] * target[i];
    sp += pred[i];
    st += target[i];
  }
  const d = sp + st + EPS;
  for (let i = 0; i < pred.length; i++) {
    gradOut[i] = -(2.0 * target[i] * d - 2.0 * inter) / (d * d);
  }
  return 1.0 - (2.0 * inter) / d;
}
