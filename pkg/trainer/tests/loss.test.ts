import { describe, expect, it } from 'vitest';
import { diceLoss } from '../src/loss.js';

describe('dice loss', () => {
  it('is ~0 for a perfect binary match', () => {
    const t = Float64Array.from([1, 0, 1, 0]);
    expect(diceLoss(t, t)).toBeCloseTo(0, 6);
  });

  it('is ~1 for complementary binary maps', () => {
    const t = Float64Array.from([1, 0, 1, 0]);
    const p = Float64Array.from([0, 1, 0, 1]);
    expect(diceLoss(p, t)).toBeCloseTo(1, 6);
  });

  it('matches the hand computation for uniform 0.5 vs half-ones on 2x2', () => {
    const p = Float64Array.from([0.5, 0.5, 0.5, 0.5]);
    const t = Float64Array.from([1, 1, 0, 0]);
    // 1 - 2*(0.5*2) / (2 + 2) = 0.5
    expect(diceLoss(p, t)).toBeCloseTo(0.5, 6);
  });

  it('stays within [0, 1] for inputs in range', () => {
    let s = 1234;
    const rnd = () => ((s = (s * 48271) % 2147483647) / 2147483647);
    for (let k = 0; k < 200; k++) {
      const p = new Float64Array(32).map(() => rnd());
      const t = new Float64Array(32).map(() => (rnd() < 0.5 ? 1 : 0));
      const v = diceLoss(p, t);
      expect(v).toBeGreaterThanOrEqual(0);
      expect(v).toBeLessThanOrEqual(1);
    }
  });

  it('rejects mismatched shapes', () => {
    expect(() => diceLoss(new Float64Array(3), new Float64Array(4))).toThrow(
      /shape mismatch/
    );
  });
});
