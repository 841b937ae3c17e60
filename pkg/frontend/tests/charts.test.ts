import { describe, expect, it } from 'vitest';

import { DEFAULT_GEOMETRY, polylinePoints } from '../src/charts';

describe('polylinePoints', () => {
  it('maps the extremes onto the padded frame', () => {
    const points = polylinePoints([0, 1], [0, 10], { width: 100, height: 50, pad: 10 });
    expect(points).toBe('10.00,40.00 90.00,10.00');
  });

  it('is deterministic for the same series', () => {
    const xs = [0, 1, 2, 3];
    const ys = [5, 2, 8, 8];
    expect(polylinePoints(xs, ys)).toBe(polylinePoints(xs, ys));
  });

  it('handles a flat series without dividing by zero', () => {
    const points = polylinePoints([0, 1], [7, 7], { width: 100, height: 50, pad: 10 });
    expect(points.split(' ')).toHaveLength(2);
    expect(points).not.toContain('NaN');
  });

  it('returns empty output for empty or mismatched input', () => {
    expect(polylinePoints([], [])).toBe('');
    expect(polylinePoints([1, 2], [1])).toBe('');
  });

  it('emits one point per sample', () => {
    const xs = Array.from({ length: 52 }, (_, i) => i);
    const ys = xs.map((x) => Math.sin(x));
    expect(polylinePoints(xs, ys, DEFAULT_GEOMETRY).split(' ')).toHaveLength(52);
  });
});
