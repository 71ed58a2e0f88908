import { describe, expect, it } from 'vitest';

import {
  checkConsistent,
  decelStats,
  mean,
  percentageChange,
  populationVariance,
  relativeDiff,
} from '../src/stats.js';

describe('decelStats', () => {
  it('pools magnitudes of negative accelerations', () => {
    const stats = decelStats([1.0, -0.5, -1.5, 0.0]);
    expect(stats.mean).toBe(1.0);
    expect(stats.variance).toBe(0.25);
    expect(stats.count).toBe(2);
  });

  it('is all-zero for non-braking traces', () => {
    expect(decelStats([0.0, 1.2, 3.4])).toEqual({ mean: 0, variance: 0, count: 0 });
  });

  it('uses the population variance divisor', () => {
    expect(populationVariance([1, 3])).toBe(1);
  });
});

describe('percentageChange', () => {
  it('reproduces the headline 0.107 -> 0.355 change', () => {
    expect(percentageChange(0.107, 0.355)).toBeCloseTo(231.78, 2);
  });

  it('is zero for identical values', () => {
    expect(percentageChange(0.5, 0.5)).toBe(0);
  });
});

describe('consistency gate', () => {
  it('accepts within 1e-9 relative', () => {
    expect(() => checkConsistent('x', 100.0, 100.0 + 1e-8)).not.toThrow();
    expect(relativeDiff(100.0, 100.0 + 1e-8)).toBeLessThanOrEqual(1e-9);
  });

  it('rejects larger drift and names the statistic', () => {
    expect(() => checkConsistent('mean delay', 100.0, 100.1))
      .toThrow(/mean delay/);
  });

  it('counts must match exactly', () => {
    expect(() => checkConsistent('samples', 10, 11, true)).toThrow();
    expect(() => checkConsistent('samples', 10, 10, true)).not.toThrow();
  });
});

it('mean of empty series is 0', () => {
  expect(mean([])).toBe(0);
});
