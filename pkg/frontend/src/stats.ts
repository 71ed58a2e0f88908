/** Aggregations mirroring the simulator's conventions (population variance). */

export function mean(xs: number[]): number {
  if (xs.length === 0) return 0;
  return xs.reduce((a, b) => a + b, 0) / xs.length;
}

export function populationVariance(xs: number[]): number {
  if (xs.length === 0) return 0;
  const m = mean(xs);
  return xs.reduce((acc, x) => acc + (x - m) * (x - m), 0) / xs.length;
}

export interface DecelStats {
  mean: number;
  variance: number;
  count: number;
}

/** Magnitudes of the negative accelerations, left-fold in row order. */
export function decelStats(accels: number[]): DecelStats {
  const samples = accels.filter((a) => a < 0).map((a) => -a);
  return {
    mean: mean(samples),
    variance: populationVariance(samples),
    count: samples.length,
  };
}

/** (value - base) / base * 100, e.g. 0.107 -> 0.355 gives 231.78%. */
export function percentageChange(base: number, value: number): number {
  return ((value - base) / base) * 100;
}

export function relativeDiff(a: number, b: number): number {
  const scale = Math.max(Math.abs(a), Math.abs(b));
  return scale === 0 ? 0 : Math.abs(a - b) / scale;
}

/** Consistency gate: floats must agree within 1e-9 relative, counts exactly. */
export function checkConsistent(label: string, recomputed: number,
                                reported: number, exact = false): void {
  const ok = exact ? recomputed === reported
    : relativeDiff(recomputed, reported) <= 1e-9;
  if (!ok) {
    throw new Error(
      `consistency gate: ${label} recomputed ${recomputed} != summary ${reported}`,
    );
  }
}
