import { RunArtifacts, recomputeDeceleration } from './artifacts.js';
import { percentageChange } from './stats.js';

export interface TableRow {
  run: string;
  mean: number;
  variance: number;
  sampleCount: number;
  meanChangePct: number | null;
  varianceChangePct: number | null;
}

export interface ComparisonTable {
  baseline: string;
  rows: TableRow[];
}

/**
 * Deceleration comparison against a designated baseline run.
 *
 * Every figure is recomputed from trace.csv and gated against the run's own
 * summary before display; percentage change uses (x - base) / base * 100.
 */
export function comparisonTable(baseline: RunArtifacts,
                                others: RunArtifacts[]): ComparisonTable {
  const base = recomputeDeceleration(baseline);
  const rows: TableRow[] = [{
    run: baseline.label,
    mean: base.mean,
    variance: base.variance,
    sampleCount: base.count,
    meanChangePct: null,
    varianceChangePct: null,
  }];
  for (const run of others) {
    const stats = recomputeDeceleration(run);
    rows.push({
      run: run.label,
      mean: stats.mean,
      variance: stats.variance,
      sampleCount: stats.count,
      meanChangePct: percentageChange(base.mean, stats.mean),
      varianceChangePct: percentageChange(base.variance, stats.variance),
    });
  }
  return { baseline: baseline.label, rows };
}

export function formatTable(table: ComparisonTable): string {
  const lines: string[] = [];
  lines.push(`deceleration comparison (baseline: ${table.baseline})`);
  lines.push(
    'run'.padEnd(14) + 'mean m/s^2'.padStart(12) + 'change'.padStart(10) +
    'variance'.padStart(12) + 'change'.padStart(10) + 'samples'.padStart(10),
  );
  for (const row of table.rows) {
    const meanChange = row.meanChangePct === null
      ? '-' : `${row.meanChangePct.toFixed(2)}%`;
    const varChange = row.varianceChangePct === null
      ? '-' : `${row.varianceChangePct.toFixed(2)}%`;
    lines.push(
      row.run.padEnd(14) + row.mean.toFixed(3).padStart(12) +
      meanChange.padStart(10) + row.variance.toFixed(3).padStart(12) +
      varChange.padStart(10) + String(row.sampleCount).padStart(10),
    );
  }
  return lines.join('\n');
}
