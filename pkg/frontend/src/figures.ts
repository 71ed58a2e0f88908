import * as fs from 'fs';
import * as path from 'path';

import { RunArtifacts, loadProfiles, recomputeMeans, vehicleRecords } from './artifacts.js';
import { mean } from './stats.js';
import { renderLinePlot } from './svg.js';

/** Speed and acceleration time-series overlays for selected vehicles. */
export function profilePlots(runDir: string, vehicleIds: number[],
                             outDir: string): string[] {
  const profiles = loadProfiles(runDir, vehicleIds);
  fs.mkdirSync(outDir, { recursive: true });
  const speedPath = path.join(outDir, 'profile_speed.svg');
  const accelPath = path.join(outDir, 'profile_accel.svg');
  fs.writeFileSync(speedPath, renderLinePlot({
    title: `Speed profile (vehicles ${vehicleIds.join(', ')})`,
    xLabel: 'time [s]',
    yLabel: 'speed [m/s]',
    series: profiles.map((p) => ({
      label: `vehicle ${p.vehicle}`, x: p.t, y: p.speed,
    })),
  }));
  fs.writeFileSync(accelPath, renderLinePlot({
    title: `Acceleration profile (vehicles ${vehicleIds.join(', ')})`,
    xLabel: 'time [s]',
    yLabel: 'acceleration [m/s^2]',
    series: profiles.map((p) => ({
      label: `vehicle ${p.vehicle}`, x: p.t, y: p.accel,
    })),
  }));
  return [speedPath, accelPath];
}

export type DelayMetric = 'delay' | 'journey_time';

/**
 * Per-vehicle delay (or total journey time) series by run, plus their means.
 *
 * Means are recomputed from vehicles.csv, cross-checked against each run's
 * summary, printed and drawn into one overlaid figure sorted by vehicle id.
 */
export function delayComparison(runs: RunArtifacts[], metric: DelayMetric,
                                outPath: string): Map<string, number> {
  if (runs.length < 1) {
    throw new Error('need at least one run directory');
  }
  const means = new Map<string, number>();
  const series = runs.map((run) => {
    recomputeMeans(run);
    const records = vehicleRecords(run).sort((a, b) => a.vehicle - b.vehicle);
    const values = records.map(
      (r) => (metric === 'delay' ? r.delay : r.journeyTime));
    means.set(run.label, mean(values));
    return {
      label: run.label,
      x: records.map((r) => r.vehicle),
      y: values,
    };
  });
  fs.mkdirSync(path.dirname(outPath), { recursive: true });
  const what = metric === 'delay' ? 'delay' : 'total journey time';
  fs.writeFileSync(outPath, renderLinePlot({
    title: `Per-vehicle ${what} by run`,
    xLabel: 'vehicle id',
    yLabel: `${what} [s]`,
    series,
  }));
  return means;
}
