import * as fs from 'fs';
import * as path from 'path';

import { Table, column, numberColumn, readCsv } from './csv.js';
import { checkConsistent, decelStats, mean } from './stats.js';

/** One simulator run directory; schemas match the engine's file interfaces. */
export interface RunArtifacts {
  label: string;
  dir: string;
  vehicles: Table;
  summary: any;
}

export interface VehicleRecord {
  vehicle: number;
  journeyTime: number;
  delay: number;
  rerouted: boolean;
}

export function loadRun(dir: string): RunArtifacts {
  const summaryPath = path.join(dir, 'summary.json');
  if (!fs.existsSync(summaryPath)) {
    throw new Error(`not a run directory (no summary.json): ${dir}`);
  }
  return {
    label: path.basename(path.resolve(dir)),
    dir,
    vehicles: readCsv(path.join(dir, 'vehicles.csv')),
    summary: JSON.parse(fs.readFileSync(summaryPath, 'utf8')),
  };
}

export function vehicleRecords(run: RunArtifacts): VehicleRecord[] {
  const ids = numberColumn(run.vehicles, 'vehicle');
  const journeys = numberColumn(run.vehicles, 'journey_time');
  const delays = numberColumn(run.vehicles, 'delay');
  const rerouted = column(run.vehicles, 'rerouted');
  return ids.map((vehicle, i) => ({
    vehicle,
    journeyTime: journeys[i],
    delay: delays[i],
    rerouted: rerouted[i] === 'true',
  }));
}

/** Recompute deceleration stats from trace.csv and gate them on the summary. */
export function recomputeDeceleration(run: RunArtifacts) {
  const trace = readCsv(path.join(run.dir, 'trace.csv'));
  const stats = decelStats(numberColumn(trace, 'accel'));
  checkConsistent(`${run.label} deceleration mean`, stats.mean,
    run.summary.deceleration.mean);
  checkConsistent(`${run.label} deceleration variance`, stats.variance,
    run.summary.deceleration.variance);
  checkConsistent(`${run.label} deceleration count`, stats.count,
    run.summary.deceleration.count, true);
  return stats;
}

/** Per-vehicle means recomputed from vehicles.csv and gated on the summary. */
export function recomputeMeans(run: RunArtifacts) {
  const records = vehicleRecords(run);
  const meanDelay = mean(records.map((r) => r.delay));
  const meanJourney = mean(records.map((r) => r.journeyTime));
  checkConsistent(`${run.label} mean delay`, meanDelay, run.summary.delay.mean);
  checkConsistent(`${run.label} mean journey time`, meanJourney,
    run.summary.journey_time.mean);
  checkConsistent(`${run.label} arrived`, records.length,
    run.summary.counts.arrived, true);
  return { meanDelay, meanJourney, arrived: records.length };
}

export interface ProfileSeries {
  vehicle: number;
  t: number[];
  speed: number[];
  accel: number[];
}

export function loadProfiles(dir: string, vehicleIds: number[]): ProfileSeries[] {
  const trace = readCsv(path.join(dir, 'trace.csv'));
  if (trace.rows.length === 0) {
    throw new Error(`empty trace in ${dir}: nothing to plot`);
  }
  const t = numberColumn(trace, 't');
  const veh = numberColumn(trace, 'vehicle');
  const speed = numberColumn(trace, 'speed');
  const accel = numberColumn(trace, 'accel');
  const available = [...new Set(veh)].sort((a, b) => a - b);
  return vehicleIds.map((vehicle) => {
    const idx = veh.map((v, i) => (v === vehicle ? i : -1)).filter((i) => i >= 0);
    if (idx.length === 0) {
      throw new Error(
        `vehicle ${vehicle} not in trace; available: ${available.join(', ')}`,
      );
    }
    return {
      vehicle,
      t: idx.map((i) => t[i]),
      speed: idx.map((i) => speed[i]),
      accel: idx.map((i) => accel[i]),
    };
  });
}
