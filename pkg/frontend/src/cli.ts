#!/usr/bin/env node
/**
 * Post-processing CLI for simulator run directories.
 *
 *   analyze table --baseline <dir> <dirs...> [--json FILE]
 *   analyze profiles --run <dir> --vehicles <id,id,...> [--out DIR]
 *   analyze delays <dirs...> [--metric delay|journey_time] [--out FILE]
 *
 * Consumes only the run file interfaces (vehicles.csv, trace.csv,
 * summary.json); every displayed number is recomputed from the raw CSVs and
 * cross-checked against the run summary before printing.
 */

import * as fs from 'fs';

import { loadRun } from './artifacts.js';
import { DelayMetric, delayComparison, profilePlots } from './figures.js';
import { comparisonTable, formatTable } from './table.js';

interface Parsed {
  positional: string[];
  options: Map<string, string>;
}

function parseArgs(argv: string[], flags: string[]): Parsed {
  const positional: string[] = [];
  const options = new Map<string, string>();
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (arg.startsWith('--')) {
      const name = arg.slice(2);
      if (!flags.includes(name)) {
        throw new Error(`unknown option --${name}`);
      }
      const value = argv[++i];
      if (value === undefined) {
        throw new Error(`--${name} needs a value`);
      }
      options.set(name, value);
    } else {
      positional.push(arg);
    }
  }
  return { positional, options };
}

function cmdTable(argv: string[]): number {
  const { positional, options } = parseArgs(argv, ['baseline', 'json']);
  const baselineDir = options.get('baseline');
  if (!baselineDir || positional.length === 0) {
    throw new Error('usage: analyze table --baseline <dir> <dirs...>');
  }
  const table = comparisonTable(loadRun(baselineDir), positional.map(loadRun));
  console.log(formatTable(table));
  const jsonPath = options.get('json');
  if (jsonPath) {
    fs.writeFileSync(jsonPath, JSON.stringify(table, null, 2) + '\n');
    console.log(`wrote ${jsonPath}`);
  }
  return 0;
}

function cmdProfiles(argv: string[]): number {
  const { positional, options } = parseArgs(argv, ['run', 'vehicles', 'out']);
  const runDir = options.get('run');
  const vehicles = options.get('vehicles');
  if (!runDir || !vehicles || positional.length > 0) {
    throw new Error('usage: analyze profiles --run <dir> --vehicles <id,id,...>');
  }
  const ids = vehicles.split(/[\s,]+/).filter((s) => s.length > 0).map(Number);
  if (ids.some(Number.isNaN) || ids.length === 0) {
    throw new Error(`--vehicles must be numeric ids, got '${vehicles}'`);
  }
  const files = profilePlots(runDir, ids, options.get('out') ?? '.');
  for (const file of files) console.log(`wrote ${file}`);
  return 0;
}

function cmdDelays(argv: string[]): number {
  const { positional, options } = parseArgs(argv, ['metric', 'out']);
  if (positional.length < 1) {
    throw new Error('usage: analyze delays <dirs...>');
  }
  const metric = (options.get('metric') ?? 'delay') as DelayMetric;
  if (metric !== 'delay' && metric !== 'journey_time') {
    throw new Error(`--metric must be delay or journey_time, got '${metric}'`);
  }
  const outPath = options.get('out') ?? `delays_${metric}.svg`;
  const means = delayComparison(positional.map(loadRun), metric, outPath);
  for (const [label, value] of means) {
    console.log(`mean ${metric} ${label}: ${value}`);
  }
  console.log(`wrote ${outPath}`);
  return 0;
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    switch (command) {
      case 'table':
        return cmdTable(rest);
      case 'profiles':
        return cmdProfiles(rest);
      case 'delays':
        return cmdDelays(rest);
      default:
        console.error('usage: analyze <table|profiles|delays> ...');
        return 2;
    }
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

const invokedDirectly = process.argv[1] !== undefined
  && import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
