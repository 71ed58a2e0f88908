import * as fs from 'fs';

/** Parsed CSV with a fixed header row. Simulator outputs never quote fields. */
export interface Table {
  header: string[];
  rows: string[][];
}

export function parseCsv(text: string): Table {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new Error('empty CSV');
  }
  if (text.includes('"')) {
    throw new Error('quoted CSV fields are not produced by the simulator');
  }
  const header = lines[0].split(',');
  const rows = lines.slice(1).map((line) => line.split(','));
  for (const row of rows) {
    if (row.length !== header.length) {
      throw new Error(`CSV row has ${row.length} fields, expected ${header.length}`);
    }
  }
  return { header, rows };
}

export function readCsv(path: string): Table {
  return parseCsv(fs.readFileSync(path, 'utf8'));
}

/** Column accessor that names the missing column in its error. */
export function column(table: Table, name: string): string[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new Error(`missing column '${name}' (header: ${table.header.join(',')})`);
  }
  return table.rows.map((row) => row[idx]);
}

export function numberColumn(table: Table, name: string): number[] {
  return column(table, name).map((value, i) => {
    const x = Number(value);
    if (Number.isNaN(x)) {
      throw new Error(`column '${name}' row ${i + 1}: not a number: '${value}'`);
    }
    return x;
  });
}
