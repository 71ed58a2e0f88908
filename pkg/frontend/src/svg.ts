/** Minimal deterministic SVG line plots; no DOM or canvas dependencies. */

export interface Series {
  label: string;
  x: number[];
  y: number[];
}

export interface PlotSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
}

const WIDTH = 760;
const HEIGHT = 420;
const MARGIN = { left: 64, right: 160, top: 40, bottom: 48 };
const COLORS = ['#1f77b4', '#d62728', '#2ca02c', '#9467bd', '#ff7f0e', '#8c564b'];

function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (!Number.isFinite(lo)) return [0, 1];
  if (lo === hi) return [lo - 1, hi + 1];
  return [lo, hi];
}

function ticks(lo: number, hi: number, n = 6): number[] {
  const span = hi - lo;
  const rawStep = span / n;
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((s) => span / s <= n) ?? mag * 10;
  const start = Math.ceil(lo / step) * step;
  const out: number[] = [];
  for (let v = start; v <= hi + 1e-9; v += step) out.push(Number(v.toFixed(10)));
  return out;
}

function fmt(v: number): string {
  return Math.abs(v) >= 1000 ? v.toFixed(0) : String(Number(v.toPrecision(4)));
}

export function renderLinePlot(spec: PlotSpec): string {
  if (spec.series.length === 0 || spec.series.every((s) => s.x.length === 0)) {
    throw new Error(`nothing to plot for '${spec.title}'`);
  }
  const [xLo, xHi] = extent(spec.series.flatMap((s) => s.x));
  const [yLo, yHi] = extent(spec.series.flatMap((s) => s.y));
  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const sx = (x: number) => MARGIN.left + ((x - xLo) / (xHi - xLo)) * plotW;
  const sy = (y: number) => MARGIN.top + plotH - ((y - yLo) / (yHi - yLo)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
    `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="sans-serif" font-size="12">`,
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
  parts.push(
    `<text x="${WIDTH / 2}" y="20" text-anchor="middle" font-size="15">` +
    `${escapeXml(spec.title)}</text>`,
  );

  for (const tx of ticks(xLo, xHi)) {
    const px = sx(tx);
    parts.push(`<line x1="${px}" y1="${MARGIN.top}" x2="${px}" ` +
      `y2="${MARGIN.top + plotH}" stroke="#eee"/>`);
    parts.push(`<text x="${px}" y="${MARGIN.top + plotH + 16}" ` +
      `text-anchor="middle">${fmt(tx)}</text>`);
  }
  for (const ty of ticks(yLo, yHi)) {
    const py = sy(ty);
    parts.push(`<line x1="${MARGIN.left}" y1="${py}" ` +
      `x2="${MARGIN.left + plotW}" y2="${py}" stroke="#eee"/>`);
    parts.push(`<text x="${MARGIN.left - 6}" y="${py + 4}" ` +
      `text-anchor="end">${fmt(ty)}</text>`);
  }
  parts.push(`<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" ` +
    `height="${plotH}" fill="none" stroke="#333"/>`);
  parts.push(
    `<text x="${MARGIN.left + plotW / 2}" y="${HEIGHT - 10}" ` +
    `text-anchor="middle">${escapeXml(spec.xLabel)}</text>`,
  );
  parts.push(
    `<text x="18" y="${MARGIN.top + plotH / 2}" text-anchor="middle" ` +
    `transform="rotate(-90 18 ${MARGIN.top + plotH / 2})">` +
    `${escapeXml(spec.yLabel)}</text>`,
  );

  spec.series.forEach((series, i) => {
    const color = COLORS[i % COLORS.length];
    const points = series.x
      .map((x, j) => `${sx(x).toFixed(2)},${sy(series.y[j]).toFixed(2)}`)
      .join(' ');
    parts.push(`<polyline points="${points}" fill="none" stroke="${color}" ` +
      `stroke-width="1.5"/>`);
    const ly = MARGIN.top + 14 + i * 18;
    const lx = MARGIN.left + plotW + 12;
    parts.push(`<line x1="${lx}" y1="${ly - 4}" x2="${lx + 22}" y2="${ly - 4}" ` +
      `stroke="${color}" stroke-width="2"/>`);
    parts.push(`<text x="${lx + 28}" y="${ly}">${escapeXml(series.label)}</text>`);
  });

  parts.push('</svg>');
  return parts.join('\n') + '\n';
}

function escapeXml(text: string): string {
  return text.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;');
}
