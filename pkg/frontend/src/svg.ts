/** Hand-rolled SVG charts: line plots with axes and a cell heatmap.
 *
 * No DOM and no chart library: figures are assembled as strings, which
 * keeps rendering byte-deterministic (no timestamps are embedded).
 */

export interface Series {
  x: number[];
  y: number[];
  color: string;
  label: string;
  width?: number;
  dash?: string;
  markers?: boolean;
}

export interface LineChartOpts {
  title: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
  annotations?: string[];      // free text lines drawn top-left of the plot
  hLines?: { y: number; color: string; label: string }[];
  vLines?: { x: number; color: string; label: string }[];
  width?: number;
  height?: number;
}

const MARGIN = { top: 44, right: 24, bottom: 52, left: 72 };

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(1);
  return Number(v.toPrecision(4)).toString();
}

function niceTicks(lo: number, hi: number, count = 6): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const step0 = span / count;
  const mag = 10 ** Math.floor(Math.log10(step0));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((s) => span / s <= count) ?? mag * 10;
  const first = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let v = first; v <= hi + 1e-12 * span; v += step) ticks.push(v);
  return ticks;
}

export function lineChart(opts: LineChartOpts): string {
  const W = opts.width ?? 720;
  const H = opts.height ?? 480;
  const pw = W - MARGIN.left - MARGIN.right;
  const ph = H - MARGIN.top - MARGIN.bottom;

  const xs = opts.series.flatMap((s) => s.x).concat((opts.vLines ?? []).map((l) => l.x));
  const ys = opts.series.flatMap((s) => s.y).concat((opts.hLines ?? []).map((l) => l.y));
  if (xs.length === 0 || ys.length === 0) {
    throw new Error("nothing to plot");
  }
  let xLo = Math.min(...xs);
  let xHi = Math.max(...xs);
  let yLo = Math.min(...ys);
  let yHi = Math.max(...ys);
  if (xHi === xLo) { xHi += 1; xLo -= 1; }
  if (yHi === yLo) { yHi += 1; yLo -= 1; }
  const yPad = 0.06 * (yHi - yLo);
  yLo -= yPad;
  yHi += yPad;

  const px = (x: number) => MARGIN.left + ((x - xLo) / (xHi - xLo)) * pw;
  const py = (y: number) => MARGIN.top + (1 - (y - yLo) / (yHi - yLo)) * ph;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${W}" height="${H}" viewBox="0 0 ${W} ${H}" font-family="Helvetica, Arial, sans-serif">`,
    `<rect width="${W}" height="${H}" fill="white"/>`,
    `<text x="${W / 2}" y="24" text-anchor="middle" font-size="15" font-weight="bold">${esc(opts.title)}</text>`,
  );

  for (const tx of niceTicks(xLo, xHi)) {
    const gx = px(tx);
    parts.push(
      `<line x1="${gx.toFixed(2)}" y1="${MARGIN.top}" x2="${gx.toFixed(2)}" y2="${MARGIN.top + ph}" stroke="#e0e0e0"/>`,
      `<text x="${gx.toFixed(2)}" y="${MARGIN.top + ph + 18}" text-anchor="middle" font-size="11">${fmtTick(tx)}</text>`,
    );
  }
  for (const ty of niceTicks(yLo, yHi)) {
    const gy = py(ty);
    parts.push(
      `<line x1="${MARGIN.left}" y1="${gy.toFixed(2)}" x2="${MARGIN.left + pw}" y2="${gy.toFixed(2)}" stroke="#e0e0e0"/>`,
      `<text x="${MARGIN.left - 8}" y="${(gy + 4).toFixed(2)}" text-anchor="end" font-size="11">${fmtTick(ty)}</text>`,
    );
  }
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${pw}" height="${ph}" fill="none" stroke="#444"/>`,
    `<text x="${MARGIN.left + pw / 2}" y="${H - 14}" text-anchor="middle" font-size="12">${esc(opts.xLabel)}</text>`,
    `<text x="18" y="${MARGIN.top + ph / 2}" text-anchor="middle" font-size="12" transform="rotate(-90 18 ${MARGIN.top + ph / 2})">${esc(opts.yLabel)}</text>`,
  );

  for (const hl of opts.hLines ?? []) {
    const gy = py(hl.y);
    parts.push(
      `<line x1="${MARGIN.left}" y1="${gy.toFixed(2)}" x2="${MARGIN.left + pw}" y2="${gy.toFixed(2)}" stroke="${hl.color}" stroke-dasharray="6 4"/>`,
      `<text x="${MARGIN.left + pw - 4}" y="${(gy - 5).toFixed(2)}" text-anchor="end" font-size="10" fill="${hl.color}">${esc(hl.label)}</text>`,
    );
  }
  for (const vl of opts.vLines ?? []) {
    const gx = px(vl.x);
    parts.push(
      `<line x1="${gx.toFixed(2)}" y1="${MARGIN.top}" x2="${gx.toFixed(2)}" y2="${MARGIN.top + ph}" stroke="${vl.color}" stroke-dasharray="4 4"/>`,
      `<text x="${(gx + 4).toFixed(2)}" y="${MARGIN.top + 14}" font-size="10" fill="${vl.color}">${esc(vl.label)}</text>`,
    );
  }

  for (const s of opts.series) {
    const pts = s.x
      .map((x, i) => `${px(x).toFixed(2)},${py(s.y[i]).toFixed(2)}`)
      .join(" ");
    parts.push(
      `<polyline points="${pts}" fill="none" stroke="${s.color}" stroke-width="${s.width ?? 1.8}"${s.dash ? ` stroke-dasharray="${s.dash}"` : ""}/>`,
    );
    if (s.markers) {
      for (let i = 0; i < s.x.length; i++) {
        parts.push(
          `<circle cx="${px(s.x[i]).toFixed(2)}" cy="${py(s.y[i]).toFixed(2)}" r="2.4" fill="${s.color}"/>`,
        );
      }
    }
  }

  let ly = MARGIN.top + 16;
  for (const s of opts.series) {
    parts.push(
      `<line x1="${MARGIN.left + 10}" y1="${ly - 4}" x2="${MARGIN.left + 34}" y2="${ly - 4}" stroke="${s.color}" stroke-width="2"${s.dash ? ` stroke-dasharray="${s.dash}"` : ""}/>`,
      `<text x="${MARGIN.left + 40}" y="${ly}" font-size="11">${esc(s.label)}</text>`,
    );
    ly += 16;
  }
  for (const note of opts.annotations ?? []) {
    parts.push(`<text x="${MARGIN.left + 10}" y="${ly}" font-size="11" fill="#b03030">${esc(note)}</text>`);
    ly += 16;
  }

  parts.push("</svg>");
  return parts.join("\n");
}

export interface HeatmapOpts {
  title: string;
  xLabel: string;
  yLabel: string;
  /** values[row][col], drawn with row 0 at the bottom */
  values: number[][];
  xRange: [number, number];
  yRange: [number, number];
  /** rectangle outline in data coordinates */
  box?: { x0: number; y0: number; x1: number; y1: number; label: string };
  annotations?: string[];
  width?: number;
  height?: number;
}

function colorOf(v: number): string {
  // dark blue -> yellow ramp on [0, 1]
  const t = Math.max(0, Math.min(1, v));
  const r = Math.round(255 * Math.min(1, 2 * t));
  const g = Math.round(255 * Math.max(0, Math.min(1, 1.6 * t - 0.2)));
  const b = Math.round(96 * (1 - t) + 16);
  return `rgb(${r},${g},${b})`;
}

export function heatmap(opts: HeatmapOpts): string {
  const W = opts.width ?? 720;
  const H = opts.height ?? 520;
  const pw = W - MARGIN.left - MARGIN.right;
  const ph = H - MARGIN.top - MARGIN.bottom;
  const rows = opts.values.length;
  const cols = rows > 0 ? opts.values[0].length : 0;
  if (rows === 0 || cols === 0) {
    throw new Error("heatmap needs a non-empty matrix");
  }
  let vMax = 0;
  for (const row of opts.values) for (const v of row) vMax = Math.max(vMax, v);
  if (vMax === 0) vMax = 1;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${W}" height="${H}" viewBox="0 0 ${W} ${H}" font-family="Helvetica, Arial, sans-serif">`,
    `<rect width="${W}" height="${H}" fill="white"/>`,
    `<text x="${W / 2}" y="24" text-anchor="middle" font-size="15" font-weight="bold">${esc(opts.title)}</text>`,
  );
  const cw = pw / cols;
  const ch = ph / rows;
  for (let i = 0; i < rows; i++) {
    for (let j = 0; j < cols; j++) {
      const v = opts.values[i][j] / vMax;
      if (v <= 0) continue; // background already white-ish; skip empties
      const x = MARGIN.left + j * cw;
      const y = MARGIN.top + (rows - 1 - i) * ch;
      parts.push(
        `<rect x="${x.toFixed(2)}" y="${y.toFixed(2)}" width="${Math.max(cw, 0.5).toFixed(2)}" height="${Math.max(ch, 0.5).toFixed(2)}" fill="${colorOf(v)}"/>`,
      );
    }
  }
  const [x0d, x1d] = opts.xRange;
  const [y0d, y1d] = opts.yRange;
  const px = (x: number) => MARGIN.left + ((x - x0d) / (x1d - x0d)) * pw;
  const py = (y: number) => MARGIN.top + (1 - (y - y0d) / (y1d - y0d)) * ph;
  if (opts.box) {
    const { x0, y0, x1, y1, label } = opts.box;
    parts.push(
      `<rect x="${px(x0).toFixed(2)}" y="${py(y1).toFixed(2)}" width="${(px(x1) - px(x0)).toFixed(2)}" height="${(py(y0) - py(y1)).toFixed(2)}" fill="none" stroke="#ff4040" stroke-width="2"/>`,
      `<text x="${px(x0).toFixed(2)}" y="${(py(y1) - 6).toFixed(2)}" font-size="11" fill="#ff4040">${esc(label)}</text>`,
    );
  }
  for (const tx of niceTicks(x0d, x1d)) {
    parts.push(
      `<text x="${px(tx).toFixed(2)}" y="${MARGIN.top + ph + 18}" text-anchor="middle" font-size="11">${fmtTick(tx)}</text>`,
    );
  }
  for (const ty of niceTicks(y0d, y1d)) {
    parts.push(
      `<text x="${MARGIN.left - 8}" y="${(py(ty) + 4).toFixed(2)}" text-anchor="end" font-size="11">${fmtTick(ty)}</text>`,
    );
  }
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${pw}" height="${ph}" fill="none" stroke="#444"/>`,
    `<text x="${MARGIN.left + pw / 2}" y="${H - 14}" text-anchor="middle" font-size="12">${esc(opts.xLabel)}</text>`,
    `<text x="18" y="${MARGIN.top + ph / 2}" text-anchor="middle" font-size="12" transform="rotate(-90 18 ${MARGIN.top + ph / 2})">${esc(opts.yLabel)}</text>`,
  );
  let ly = MARGIN.top + 16;
  for (const note of opts.annotations ?? []) {
    parts.push(`<text x="${MARGIN.left + 10}" y="${ly}" font-size="11" fill="#b03030">${esc(note)}</text>`);
    ly += 16;
  }
  parts.push("</svg>");
  return parts.join("\n");
}
