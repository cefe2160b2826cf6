/** The four figure kinds.
 *
 * Every renderer draws only numbers already persisted by the simulator and
 * annotates a least-squares fit of the points it actually plots; the same
 * numbers go into the sidecar JSON so figures stay machine-checkable.
 */

import { existsSync, readFileSync } from "fs";
import { join } from "path";

import { parseCsv, readDiagnosticsCsv, readPersistenceCsv } from "./csv.js";
import { linearFit, logLogFit } from "./fit.js";
import { readFieldState, readReport, readRunMeta, readSnapshotIndex } from "./rundir.js";
import { heatmap, lineChart } from "./svg.js";
import type { FigureSpec, Sidecar } from "./types.js";

export interface Rendered {
  svg: string;
  sidecar: Sidecar;
}

export function render(spec: FigureSpec): Rendered {
  switch (spec.kind) {
    case "rate-loglog":
      return rateLoglog(spec);
    case "window-vs-time":
      return windowVsTime(spec);
    case "field-heatmap":
      return fieldHeatmap(spec);
    case "persistence-curve":
      return persistenceCurve(spec);
    default:
      throw new Error(`unknown figure kind ${(spec as FigureSpec).kind}`);
  }
}

function requireTstar(runDir: string): number {
  const meta = readRunMeta(runDir);
  if (meta.tstar === null || meta.tstar === undefined) {
    throw new Error(`${runDir}: meta.json carries no blow-up time; rate figures need one`);
  }
  return meta.tstar;
}

function rateLoglog(spec: FigureSpec): Rendered {
  const tstar = requireTstar(spec.input);
  const rows = readDiagnosticsCsv(join(spec.input, "diagnostics.csv"));
  const gaps: number[] = [];
  const F: number[] = [];
  const dens: number[] = [];
  for (const r of rows) {
    if (r.t < tstar && r.F > 0 && r.density > 0) {
      gaps.push(tstar - r.t);
      F.push(r.F);
      dens.push(r.density);
    }
  }
  if (gaps.length < 2) {
    throw new Error(`${spec.input}: too few usable rows for a rate figure`);
  }
  const fFit = logLogFit(gaps, F);
  const dFit = logLogFit(gaps, dens);
  const lx = gaps.map(Math.log10);
  const fitLine = lx.map((v) => fFit.slope * v + fFit.intercept);
  const svg = lineChart({
    title: spec.title ?? "Accumulated space-time norm vs time to blow-up",
    xLabel: "log10(tstar - t)",
    yLabel: "log10 F",
    series: [
      { x: lx, y: F.map(Math.log10), color: "#1f6fb2", label: "log10 F", markers: true },
      { x: lx, y: fitLine, color: "#d05020", label: `fit slope ${fFit.slope.toFixed(3)}`, dash: "6 4" },
    ],
    annotations: [
      `fitted slope ${fFit.slope.toFixed(4)} (r2 ${fFit.r2.toFixed(4)})`,
      `density slope ${dFit.slope.toFixed(4)}`,
    ],
  });
  return {
    svg,
    sidecar: {
      kind: "rate-loglog",
      input: spec.input,
      fitted_slope: fFit.slope,
      fit_points: fFit.points,
      annotations: {
        r2: fFit.r2,
        density_slope: dFit.slope,
        tstar,
      },
    },
  };
}

function windowVsTime(spec: FigureSpec): Rendered {
  const tstar = requireTstar(spec.input);
  const report = readReport(spec.input) as {
    checks?: {
      concentration_alpha?: { table?: [number, number][] };
      bidirectional?: { predicted_window_exponent?: number; beta_hat?: number };
    };
  };
  const table = report.checks?.concentration_alpha?.table;
  if (!table || table.length < 2) {
    throw new Error(
      `${spec.input}: analysis/report.json has no concentration_alpha.table (run the rates analysis first)`,
    );
  }
  const gaps = table.map(([g]) => g);
  const sides = table.map(([, s]) => s);
  const fit = logLogFit(gaps, sides);
  const t = gaps.map((g) => tstar - g);
  const predicted = report.checks?.bidirectional?.predicted_window_exponent ?? null;
  const series = [
    { x: t, y: sides, color: "#1f6fb2", label: "smallest capturing side", markers: true },
  ];
  if (predicted !== null) {
    // reference curve anchored at the widest-gap sample
    const c = sides[0] / gaps[0] ** predicted;
    series.push({
      x: t,
      y: gaps.map((g) => c * g ** predicted),
      color: "#d05020",
      label: `reference exponent ${predicted.toFixed(3)}`,
      markers: false,
    });
  }
  const svg = lineChart({
    title: spec.title ?? "Concentration window shrink",
    xLabel: "t",
    yLabel: "window side",
    series,
    annotations: [
      `fitted shrink exponent ${fit.slope.toFixed(4)}`,
      predicted === null ? "no reference exponent in report" : `reference ${predicted.toFixed(4)}`,
    ],
  });
  return {
    svg,
    sidecar: {
      kind: "window-vs-time",
      input: spec.input,
      fitted_slope: fit.slope,
      fit_points: fit.points,
      annotations: { reference_exponent: predicted, tstar },
    },
  };
}

interface ScanBox {
  side: number;
  cornerX: number;
  cornerY: number | null;
}

/** Scan columns from analysis/rescan.csv, keyed by row time. */
function readRescanBoxes(runDir: string, d: number, halfWidth: number, n: number):
    Map<number, ScanBox> {
  const path = join(runDir, "analysis", "rescan.csv");
  const out = new Map<number, ScanBox>();
  if (!existsSync(path)) return out;
  const rows = parseCsv(readFileSync(path, "utf8"));
  const header = rows[0];
  const it = header.indexOf("t");
  const is = header.indexOf("scan0_scale");
  const ic0 = header.indexOf("scan0_corner0");
  const ic1 = header.indexOf("scan0_corner1");
  if (it < 0 || is < 0 || ic0 < 0) return out;
  const h = (2 * halfWidth) / n;
  for (const row of rows.slice(1)) {
    if (row.length <= ic0 || row[is] === "" || row[is] === undefined) continue;
    const side = Number(row[is]);
    const c0 = Number(row[ic0]);
    if (Number.isNaN(side) || Number.isNaN(c0)) continue;
    out.set(Number(row[it]), {
      side,
      cornerX: -halfWidth + c0 * h,
      cornerY: d === 2 && ic1 >= 0 ? -halfWidth + Number(row[ic1]) * h : null,
    });
  }
  return out;
}

function downsampleMax(values: Float64Array, from: number, to: number): number[] {
  const out = new Array<number>(to).fill(0);
  for (let i = 0; i < from; i++) {
    const j = Math.min(to - 1, Math.floor((i * to) / from));
    if (values[i] > out[j]) out[j] = values[i];
  }
  return out;
}

function fieldHeatmap(spec: FigureSpec): Rendered {
  const meta = readRunMeta(spec.input);
  const index = readSnapshotIndex(spec.input);
  if (index.length === 0) {
    throw new Error(`${spec.input}: run directory holds no snapshots`);
  }
  const d = meta.equation.d;
  const boxes = readRescanBoxes(spec.input, d, meta.grid.half_width, meta.grid.n);

  if (d === 2) {
    const k = spec.snapshot ?? index.length - 1;
    if (k < 0 || k >= index.length) {
      throw new Error(`snapshot index ${k} out of range (0..${index.length - 1})`);
    }
    const state = readFieldState(join(spec.input, "snapshots", index[k].file));
    const cols = Math.min(state.n, 160);
    const matrix: number[][] = [];
    for (let i = 0; i < state.n; i++) {
      const row = state.abs2.subarray(i * state.n, (i + 1) * state.n);
      matrix.push(downsampleMax(row as Float64Array, state.n, cols));
    }
    // pool rows too (row index = first axis = x0, drawn upward)
    const pooled: number[][] = [];
    for (let j = 0; j < cols; j++) pooled.push(new Array(cols).fill(0));
    for (let i = 0; i < state.n; i++) {
      const pi = Math.min(cols - 1, Math.floor((i * cols) / state.n));
      for (let j = 0; j < cols; j++) {
        pooled[pi][j] = Math.max(pooled[pi][j], matrix[i][j]);
      }
    }
    const box = boxes.get(index[k].t);
    const sup = Math.max(...pooled.map((r) => Math.max(...r)));
    const svg = heatmap({
      title: spec.title ?? `|u|^2 at t = ${index[k].t.toFixed(4)}`,
      xLabel: "x1",
      yLabel: "x0",
      values: pooled,
      xRange: [-state.halfWidth, state.halfWidth],
      yRange: [-state.halfWidth, state.halfWidth],
      box: box && box.cornerY !== null
        ? { x0: box.cornerY, y0: box.cornerX, x1: box.cornerY + box.side, y1: box.cornerX + box.side, label: "argmax cube" }
        : undefined,
      annotations: [`sup |u|^2 = ${sup.toExponential(3)}`],
    });
    return {
      svg,
      sidecar: {
        kind: "field-heatmap",
        input: spec.input,
        fitted_slope: 0,
        fit_points: 1,
        annotations: { snapshot_t: index[k].t, sup_sq: sup, boxed: box ? 1 : 0 },
      },
    };
  }

  // d = 1: time-by-space amplitude map across all snapshots, with the
  // per-snapshot argmax window drawn as a shrinking band
  const cols = 192;
  const values: number[][] = [];
  const times: number[] = [];
  const sups: number[] = [];
  let halfWidth = meta.grid.half_width;
  for (const entry of index) {
    const state = readFieldState(join(spec.input, "snapshots", entry.file));
    halfWidth = state.halfWidth;
    values.push(downsampleMax(state.abs2, state.n, cols));
    times.push(entry.t);
    sups.push(Math.max(...values[values.length - 1]));
  }
  // rows are time going up; transpose so x runs horizontally? keep rows =
  // snapshots and label axes accordingly (y = t index ascending)
  const tstar = meta.tstar;
  let slope = 0;
  let points = 1;
  if (tstar !== null && tstar !== undefined) {
    const gaps = times.filter((t) => t < tstar).map((t) => tstar - t);
    const amp = sups.slice(0, gaps.length);
    const fit = logLogFit(gaps, amp);
    slope = fit.slope;
    points = fit.points;
  }
  const lower: { x: number[]; y: number[] } = { x: [], y: [] };
  const upper: { x: number[]; y: number[] } = { x: [], y: [] };
  for (const t of times) {
    const box = boxes.get(t);
    if (box) {
      lower.x.push(t);
      lower.y.push(box.cornerX);
      upper.x.push(t);
      upper.y.push(box.cornerX + box.side);
    }
  }
  // heatmap expects values[row][col] with row 0 at the bottom; use time as
  // the vertical axis so the collapse reads upward
  const svg = heatmap({
    title: spec.title ?? "|u|^2 history",
    xLabel: "x",
    yLabel: "snapshot time (bottom to top)",
    values,
    xRange: [-halfWidth, halfWidth],
    yRange: [times[0], times[times.length - 1]],
    box: boxFromBand(lower, upper),
    annotations: [
      `amplitude exponent ${slope.toFixed(4)} vs time to blow-up`,
      `${times.length} snapshots`,
    ],
  });
  return {
    svg,
    sidecar: {
      kind: "field-heatmap",
      input: spec.input,
      fitted_slope: slope,
      fit_points: points,
      annotations: { snapshots: times.length, tstar: tstar ?? null },
    },
  };
}

function boxFromBand(
  lower: { x: number[]; y: number[] },
  upper: { x: number[]; y: number[] },
): { x0: number; y0: number; x1: number; y1: number; label: string } | undefined {
  if (lower.x.length === 0) return undefined;
  const k = lower.x.length - 1;
  return {
    x0: lower.y[k],
    y0: lower.x[0],
    x1: upper.y[k],
    y1: upper.x[k],
    label: "argmax window (last snapshot)",
  };
}

function persistenceCurve(spec: FigureSpec): Rendered {
  const rows = readPersistenceCsv(spec.input);
  const t = rows.map((r) => r.t);
  const captured = rows.map((r) => r.captured_mass);
  const threshold = rows[0].threshold;
  const bound = Math.max(...t.map(Math.abs));
  const fit = linearFit(t, captured);
  const svg = lineChart({
    title: spec.title ?? "Captured mass under the free flow",
    xLabel: "t",
    yLabel: "captured mass",
    series: [
      { x: t, y: captured, color: "#1f6fb2", label: "captured mass", markers: true },
    ],
    hLines: [{ y: threshold, color: "#d05020", label: "c1 / 2" }],
    vLines: [
      { x: -bound, color: "#707070", label: "-bound" },
      { x: bound, color: "#707070", label: "+bound" },
    ],
    annotations: [
      `fitted drift slope ${fit.slope.toExponential(3)}`,
      `min captured ${Math.min(...captured).toFixed(6)}`,
    ],
  });
  return {
    svg,
    sidecar: {
      kind: "persistence-curve",
      input: spec.input,
      fitted_slope: fit.slope,
      fit_points: fit.points,
      annotations: {
        threshold,
        bound,
        min_captured: Math.min(...captured),
        all_above: Math.min(...captured) >= threshold ? 1 : 0,
      },
    },
  };
}
