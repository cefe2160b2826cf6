/** Shared shapes for the renderer: inputs mirror the simulator's schemas. */

export type FigureKind =
  | "rate-loglog"
  | "window-vs-time"
  | "field-heatmap"
  | "persistence-curve";

export interface FigureSpec {
  kind: FigureKind;
  input: string;           // run directory or CSV file, depending on kind
  output: string;          // SVG path; a sidecar JSON lands next to it
  snapshot?: number;       // heatmap only: snapshot index (default: last)
  title?: string;
}

/** One row of diagnostics.csv. */
export interface DiagRow {
  t: number;
  mass: number;
  density: number;
  F: number;
  sup_norm: number;
  tail_fraction: number;
}

export interface RunMeta {
  tstar: number | null;
  tstar_source?: string;
  equation: { d: number; sign: number; p?: number };
  grid: { n: number; half_width: number };
  reason?: string;
  initial_mass?: number;
}

export interface SnapshotEntry {
  file: string;
  t: number;
}

/** Decoded binary state (kind 0 = field samples). */
export interface FieldState {
  d: number;
  n: number;
  halfWidth: number;
  /** |value|^2 per sample, C order. */
  abs2: Float64Array;
}

export interface PersistenceRow {
  t: number;
  captured_mass: number;
  threshold: number;
}

/** Written next to every figure so the annotations are machine-checkable. */
export interface Sidecar {
  kind: FigureKind;
  input: string;
  fitted_slope: number;
  fit_points: number;
  annotations: Record<string, number | string | null>;
}
