/** Synthetic run-directory builders mirroring the simulator's formats. */

import { mkdirSync, writeFileSync } from "fs";
import { join } from "path";

export function writeFieldBxf(
  path: string,
  d: number,
  n: number,
  halfWidth: number,
  values: { re: number; im: number }[],
): void {
  const count = d === 1 ? n : n * n;
  if (values.length !== count) {
    throw new Error(`need ${count} values, got ${values.length}`);
  }
  const buf = Buffer.alloc(24 + 16 * count);
  buf.write("BXF1", 0, "latin1");
  buf.writeUInt8(0, 4);
  buf.writeUInt8(d, 5);
  buf.writeUInt16LE(0, 6);
  buf.writeUInt32LE(n, 8);
  buf.writeDoubleLE(halfWidth, 12);
  buf.write("2PI\0", 20, "latin1");
  values.forEach((v, i) => {
    buf.writeDoubleLE(v.re, 24 + 16 * i);
    buf.writeDoubleLE(v.im, 24 + 16 * i + 8);
  });
  writeFileSync(path, buf);
}

export interface FakeRunOptions {
  tstar?: number;
  d?: number;
  n?: number;
  halfWidth?: number;
  withReport?: boolean;
  withRescan?: boolean;
}

/** Build a run directory for the explicit blow-up profile shape:
 * density (tstar - t)^-2, F = 1/(tstar-t) - 1, gaussian-like snapshots of
 * width (tstar - t). */
export function makeFakeRun(dir: string, opts: FakeRunOptions = {}): string {
  const tstar = opts.tstar ?? 1.0;
  const d = opts.d ?? 1;
  const n = opts.n ?? 64;
  const halfWidth = opts.halfWidth ?? 8.0;
  mkdirSync(join(dir, "snapshots"), { recursive: true });
  mkdirSync(join(dir, "analysis"), { recursive: true });

  const times = [0.5, 0.6, 0.7, 0.75, 0.8, 0.84, 0.88, 0.9];
  const h = (2 * halfWidth) / n;

  const diagRows = ["t,mass,density,F,sup_norm,tail_fraction"];
  for (const t of times) {
    const gap = tstar - t;
    diagRows.push(
      [t, 1.0, gap ** -2, 1 / gap - 1, gap ** -0.5, 0.0].map(String).join(","),
    );
  }
  writeFileSync(join(dir, "diagnostics.csv"), diagRows.join("\n") + "\n");

  const index: { file: string; t: number }[] = [];
  const rescanRows = [
    "t,mass,density,F,sup_norm,tail_fraction,scan0_scale,scan0_max_mass," +
      (d === 1 ? "scan0_corner0" : "scan0_corner0,scan0_corner1"),
  ];
  times.forEach((t, k) => {
    const gap = tstar - t;
    const file = `snap_${String(k).padStart(5, "0")}.bxf`;
    const values: { re: number; im: number }[] = [];
    if (d === 1) {
      for (let j = 0; j < n; j++) {
        const x = -halfWidth + j * h;
        values.push({ re: Math.exp(-((x / gap) ** 2)) / Math.sqrt(gap), im: 0 });
      }
    } else {
      for (let i = 0; i < n; i++) {
        for (let j = 0; j < n; j++) {
          const x = -halfWidth + i * h;
          const y = -halfWidth + j * h;
          values.push({ re: Math.exp(-((x * x + y * y) / gap ** 2)) / gap, im: 0 });
        }
      }
    }
    writeFieldBxf(join(dir, "snapshots", file), d, n, halfWidth, values);
    index.push({ file, t });
    const m = Math.max(1, Math.round(gap / h));
    const corner = Math.round(n / 2 - m / 2);
    const cornerCols = d === 1 ? `${corner}` : `${corner},${corner}`;
    rescanRows.push(
      [t, 1.0, gap ** -2, 1 / gap - 1, gap ** -0.5, 0.0, m * h, 0.5].map(String).join(",") +
        "," + cornerCols,
    );
  });
  writeFileSync(join(dir, "snapshots", "index.json"),
    JSON.stringify({ snapshots: index }, null, 2));

  writeFileSync(join(dir, "meta.json"), JSON.stringify({
    name: "fake",
    tstar,
    tstar_source: "seeded",
    equation: { d, sign: -1, p: d === 1 ? 5 : 3 },
    grid: { n, half_width: halfWidth },
    reason: "blowup-detected",
    initial_mass: 1.0,
  }, null, 2));

  if (opts.withRescan ?? true) {
    writeFileSync(join(dir, "analysis", "rescan.csv"), rescanRows.join("\n") + "\n");
  }
  if (opts.withReport ?? true) {
    const table = times.map((t) => [tstar - t, (tstar - t) * 0.9]);
    writeFileSync(join(dir, "analysis", "report.json"), JSON.stringify({
      tstar,
      checks: {
        concentration_alpha: { table, alpha_hat: 1.0 },
        bidirectional: { beta_hat: 0.2, predicted_window_exponent: 0.6 },
      },
    }, null, 2));
  }
  return dir;
}

export function makePersistenceCsv(path: string): string {
  const rows = ["t,captured_mass,threshold"];
  const bound = 6.33e-3;
  for (let i = 0; i < 21; i++) {
    const t = -bound + (2 * bound * i) / 20;
    rows.push([t, 0.45 - 0.5 * t * t, 0.235].map(String).join(","));
  }
  writeFileSync(path, rows.join("\n") + "\n");
  return path;
}
