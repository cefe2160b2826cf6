/** Minimal CSV reading for the simulator's documented schemas.
 *
 * Parsers fail loudly, naming the offending column, so a schema drift in
 * the inputs never produces a silently wrong figure.
 */

import { readFileSync } from "fs";

import type { DiagRow, PersistenceRow } from "./types.js";

export function parseCsv(text: string): string[][] {
  // the simulator never quotes fields, so a plain split is faithful
  return text
    .split(/\r?\n/)
    .filter((line) => line.length > 0)
    .map((line) => line.split(","));
}

function requireColumns(header: string[], required: string[], path: string): number[] {
  return required.map((name) => {
    const idx = header.indexOf(name);
    if (idx < 0) {
      throw new Error(`${path}: missing required column "${name}" (found: ${header.join(", ")})`);
    }
    return idx;
  });
}

const DIAG_COLUMNS = ["t", "mass", "density", "F", "sup_norm", "tail_fraction"];

export function readDiagnosticsCsv(path: string): DiagRow[] {
  const rows = parseCsv(readFileSync(path, "utf8"));
  if (rows.length === 0) {
    throw new Error(`${path}: empty diagnostics file`);
  }
  const idx = requireColumns(rows[0], DIAG_COLUMNS, path);
  const body = rows.slice(1);
  if (body.length === 0) {
    throw new Error(`${path}: diagnostics file has a header but no rows`);
  }
  return body.map((row, i) => {
    const vals = idx.map((j) => Number(row[j]));
    if (vals.some((v) => Number.isNaN(v))) {
      throw new Error(`${path}: non-numeric value in data row ${i + 1}`);
    }
    const [t, mass, density, F, sup, tail] = vals;
    return { t, mass, density, F, sup_norm: sup, tail_fraction: tail };
  });
}

const PERSIST_COLUMNS = ["t", "captured_mass", "threshold"];

export function readPersistenceCsv(path: string): PersistenceRow[] {
  const rows = parseCsv(readFileSync(path, "utf8"));
  if (rows.length === 0) {
    throw new Error(`${path}: empty persistence file`);
  }
  const idx = requireColumns(rows[0], PERSIST_COLUMNS, path);
  const body = rows.slice(1);
  if (body.length === 0) {
    throw new Error(`${path}: persistence file has a header but no rows`);
  }
  return body.map((row, i) => {
    const vals = idx.map((j) => Number(row[j]));
    if (vals.some((v) => Number.isNaN(v))) {
      throw new Error(`${path}: non-numeric value in data row ${i + 1}`);
    }
    return { t: vals[0], captured_mass: vals[1], threshold: vals[2] };
  });
}
