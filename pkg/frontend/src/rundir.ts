/** Run-directory access: meta.json, snapshot index, binary states.
 *
 * Binary layout (little endian): magic "BXF1", kind u8 (0 field), d u8,
 * reserved u16, n u32, half_width f64, tag "2PI\0", then n^d complex
 * values as (re, im) f64 pairs in C order.
 */

import { readFileSync } from "fs";
import { join } from "path";

import type { FieldState, RunMeta, SnapshotEntry } from "./types.js";

export function readRunMeta(runDir: string): RunMeta {
  const meta = JSON.parse(readFileSync(join(runDir, "meta.json"), "utf8"));
  if (!meta.equation || typeof meta.equation.d !== "number") {
    throw new Error(`${runDir}/meta.json: missing equation.d`);
  }
  return meta as RunMeta;
}

export function readSnapshotIndex(runDir: string): SnapshotEntry[] {
  const index = JSON.parse(
    readFileSync(join(runDir, "snapshots", "index.json"), "utf8"),
  );
  if (!Array.isArray(index.snapshots)) {
    throw new Error(`${runDir}: snapshot index has no "snapshots" array`);
  }
  return index.snapshots as SnapshotEntry[];
}

export function readReport(runDir: string): Record<string, unknown> {
  return JSON.parse(
    readFileSync(join(runDir, "analysis", "report.json"), "utf8"),
  ) as Record<string, unknown>;
}

const HEADER_BYTES = 24;

export function readFieldState(path: string): FieldState {
  const buf = readFileSync(path);
  if (buf.length < HEADER_BYTES) {
    throw new Error(`${path}: truncated header`);
  }
  if (buf.toString("latin1", 0, 4) !== "BXF1") {
    throw new Error(`${path}: bad magic`);
  }
  const kind = buf.readUInt8(4);
  if (kind !== 0) {
    throw new Error(`${path}: expected field samples (kind 0), found kind ${kind}`);
  }
  const d = buf.readUInt8(5);
  const n = buf.readUInt32LE(8);
  const halfWidth = buf.readDoubleLE(12);
  if (buf.toString("latin1", 20, 23) !== "2PI") {
    throw new Error(`${path}: unknown convention tag`);
  }
  const count = d === 1 ? n : n * n;
  const expected = HEADER_BYTES + 16 * count;
  if (buf.length !== expected) {
    throw new Error(`${path}: expected ${expected} bytes, found ${buf.length}`);
  }
  const abs2 = new Float64Array(count);
  for (let i = 0; i < count; i++) {
    const re = buf.readDoubleLE(HEADER_BYTES + 16 * i);
    const im = buf.readDoubleLE(HEADER_BYTES + 16 * i + 8);
    abs2[i] = re * re + im * im;
  }
  return { d, n, halfWidth, abs2 };
}
