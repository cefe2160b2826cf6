import { existsSync, mkdtempSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import { describe, expect, it } from "vitest";

import { render } from "../src/render.js";
import { main } from "../src/cli.js";
import { makeFakeRun, makePersistenceCsv } from "./fixtures.js";

function tmp(): string {
  return mkdtempSync(join(tmpdir(), "plotview-"));
}

describe("rate-loglog", () => {
  it("annotates the accumulated-norm slope", () => {
    const run = makeFakeRun(join(tmp(), "run"));
    const out = render({ kind: "rate-loglog", input: run, output: "x.svg" });
    expect(out.svg.startsWith("<svg")).toBe(true);
    expect(out.svg).toContain("fitted slope");
    // F = 1/gap - 1 on gaps in [0.1, 0.5]: slope is steeper than -1
    expect(out.sidecar.fitted_slope).toBeLessThan(-1.0);
    expect(out.sidecar.fitted_slope).toBeGreaterThan(-1.6);
    expect(out.sidecar.annotations.density_slope as number).toBeCloseTo(-2.0, 6);
  });

  it("fails on an empty diagnostics file", () => {
    const run = makeFakeRun(join(tmp(), "run"));
    writeFileSync(join(run, "diagnostics.csv"), "");
    expect(() => render({ kind: "rate-loglog", input: run, output: "x.svg" }))
      .toThrow(/empty/);
  });
});

describe("window-vs-time", () => {
  it("fits the shrink exponent and draws the reference", () => {
    const run = makeFakeRun(join(tmp(), "run"));
    const out = render({ kind: "window-vs-time", input: run, output: "w.svg" });
    expect(out.sidecar.fitted_slope).toBeCloseTo(1.0, 6);
    expect(out.sidecar.annotations.reference_exponent as number).toBeCloseTo(0.6, 12);
    expect(out.svg).toContain("reference exponent");
  });

  it("asks for the rates analysis when the table is missing", () => {
    const run = makeFakeRun(join(tmp(), "run"), { withReport: false });
    expect(() => render({ kind: "window-vs-time", input: run, output: "w.svg" }))
      .toThrow(/report\.json/);
  });
});

describe("field-heatmap", () => {
  it("renders the 1d time-space map with the amplitude exponent", () => {
    const run = makeFakeRun(join(tmp(), "run"));
    const out = render({ kind: "field-heatmap", input: run, output: "h.svg" });
    expect(out.svg).toContain("amplitude exponent");
    // sup |u|^2 = 1/gap for the fixture profile
    expect(out.sidecar.fitted_slope).toBeCloseTo(-1.0, 5);
    expect(out.svg).toContain("argmax window");
  });

  it("renders a single 2d snapshot with the argmax cube", () => {
    const run = makeFakeRun(join(tmp(), "run2"), { d: 2, n: 32 });
    const out = render({ kind: "field-heatmap", input: run, output: "h.svg", snapshot: 3 });
    expect(out.svg).toContain("argmax cube");
    expect(out.sidecar.annotations.boxed).toBe(1);
  });

  it("rejects an out-of-range snapshot index", () => {
    const run = makeFakeRun(join(tmp(), "run2"), { d: 2, n: 32 });
    expect(() => render({ kind: "field-heatmap", input: run, output: "h.svg", snapshot: 99 }))
      .toThrow(/out of range/);
  });
});

describe("persistence-curve", () => {
  it("draws threshold and bound markers", () => {
    const csv = makePersistenceCsv(join(tmp(), "case.csv"));
    const out = render({ kind: "persistence-curve", input: csv, output: "p.svg" });
    expect(out.svg).toContain("c1 / 2");
    expect(out.svg).toContain("+bound");
    expect(out.sidecar.annotations.all_above).toBe(1);
    expect(Number.isFinite(out.sidecar.fitted_slope)).toBe(true);
  });
});

describe("cli main", () => {
  it("writes the figure and its sidecar", () => {
    const dir = tmp();
    const run = makeFakeRun(join(dir, "run"));
    const out = join(dir, "rate.svg");
    const code = main(["rate-loglog", "--in", run, "--out", out]);
    expect(code).toBe(0);
    expect(existsSync(out)).toBe(true);
    expect(existsSync(out + ".json")).toBe(true);
  });

  it("writes nothing on schema failure", () => {
    const dir = tmp();
    const run = makeFakeRun(join(dir, "run"));
    writeFileSync(join(run, "diagnostics.csv"), "t,mass\n1,1\n");
    const out = join(dir, "rate.svg");
    const code = main(["rate-loglog", "--in", run, "--out", out]);
    expect(code).toBe(1);
    expect(existsSync(out)).toBe(false);
  });

  it("rejects unknown kinds and missing flags", () => {
    expect(main(["scatter", "--in", "a", "--out", "b"])).toBe(1);
    expect(main(["rate-loglog", "--in", "a"])).toBe(1);
  });
});
