import { describe, expect, it } from "vitest";

import { linearFit, logLogFit } from "../src/fit.js";

describe("linearFit", () => {
  it("recovers an exact line", () => {
    const x = [0, 1, 2, 3, 4];
    const y = x.map((v) => 2.5 * v - 1.0);
    const fit = linearFit(x, y);
    expect(fit.slope).toBeCloseTo(2.5, 12);
    expect(fit.intercept).toBeCloseTo(-1.0, 12);
    expect(fit.r2).toBeCloseTo(1.0, 12);
  });

  it("rejects degenerate input", () => {
    expect(() => linearFit([1, 1], [0, 1])).toThrow(/degenerate/);
    expect(() => linearFit([1], [0])).toThrow(/at least 2/);
  });
});

describe("logLogFit", () => {
  it("recovers a power-law exponent", () => {
    const x = [0.05, 0.1, 0.2, 0.4];
    const y = x.map((v) => 3.0 * v ** -2.0);
    const fit = logLogFit(x, y);
    expect(fit.slope).toBeCloseTo(-2.0, 10);
  });

  it("skips non-positive samples", () => {
    const fit = logLogFit([0.1, 0.2, -1, 0.4], [1, 4, 9, 16]);
    expect(fit.points).toBe(3);
  });
});
