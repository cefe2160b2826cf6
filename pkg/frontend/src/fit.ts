/** Least-squares slope annotation for the plotted points. */

export interface SlopeFit {
  slope: number;
  intercept: number;
  r2: number;
  points: number;
}

export function linearFit(x: number[], y: number[]): SlopeFit {
  if (x.length !== y.length || x.length < 2) {
    throw new Error(`need at least 2 paired samples, got ${x.length}`);
  }
  const n = x.length;
  const mx = x.reduce((a, b) => a + b, 0) / n;
  const my = y.reduce((a, b) => a + b, 0) / n;
  let sxx = 0;
  let sxy = 0;
  let syy = 0;
  for (let i = 0; i < n; i++) {
    sxx += (x[i] - mx) ** 2;
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) ** 2;
  }
  if (sxx === 0) {
    throw new Error("degenerate fit: all abscissae identical");
  }
  const slope = sxy / sxx;
  const intercept = my - slope * mx;
  const r2 = syy === 0 ? 1 : (sxy * sxy) / (sxx * syy);
  return { slope, intercept, r2, points: n };
}

/** Slope of log10 y against log10 x, skipping non-positive samples. */
export function logLogFit(x: number[], y: number[]): SlopeFit {
  const lx: number[] = [];
  const ly: number[] = [];
  for (let i = 0; i < x.length; i++) {
    if (x[i] > 0 && y[i] > 0) {
      lx.push(Math.log10(x[i]));
      ly.push(Math.log10(y[i]));
    }
  }
  if (lx.length < 2) {
    throw new Error("log-log fit needs at least 2 positive samples");
  }
  return linearFit(lx, ly);
}
