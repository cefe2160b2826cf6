"""Scenario configuration, run persistence, scripted experiments.

Run directories are append-only and self-describing: the scenario text is
copied in as ``manifest.txt``, states go to ``snapshots/``, the per-time
series to ``diagnostics.csv`` and derived analyses to ``analysis/``.
Re-running an analysis on the same directory reproduces byte-identical
outputs.

Scenario files are flat ``key = value`` text with ``#`` comments and
dotted keys; see ``SCENARIO_KEYS`` for the schema.  Parse errors carry the
offending line number.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .diagnostics import (
    EXPONENT_TOL,
    KappaParams,
    TimeSeries,
    accumulate_F,
    check_local_estimate,
    check_log_lower_bound,
    concentration_scan,
    concentration_scale_table,
    estimate_alpha,
    eta_partition,
    fit_power_law,
    mass as field_mass,
)
from .errors import BlowscopeError, ConfigError, InsufficientWindow
from .formats import (
    dump_json,
    load_json,
    read_diagnostics_csv,
    read_field,
    write_diagnostics_csv,
    write_field,
)
from .integrator import Cadence, EquationSpec, RunResult, StepControl, run
from .lemma_lab import make_case, rescaled_persistence, run_persistence
from .solutions import (
    PseudoconformalFamily,
    gaussian,
    ground_state,
    pseudoconformal_blowup,
    soliton,
)
from .spectral import Field, Grid

SCENARIO_KEYS = """
name                  run label (free text)
equation.d            1 or 2
equation.sign         focusing | defocusing
grid.n                points per axis (power of two)
grid.half_width       box half width
init.kind             gaussian | soliton | pseudoconformal | file
init.amplitude        gaussian amplitude        (gaussian)
init.width            gaussian width            (gaussian)
init.center           gaussian center, comma separated (gaussian)
init.tstar            seeded blow-up time       (pseudoconformal)
init.path             state file                (file)
step.dt_init          largest step
step.dt_min           smallest step before aborting
step.c_dt             target nonlinear phase per step
step.m_stop           amplitude stop threshold
step.rho_tail         spectral-tail stop fraction
step.t_max            time limit
cadence.diag_stride   steps between diagnostics rows
cadence.snap_stride   steps between snapshots
diag.eta              interval-partition level (default 0.5)
diag.eps_level_frac   concentration level as a fraction of the mass (default 0.25)
diag.alpha            window-exponent hypothesis (default 1.0)
diag.fit_lo           fit-window lower time (default 0.5 * tstar)
output.dir            run directory
"""


def parse_kv_text(text: str) -> dict:
    """Flat key = value parser; values keep their source line for errors."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError("empty key", line=lineno)
        if key in out:
            raise ConfigError(f"duplicate key {key!r}", line=lineno)
        out[key] = (value, lineno)
    return out


_REQUIRED = object()


class _KV:
    def __init__(self, pairs: dict, source: str):
        self.pairs = pairs
        self.source = source

    def get(self, key, cast=str, default=_REQUIRED):
        if key in self.pairs:
            value, lineno = self.pairs[key]
            try:
                if cast is bool:
                    return value.lower() in ("1", "true", "yes")
                return cast(value)
            except ValueError:
                raise ConfigError(f"{key}: cannot read {value!r} as {cast.__name__}",
                                  line=lineno) from None
        if default is _REQUIRED:
            raise ConfigError(f"missing required key {key!r} in {self.source}")
        return default


@dataclass
class Scenario:
    name: str
    eq: EquationSpec
    grid: Grid
    init_kind: str
    init_params: dict
    ctl: StepControl
    cadence: Cadence
    eta: float
    eps_level_frac: float
    alpha: float
    fit_lo: Optional[float]
    tstar_seeded: Optional[float]
    out_dir: str
    text: str


def parse_scenario(text: str) -> Scenario:
    kv = _KV(parse_kv_text(text), "scenario")
    req = _REQUIRED
    d = kv.get("equation.d", int, req)
    sign_word = kv.get("equation.sign", str, req)
    if sign_word not in ("focusing", "defocusing"):
        raise ConfigError(f"equation.sign must be focusing or defocusing, got {sign_word!r}")
    eq = EquationSpec(d, -1 if sign_word == "focusing" else +1)
    grid = Grid(d, kv.get("grid.n", int, req), kv.get("grid.half_width", float, req))
    init_kind = kv.get("init.kind", str, req)
    init_params = {}
    tstar_seeded = None
    if init_kind == "gaussian":
        init_params = {
            "amplitude": kv.get("init.amplitude", float, 1.0),
            "width": kv.get("init.width", float, 1.0),
            "center": kv.get("init.center", str, "0"),
        }
    elif init_kind == "pseudoconformal":
        tstar_seeded = kv.get("init.tstar", float, req)
        init_params = {"tstar": tstar_seeded}
    elif init_kind == "soliton":
        init_params = {}
    elif init_kind == "file":
        path = kv.get("init.path", str, req)
        if not Path(path).exists():
            raise ConfigError(f"init.path does not exist: {path}")
        init_params = {"path": path}
    else:
        raise ConfigError(f"unknown init.kind {init_kind!r}")
    ctl = StepControl(
        dt_init=kv.get("step.dt_init", float, req),
        dt_min=kv.get("step.dt_min", float, req),
        c_dt=kv.get("step.c_dt", float, 5e-3),
        m_stop=kv.get("step.m_stop", float, req),
        rho_tail=kv.get("step.rho_tail", float, 0.125),
        t_max=kv.get("step.t_max", float, req),
    )
    cadence = Cadence(
        diag_stride=kv.get("cadence.diag_stride", int, 10),
        snap_stride=kv.get("cadence.snap_stride", int, 100),
    )
    scenario = Scenario(
        name=kv.get("name", str, "run"),
        eq=eq, grid=grid, init_kind=init_kind, init_params=init_params,
        ctl=ctl, cadence=cadence,
        eta=kv.get("diag.eta", float, 0.5),
        eps_level_frac=kv.get("diag.eps_level_frac", float, 0.25),
        alpha=kv.get("diag.alpha", float, 1.0),
        fit_lo=kv.get("diag.fit_lo", float, None),
        tstar_seeded=tstar_seeded,
        out_dir=kv.get("output.dir", str, req),
        text=text,
    )
    return scenario


def build_initial_data(sc: Scenario) -> Field:
    if sc.init_kind == "gaussian":
        center = [float(v) for v in str(sc.init_params["center"]).split(",")]
        if len(center) == 1 and sc.grid.d == 2:
            center = center * 2
        return gaussian(sc.init_params["amplitude"], sc.init_params["width"], center, sc.grid)
    if sc.init_kind == "soliton":
        return soliton(ground_state(sc.eq.d), 0.0, sc.grid)
    if sc.init_kind == "pseudoconformal":
        fam = PseudoconformalFamily(sc.eq.d, sc.init_params["tstar"], ground_state(sc.eq.d))
        return pseudoconformal_blowup(fam, 0.0, sc.grid)
    if sc.init_kind == "file":
        return read_field(sc.init_params["path"])
    raise ConfigError(f"unknown init kind {sc.init_kind}")


def simulate(sc: Scenario, base_dir: Optional[str] = None) -> Path:
    """Run the scenario and persist everything into its run directory."""
    out = Path(base_dir) / sc.out_dir if base_dir else Path(sc.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "snapshots").mkdir(exist_ok=True)
    u0 = build_initial_data(sc)
    result = run(u0, sc.eq, sc.ctl, sc.cadence)
    (out / "manifest.txt").write_text(sc.text)
    write_diagnostics_csv(out / "diagnostics.csv", accumulate_F(result.series))
    index = []
    for i, (t, f) in enumerate(result.snapshots):
        name = f"snap_{i:05d}.bxf"
        write_field(out / "snapshots" / name, f)
        index.append({"file": name, "t": t})
    tstar, source = _pick_tstar(sc, result)
    dump_json(out / "snapshots" / "index.json", {"snapshots": index})
    dump_json(out / "meta.json", {
        "name": sc.name,
        "version": __version__,
        "equation": {"d": sc.eq.d, "sign": sc.eq.sign, "p": sc.eq.p},
        "grid": {"n": sc.grid.n, "half_width": sc.grid.half_width},
        "reason": result.reason,
        "flags": result.flags,
        "trusted_until": result.trusted_until,
        "tstar_estimate": result.tstar_estimate,
        "tstar_confidence": list(result.tstar_confidence) if result.tstar_confidence else None,
        "tstar_seeded": sc.tstar_seeded,
        "tstar": tstar,
        "tstar_source": source,
        "initial_mass": field_mass(u0),
        "diag": {"eta": sc.eta, "eps_level_frac": sc.eps_level_frac,
                 "alpha": sc.alpha, "fit_lo": sc.fit_lo},
    })
    return out


def _pick_tstar(sc: Scenario, result: RunResult):
    """Seeded value for exact families, fitted estimate otherwise."""
    if sc.tstar_seeded is not None:
        return sc.tstar_seeded, "seeded"
    if result.tstar_estimate is not None:
        return result.tstar_estimate, "estimated"
    return None, "unavailable"


def load_run(run_dir):
    run_dir = Path(run_dir)
    meta = load_json(run_dir / "meta.json")
    series = read_diagnostics_csv(run_dir / "diagnostics.csv", meta["equation"]["d"])
    index = load_json(run_dir / "snapshots" / "index.json")["snapshots"]
    snapshots = [(entry["t"], read_field(run_dir / "snapshots" / entry["file"]))
                 for entry in index]
    return meta, series, snapshots


def rescan(run_dir) -> Path:
    """Recompute diagnostics from the persisted snapshots (append-only)."""
    from .diagnostics import strichartz_density
    from .integrator import spectral_tail_fraction

    run_dir = Path(run_dir)
    meta, _, snapshots = load_run(run_dir)
    d = meta["equation"]["d"]
    tstar = meta.get("tstar")
    rows = {"t": [], "mass": [], "density": [], "sup": [], "tail": []}
    scans = []
    for t, f in snapshots:
        rows["t"].append(t)
        rows["mass"].append(field_mass(f))
        rows["density"].append(strichartz_density(f, d))
        rows["sup"].append(float(np.abs(f.values).max()))
        rows["tail"].append(spectral_tail_fraction(f))
        per = []
        if tstar is not None and t < tstar and (tstar - t) >= f.grid.h:
            per.append(concentration_scan(f, tstar - t))
        scans.append(per)
    ts = TimeSeries(d=d, t=np.asarray(rows["t"]), mass=np.asarray(rows["mass"]),
                    density=np.asarray(rows["density"]), sup_norm=np.asarray(rows["sup"]),
                    tail_fraction=np.asarray(rows["tail"]), scans=scans)
    ts = accumulate_F(ts)
    analysis = run_dir / "analysis"
    analysis.mkdir(exist_ok=True)
    write_diagnostics_csv(analysis / "rescan.csv", ts)
    return analysis / "rescan.csv"


def rates(run_dir, *, eta: Optional[float] = None, eps_level: Optional[float] = None,
          alpha: Optional[float] = None, tol: float = EXPONENT_TOL) -> dict:
    """Fit explosion/window exponents on a run directory and write report.json."""
    run_dir = Path(run_dir)
    meta, series, snapshots = load_run(run_dir)
    d = meta["equation"]["d"]
    tstar = meta.get("tstar")
    if tstar is None:
        raise InsufficientWindow("run has no blow-up time; rates are undefined")
    m0 = meta["initial_mass"]
    diag = meta.get("diag", {})
    eta = eta if eta is not None else diag.get("eta", 0.5)
    eps_level = eps_level if eps_level is not None else diag.get("eps_level_frac", 0.25) * m0
    alpha = alpha if alpha is not None else diag.get("alpha", 1.0)
    fit_lo = diag.get("fit_lo") or 0.5 * tstar
    trusted = meta.get("trusted_until") or series.t[-1]
    window = (fit_lo, min(trusted, (1 - 1e-9) * tstar))

    series = accumulate_F(series)
    sel = (series.t >= window[0]) & (series.t <= window[1]) & (series.t < tstar)
    gaps = tstar - series.t[sel]

    report = {"run": run_dir.name, "tstar": tstar, "tstar_source": meta.get("tstar_source"),
              "window": list(window), "eta": eta, "eps_level": eps_level,
              "alpha_hypothesis": alpha, "tolerance": tol, "checks": {}}

    density_fit = fit_power_law(gaps, series.density[sel])
    report["density_exponent"] = density_fit.exponent
    report["density_r2"] = density_fit.r2

    report["checks"]["local_estimate"] = check_local_estimate(
        series, alpha, eps_level, tstar=tstar, window=window, tol=tol)

    part = eta_partition(series, eta)
    inside = (part.breakpoints[:-1] >= window[0]) & (part.breakpoints[:-1] <= window[1])
    gap_fit = None
    if np.count_nonzero(inside) >= 8:
        gap_fit = fit_power_law(tstar - part.breakpoints[:-1][inside], part.gaps[inside])
    report["checks"]["interval_gaps"] = {
        "name": "interval_gaps",
        "eta": eta,
        "intervals": int(part.gaps.size),
        "exponent": None if gap_fit is None else gap_fit.exponent,
        "expected_exponent": 2.0,
        "pass": None if gap_fit is None else bool(abs(gap_fit.exponent - 2.0) <= 2 * tol),
    }

    log_run = _RunView(series, meta, snapshots)
    report["checks"]["log_lower_bound"] = check_log_lower_bound(
        log_run, tstar=tstar, window=window)

    try:
        alpha_fit = estimate_alpha(snapshots, eps_level, tstar=tstar, window=window)
        table = concentration_scale_table(
            [(t, u) for t, u in snapshots if window[0] <= t <= window[1]],
            eps_level, tstar)
        report["checks"]["concentration_alpha"] = {
            "name": "concentration_alpha",
            "alpha_hat": alpha_fit.exponent,
            "r2": alpha_fit.r2,
            "table": [[g, s] for g, s in table],
            "pass": bool(abs(alpha_fit.exponent - alpha) <= tol),
        }
    except BlowscopeError as exc:
        report["checks"]["concentration_alpha"] = {
            "name": "concentration_alpha", "pass": None,
            "status": exc.code, "detail": str(exc)}

    report["checks"]["bidirectional"] = experiment_bidirectional(
        _RunView(series, meta, snapshots), eps_level=eps_level, tol=tol)

    analysis = run_dir / "analysis"
    analysis.mkdir(exist_ok=True)
    dump_json(analysis / "report.json", report)
    return report


class _RunView:
    """Adapter giving diagnostics the RunResult surface for persisted runs."""

    def __init__(self, series, meta, snapshots):
        self.series = series
        self.snapshots = snapshots
        self.meta = meta
        self.reason = meta.get("reason", "blowup-detected")
        self.tstar_estimate = meta.get("tstar")
        self.eq = EquationSpec(meta["equation"]["d"], meta["equation"]["sign"])


def experiment_bidirectional(run, *, eps_level: float, tol: float = EXPONENT_TOL,
                             tstar: Optional[float] = None) -> dict:
    """Both implications on one blow-up run.

    (i) fit the diagonal-norm explosion exponent beta_hat and verify that
    concentration at the predicted window gap^{(1+beta_hat)/2} holds at
    every late snapshot; (ii) fit the window-shrink exponent alpha_hat and
    verify the accumulated-norm derivative explodes at least like
    gap^{-2 alpha_hat}.
    """
    series = run.series
    reason = getattr(run, "reason", "blowup-detected")
    if tstar is None:
        tstar = getattr(run, "tstar_estimate", None)
    eq = getattr(run, "eq", None)
    focusing = eq is None or eq.sign == -1
    if reason != "blowup-detected" or not focusing or tstar is None:
        return {"name": "bidirectional", "pass": None, "status": "NOT_APPLICABLE",
                "reason": reason if reason != "blowup-detected" else "not a focusing blow-up run"}
    if series.F is None:
        series = accumulate_F(series)
    d = series.d
    sel = (series.t >= 0.5 * tstar) & (series.t < tstar) & (series.F > 0)
    if np.count_nonzero(sel) < 8:
        raise InsufficientWindow("too few trusted late samples")
    gaps = tstar - series.t[sel]
    diag_norm = series.F[sel] ** (d / (2.0 * (d + 2)))
    beta_fit = fit_power_law(gaps, diag_norm)
    beta_hat = -beta_fit.exponent
    predicted = (1.0 + beta_hat) / 2.0

    snapshots = [(t, u) for (t, u) in run.snapshots if 0.5 * tstar <= t < tstar]
    holds = []
    for t, u in snapshots:
        side = max((tstar - t) ** predicted, u.grid.h)
        holds.append(concentration_scan(u, side).max_mass >= eps_level)
    direction_i = bool(holds and all(holds))

    alpha_fit = estimate_alpha(run.snapshots, eps_level, tstar=tstar,
                               window=(0.5 * tstar, tstar))
    alpha_hat = alpha_fit.exponent
    local = check_local_estimate(series, alpha_hat, eps_level, tstar=tstar,
                                 window=(0.5 * tstar, (1 - 1e-9) * tstar), tol=tol)
    return {
        "name": "bidirectional",
        "beta_hat": beta_hat,
        "predicted_window_exponent": predicted,
        "direction_i_pass": direction_i,
        "direction_i_snapshots": len(holds),
        "alpha_hat": alpha_hat,
        "derivative_exponent": local["derivative_exponent"],
        "direction_ii_pass": local["pass"],
        "pass": bool(direction_i and local["pass"]),
    }


def builtin_lemma_suite(out_dir) -> dict:
    """The five standing persistence cases plus the dilation sweep."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    g1 = Grid(1, 4096, 16.0)
    g2 = Grid(2, 512, 8.0)
    cases = {
        "indicator-1d": make_case(g1, "indicator"),
        "gaussian-1d": make_case(g1, "gaussian"),
        "gaussian-2d": make_case(g2, "gaussian"),
        "boosted-1d": make_case(g1, "gaussian", boost_xi0=(2.0,)),
        "boosted-2d": make_case(g2, "gaussian", boost_xi0=(1.0, 1.0)),
    }
    verdicts = {}
    for name, case in cases.items():
        table = run_persistence(case)
        _write_persistence_csv(out_dir / f"{name}.csv", table)
        verdicts[name] = {
            "pass": table["pass"], "t_bound": table["t_bound"],
            "t_fail": table["t_fail"], "c1": case.c1, "l2": case.l2,
        }
    sweep = rescaled_persistence(g1, "gaussian")
    verdicts["dilation-sweep"] = {
        "A_values": sweep["A_values"], "t_fail": sweep["t_fail"],
        "exponent": sweep["exponent"], "pass": sweep["pass"],
    }
    payload = {"cases": verdicts,
               "pass": bool(all(v["pass"] for v in verdicts.values()))}
    dump_json(out_dir / "verdicts.json", payload)
    return payload


def _write_persistence_csv(path, table):
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "captured_mass", "threshold"])
        for t, c in zip(table["t"], table["captured"]):
            w.writerow([repr(float(t)), repr(float(c)), repr(float(table["threshold"]))])


def exact_check(family: str) -> dict:
    """Residual-verify one exact family; returns a JSON-able report."""
    from .integrator import pde_residual

    if family == "gaussian":
        from .solutions import evolved_gaussian
        from .propagator import linear_flow

        g = Grid(1, 2048, 16.0)
        f = gaussian(1.0, 1.0, (0.0,), g)
        err = float(np.max(np.abs(
            linear_flow(f, 0.1).values - evolved_gaussian(1.0, 1.0, (0.0,), 0.1, g).values)))
        return {"family": family, "max_error": err, "pass": bool(err < 1e-8)}
    if family in ("soliton1d", "soliton2d"):
        d = 1 if family.endswith("1d") else 2
        gs = ground_state(d)
        g = Grid(d, 1024 if d == 1 else 512, 24.0)
        eq = EquationSpec.focusing(d)
        dt = 1e-4
        res = pde_residual(soliton(gs, 0.2, g), soliton(gs, 0.2 + dt, g), dt, eq)
        bound = 1e-5 * np.sqrt(gs.mass)
        return {"family": family, "residual": res, "bound": bound,
                "ground_state_residual": gs.residual, "mass": gs.mass,
                "pass": bool(res <= bound)}
    if family in ("pseudoconformal1d", "pseudoconformal2d"):
        d = 1 if family.endswith("1d") else 2
        fam = PseudoconformalFamily(d, 1.0, ground_state(d))
        g = Grid(d, 4096 if d == 1 else 1024, 12.0)
        eq = EquationSpec.focusing(d)
        dt = 1e-5
        t = 0.5
        res = pde_residual(pseudoconformal_blowup(fam, t, g),
                           pseudoconformal_blowup(fam, t + dt, g), dt, eq)
        scale = np.sqrt(fam.ground_state.mass) / (1.0 - t)
        return {"family": family, "residual": res, "bound": 1e-4 * scale,
                "pass": bool(res <= 1e-4 * scale)}
    raise ConfigError(f"unknown family {family!r}; see the CLI help for choices")
