"""Acceptance suite: one test per shipping criterion, at pinned tolerances.

Each criterion prints ``ACCEPT <id> PASS|FAIL <details>`` (run with -s to
see the lines as they go).  Criterion B2-projected is implemented exactly
as specified and is a known analytic impossibility for this solution
family; it is marked strict-xfail so the defect stays loud without
drowning the rest of the suite (see the decisions ledger note next to the
repository for the measurement).
"""

import time
from itertools import product

import numpy as np
import pytest
from scipy.integrate import quad

from blowscope import (
    Cadence,
    EquationSpec,
    Grid,
    KappaParams,
    PseudoconformalFamily,
    RateFunction,
    StepControl,
    TimeSeries,
    accumulate_F,
    check_log_lower_bound,
    concentration_scan,
    estimate_alpha,
    eta_partition,
    fit_power_law,
    gaussian,
    ground_state,
    mass,
    pseudoconformal_blowup,
    rate_window,
    run,
    soliton,
    step,
    strichartz_density,
)
from blowscope.diagnostics import concentration_scale_table
from blowscope.errors import ConcentrationAbsent
from blowscope.solutions import ground_state_profile_1d, spectral_renormalization_mass

from conftest import brute_force_scan, random_field, rel_l2_error


def report(cid: str, ok: bool, detail: str):
    word = "PASS" if ok else "FAIL"
    print(f"ACCEPT {cid} {word} {detail}")


# --------------------------------------------------------------------------
# A. Conservation and correctness of the solver
# --------------------------------------------------------------------------


def test_a1_mass_drift_1e5_steps():
    # the time horizon is capped so the defocusing expansion front stays
    # clear of the boundary shell for the whole 1e5 steps
    g = Grid(1, 1024, 16.0)
    u0 = gaussian(1.0, 1.0, (0.0,), g)
    dt = 2.5e-6
    ctl = StepControl(dt_init=dt, dt_min=dt, c_dt=1e9, m_stop=1e9,
                      rho_tail=0.5, t_max=0.25)
    t0 = time.time()
    result = run(u0, EquationSpec.defocusing(1), ctl, Cadence(2000, 100000))
    wall = time.time() - t0
    m = result.series.mass
    drift = float(np.max(np.abs(m - m[0])) / m[0])
    ok = drift <= 1e-10 and wall <= 60.0 and result.reason == "time-limit"
    report("A1-mass-drift", ok, f"drift={drift:.2e} wall={wall:.1f}s reason={result.reason}")
    assert result.reason == "time-limit"
    assert drift <= 1e-10
    assert wall <= 60.0


@pytest.fixture(scope="module")
def soliton_errors(gs1):
    g = Grid(1, 1024, 24.0)
    eq = EquationSpec.focusing(1)
    errs = {}
    for dt in (1e-4, 5e-5):
        u = soliton(gs1, 0.0, g)
        for _ in range(int(round(1.0 / dt))):
            u = step(u, dt, eq)
        errs[dt] = rel_l2_error(u, soliton(gs1, 1.0, g))
    return errs


def test_a2_soliton_fidelity(soliton_errors):
    err = soliton_errors[1e-4]
    ok = err <= 1e-6
    report("A2-soliton-error", ok, f"rel_l2={err:.3e} (dt=1e-4, T=1, n=1024)")
    assert err <= 1e-6


def test_a2_soliton_convergence_ratio(soliton_errors):
    ratio = soliton_errors[1e-4] / soliton_errors[5e-5]
    ok = 3.5 <= ratio <= 4.5
    report("A2-convergence-ratio", ok, f"ratio={ratio:.3f}")
    assert 3.5 <= ratio <= 4.5


def test_a3_ground_states(gs1, gs2):
    ok1 = gs1.residual <= 1e-10
    ok2 = gs2.residual <= 1e-8 * np.sqrt(gs2.mass)
    cross = abs(spectral_renormalization_mass(2) - gs2.mass) / gs2.mass
    ok3 = cross <= 1e-4
    report("A3-ground-states", ok1 and ok2 and ok3,
           f"res1d={gs1.residual:.2e} res2d={gs2.residual:.2e} cross={cross:.2e}")
    assert ok1 and ok2 and ok3


# --------------------------------------------------------------------------
# B. Blow-up family relations (d=1 quintic focusing, seeded tstar = 1,
#    window t in [0.5, 0.95]; exact snapshots plus one simulated run)
# --------------------------------------------------------------------------

B_CLOCK = {"start": None}


@pytest.fixture(scope="module")
def exact_snapshots(gs1):
    B_CLOCK["start"] = time.time()
    fam = PseudoconformalFamily(1, 1.0, gs1)
    g = Grid(1, 8192, 12.0)
    times = 1.0 - np.geomspace(0.5, 0.05, 24)
    return [(t, pseudoconformal_blowup(fam, t, g)) for t in times]


@pytest.fixture(scope="module")
def simulated_run(gs1):
    if B_CLOCK["start"] is None:
        B_CLOCK["start"] = time.time()
    fam = PseudoconformalFamily(1, 1.0, gs1)
    g = Grid(1, 4096, 12.0)
    u0 = pseudoconformal_blowup(fam, 0.0, g)
    ctl = StepControl(dt_init=1e-3, dt_min=1e-10, c_dt=5e-3, m_stop=4.2,
                      rho_tail=0.05, t_max=2.0)
    return run(u0, EquationSpec.focusing(1), ctl, Cadence(5, 30))


def test_b1_density_exponent_exact(exact_snapshots):
    gaps = np.array([1.0 - t for t, _ in exact_snapshots])
    dens = np.array([strichartz_density(u) for _, u in exact_snapshots])
    fit = fit_power_law(gaps, dens)
    ok = abs(fit.exponent + 2.0) <= 0.05
    report("B1-density-exact", ok, f"slope={fit.exponent:.4f} (want -2 +/- 0.05)")
    assert ok


def test_b1_density_exponent_simulated(simulated_run):
    ser = simulated_run.series
    sel = (ser.t >= 0.5) & (ser.t <= 0.9)
    fit = fit_power_law(1.0 - ser.t[sel], ser.density[sel])
    ok = abs(fit.exponent + 2.0) <= 0.1
    report("B1-density-simulated", ok, f"slope={fit.exponent:.4f} (want -2 +/- 0.1)")
    assert simulated_run.reason == "blowup-detected"
    assert ok


def test_b2_alpha_unprojected(gs1, exact_snapshots):
    eps_level = 0.5 * gs1.mass
    fit = estimate_alpha(exact_snapshots, eps_level, tstar=1.0)
    # captured level reached at scale (tstar - t) itself at every snapshot
    at_scale = [concentration_scan(u, 1.0 - t).max_mass >= eps_level
                for t, u in exact_snapshots]
    ok = abs(fit.exponent - 1.0) <= 0.1 and all(at_scale)
    report("B2-alpha-unprojected", ok,
           f"alpha_hat={fit.exponent:.4f} captured_at_scale={sum(at_scale)}/{len(at_scale)}")
    assert ok


@pytest.mark.xfail(
    strict=True,
    reason="frequency ball radius kappa/(2(tstar-t)) from the printed constant "
    "keeps about 7 percent of the family's mass, so a 50 percent captured "
    "level is analytically impossible; see the decisions ledger",
)
def test_b2_alpha_projected_printed_constant(gs1, exact_snapshots):
    eps_level = 0.5 * gs1.mass
    kp = KappaParams(eps=eps_level, u0_mass=gs1.mass, d=1, alpha=1.0)
    try:
        fit = estimate_alpha(exact_snapshots, eps_level, kp, tstar=1.0)
    except ConcentrationAbsent as exc:
        report("B2-alpha-projected", False, f"{exc.code}: projection starves the level")
        raise AssertionError("projected level never captured") from exc
    ok = abs(fit.exponent - 1.0) <= 0.1
    report("B2-alpha-projected", ok, f"alpha_hat={fit.exponent:.4f}")
    assert ok


def test_b2_alpha_projected_scaled_radius(gs1, exact_snapshots):
    # sensitivity check, not the printed-constant criterion: with the ball
    # widened past the measured feasibility threshold (about 17x) the
    # projected estimate reproduces the window exponent
    eps_level = 0.5 * gs1.mass
    kp = KappaParams(eps=eps_level, u0_mass=gs1.mass, d=1, alpha=1.0,
                     radius_scale=32.0)
    fit = estimate_alpha(exact_snapshots, eps_level, kp, tstar=1.0)
    ok = abs(fit.exponent - 1.0) <= 0.1
    report("B2-alpha-projected-scaled", ok,
           f"alpha_hat={fit.exponent:.4f} (radius_scale=32)")
    assert ok


def test_b3_direction_one_window_prediction(gs1, exact_snapshots):
    sers = accumulate_F(_series_from_snapshots(exact_snapshots))
    sel = sers.F > 0
    gaps = 1.0 - sers.t[sel]
    diag_norm = sers.F[sel] ** (1.0 / 6.0)
    beta_hat = -fit_power_law(gaps, diag_norm).exponent
    predicted = (1.0 + beta_hat) / 2.0
    eps_level = 0.25 * gs1.mass
    holds = [concentration_scan(u, max((1.0 - t) ** predicted, u.grid.h)).max_mass
             >= eps_level for t, u in exact_snapshots]
    ok = all(holds) and 0.1 <= beta_hat <= 0.3
    report("B3-direction-one", ok,
           f"beta_hat={beta_hat:.4f} predicted_window_exp={predicted:.3f} "
           f"holds={sum(holds)}/{len(holds)}")
    assert ok


def _series_from_snapshots(snapshots):
    t = np.array([t for t, _ in snapshots])
    dens = np.array([strichartz_density(u) for _, u in snapshots])
    z = np.zeros_like(t)
    return TimeSeries(1, t, np.ones_like(t), dens, np.ones_like(t), z)


def test_b4_interval_gap_exponent(gs1):
    c_q = quad(lambda x: ground_state_profile_1d(x) ** 6, -30, 30, limit=400)[0]
    s = np.geomspace(1.0, 0.03, 6000)
    t = 1.0 - s
    F = c_q * (1.0 / s - 1.0)
    ts = TimeSeries(1, t, np.ones_like(t), np.gradient(F, t),
                    np.ones_like(t), np.zeros_like(t), F=F)
    part = eta_partition(ts, 0.5)
    bp = part.breakpoints[:-1]
    sel = (bp >= 0.5) & (bp <= 0.95)
    fit = fit_power_law(1.0 - bp[sel], part.gaps[sel])
    ok = abs(fit.exponent - 2.0) <= 0.1
    report("B4-interval-gaps", ok, f"gap_exponent={fit.exponent:.4f} (eta=0.5)")
    assert ok


def test_b5_log_lower_bound(simulated_run):
    rep = check_log_lower_bound(simulated_run, tstar=1.0, window=(0.5, 0.9))
    ok = bool(rep["pass"]) and rep["domination_constant"] > 0
    report("B5-log-lower-bound", ok,
           f"c_dominating={rep['domination_constant']:.3f} c_fitted={rep['fitted_constant']:.3f}")
    assert ok


def test_b_runtime_budget(exact_snapshots, simulated_run):
    elapsed = time.time() - B_CLOCK["start"]
    ok = elapsed <= 300.0
    report("B-runtime", ok, f"elapsed={elapsed:.1f}s (budget 300s)")
    assert ok


# --------------------------------------------------------------------------
# C. Band-limited persistence
# --------------------------------------------------------------------------


def test_c_persistence_cases_and_dilation():
    from blowscope.lemma_lab import make_case, rescaled_persistence, run_persistence

    t0 = time.time()
    g1 = Grid(1, 4096, 16.0)
    g2 = Grid(2, 512, 8.0)
    cases = {
        "indicator-1d": make_case(g1, "indicator"),
        "gaussian-1d": make_case(g1, "gaussian"),
        "gaussian-2d": make_case(g2, "gaussian"),
        "boosted-1d": make_case(g1, "gaussian", boost_xi0=(2.0,)),
        "boosted-2d": make_case(g2, "gaussian", boost_xi0=(1.0, 1.0)),
    }
    all_ok = True
    details = []
    for name, case in cases.items():
        table = run_persistence(case, samples=21, t_fail_search=False)
        good = bool(table["pass"]) and table["t"].size >= 20
        all_ok &= good
        details.append(f"{name}:{'ok' if good else 'FAIL'}")
    sweep = rescaled_persistence(g1, "gaussian", A_values=(1, 2, 4, 8))
    exp_ok = sweep["pass"] and abs(sweep["exponent"] + 2.0) <= 0.1
    wall = time.time() - t0
    ok = all_ok and exp_ok and wall <= 60.0
    report("C-persistence", ok,
           f"{' '.join(details)} sweep_exp={sweep['exponent']:.3f} wall={wall:.1f}s")
    assert all_ok
    assert exp_ok
    assert wall <= 60.0


# --------------------------------------------------------------------------
# D. Scan equals exhaustive search, including ties
# --------------------------------------------------------------------------


def test_d_oracle_equivalence():
    rng = np.random.default_rng(2024)
    checked = 0
    for d, n_choices, trials in ((1, (8, 16, 32, 64), 200), (2, (8, 16, 32), 200)):
        for _ in range(trials):
            n = int(rng.choice(n_choices))
            g = Grid(d, n, float(rng.uniform(1.0, 8.0)))
            u = random_field(g, rng)
            m_cells = int(rng.integers(1, n + 1))
            res = concentration_scan(u, m_cells * g.h)
            w = np.abs(u.values) ** 2 * g.cell_volume
            bval, bcorner = brute_force_scan(w, m_cells)
            assert res.max_mass == bval, (d, n, m_cells)
            assert res.corner == bcorner, (d, n, m_cells)
            checked += 1
    report("D-oracle-equivalence", True, f"{checked} random fields matched exactly")


# --------------------------------------------------------------------------
# E. Window algebra of the divergence profiles
# --------------------------------------------------------------------------


def test_e_rate_window_algebra():
    worst = 0.0
    beta = 2.2
    G = RateFunction("power", beta=beta)
    for s in np.linspace(0.04, 0.96, 20):
        expected = beta ** -0.5 * s ** ((beta + 1.0) / 2.0)
        worst = max(worst, abs(rate_window(G, s) - expected) / expected)
    eps = 0.6
    G = RateFunction("logpower", gamma=1.0 + eps)
    for s in np.linspace(0.04, 0.9, 20):
        expected = (1.0 + eps) ** -0.5 * s ** 0.5 * abs(np.log(s)) ** (-eps / 2.0)
        worst = max(worst, abs(rate_window(G, s) - expected) / expected)
    G = RateFunction("loglog")
    wider = True
    for s in np.linspace(0.01, 0.3, 20):
        expected = (s * abs(np.log(s))) ** 0.5
        worst = max(worst, abs(rate_window(G, s) - expected) / expected)
        wider &= rate_window(G, s) > s ** 0.5
    ok = worst <= 1e-10 and wider
    report("E-rate-window", ok, f"worst_rel={worst:.2e} loglog_wider={wider}")
    assert ok
