import numpy as np
import pytest

from blowscope import Field, Grid, gaussian, linear_flow, make_case, run_persistence
from blowscope.errors import DegenerateCase
from blowscope.lemma_lab import captured_at, rescaled_persistence, window_mass


@pytest.fixture(scope="module")
def grid1():
    return Grid(1, 4096, 16.0)


@pytest.fixture(scope="module")
def grid2():
    return Grid(2, 512, 8.0)


class TestMakeCase:
    def test_formula_arithmetic_on_synthetic_inputs(self):
        # the bound formula itself, on round inputs: c1=0.5, norm=1
        t_bound = (1.0 / (4 * np.pi ** 2 * 1.0)) * np.sqrt(0.5 / 8.0)
        assert t_bound == pytest.approx(6.33e-3, abs=5e-5)

    def test_indicator_case_measures_inputs(self, grid1):
        case = make_case(grid1, "indicator")
        # c1 and the norm are measured, then the formula is arithmetic
        assert 0.0 < case.c1 <= case.l2 ** 2
        expected = (1.0 / (4 * np.pi ** 2 * case.l2)) * np.sqrt(case.c1 / 8.0)
        assert case.t_bound == pytest.approx(expected, rel=1e-14)

    def test_gaussian_case_support_verified(self, grid1):
        case = make_case(grid1, "gaussian")
        # projection onto the declared cube left f unchanged (checked in
        # the constructor); re-check here end to end
        from blowscope import forward_transform, project

        s = forward_transform(case.f)
        back = project(s, case.freq_cube)
        drift = np.sqrt(np.sum(np.abs(back.coeffs - s.coeffs) ** 2)
                        / np.sum(np.abs(s.coeffs) ** 2))
        assert drift < 1e-12

    def test_zero_field_rejected(self, grid1):
        # an off-grid needle underflows to the zero field everywhere
        with pytest.raises(DegenerateCase):
            make_case(grid1, "gaussian", bump_width=1e-9,
                      bump_center=0.5 + grid1.h / 3)

    def test_coarse_grid_rejected(self):
        with pytest.raises(ValueError):
            make_case(Grid(1, 128, 16.0), "indicator")


class TestRunPersistence:
    def test_t0_sample_equals_c1(self, grid1):
        case = make_case(grid1, "indicator")
        assert captured_at(case, 0.0) == pytest.approx(case.c1, rel=1e-12)

    def test_indicator_case_passes(self, grid1):
        case = make_case(grid1, "indicator")
        table = run_persistence(case, samples=41)
        assert table["pass"]
        assert np.all(table["captured"] >= case.c1 / 2)
        assert table["t_fail"] > table["t_bound"]

    def test_gaussian_2d_case_passes(self, grid2):
        case = make_case(grid2, "gaussian")
        table = run_persistence(case, samples=21, t_fail_search=False)
        assert table["pass"]

    def test_minimum_sample_count_enforced(self, grid1):
        case = make_case(grid1, "indicator")
        with pytest.raises(ValueError):
            run_persistence(case, samples=10)

    def test_conjugation_symmetry_of_free_flow(self, grid1):
        # real data: the flow at -t is the conjugate of the flow at t, so
        # any captured-mass table is even in t
        f = gaussian(1.0, 0.5, (0.5,), grid1)
        assert np.max(np.abs(f.values.imag)) == 0
        for t in (1e-3, 7e-3, 0.05):
            fwd = window_mass(linear_flow(f, t), (0.0,), 1.0)
            bwd = window_mass(linear_flow(f, -t), (0.0,), 1.0)
            assert abs(fwd - bwd) < 1e-12 * max(fwd, 1.0)

    def test_captured_mass_continuous_in_t(self, grid1):
        case = make_case(grid1, "gaussian")
        table = run_persistence(case, samples=41, t_fail_search=False)
        diffs = np.abs(np.diff(table["captured"]))
        dt = table["t"][1] - table["t"][0]
        # Lipschitz-type bound with a measured constant
        c_meas = diffs.max() / (dt * case.l2 ** 2)
        assert np.all(diffs <= (c_meas + 1e-9) * dt * case.l2 ** 2)
        assert diffs.max() < 0.05 * case.c1


class TestBoostCovariance:
    def test_moving_window_table_matches_unboosted(self, grid1):
        # sample at times where the drift 4 pi t xi0 is a whole number of
        # cells; the moving-window capture then equals the rest-frame one
        xi0 = 2.0
        base = make_case(grid1, "gaussian")
        boosted = make_case(grid1, "gaussian", boost_xi0=(xi0,))
        h = grid1.h
        t_unit = h / (4 * np.pi * xi0)
        ks = np.arange(-12, 13)
        for k in ks:
            t = k * t_unit
            a = captured_at(base, t)
            b = captured_at(boosted, t)
            assert abs(a - b) < 1e-10 * max(a, 1e-6)

    def test_boosted_case_passes_bound(self, grid1):
        case = make_case(grid1, "gaussian", boost_xi0=(2.0,))
        table = run_persistence(case, samples=41, t_fail_search=False)
        assert table["pass"]


class TestDilationSweep:
    def test_a1_reduces_to_plain_case(self, grid1):
        plain = run_persistence(make_case(grid1, "gaussian"), samples=21,
                                t_fail_search=False)
        via_sweep = run_persistence(make_case(grid1, "gaussian", A=1), samples=21,
                                    t_fail_search=False)
        assert np.array_equal(plain["captured"], via_sweep["captured"])

    def test_sweep_exponent_near_minus_two(self, grid1):
        sweep = rescaled_persistence(grid1, "gaussian", A_values=(1, 2, 4, 8))
        assert sweep["pass"]
        assert abs(sweep["exponent"] + 2.0) <= 0.1

    def test_rescaled_window_shrinks(self, grid1):
        case = make_case(grid1, "gaussian", A=4)
        assert case.window_side == pytest.approx(0.25)
        assert case.effective_bound == pytest.approx(case.t_bound / 16.0)
