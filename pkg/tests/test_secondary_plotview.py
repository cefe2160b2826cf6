"""Secondary-component acceptance: the figure renderer consumes real run
outputs through the documented formats only.

Skipped when the frontend has not been built (`npm install && npm run
build` in frontend/); the primary suite stands alone without it.
"""

import json
import shutil
import subprocess
from pathlib import Path

import pytest

from blowscope.harness import builtin_lemma_suite, parse_scenario, rates, rescan, simulate

FRONTEND_CLI = Path(__file__).resolve().parent.parent / "frontend" / "dist" / "cli.js"

pytestmark = pytest.mark.skipif(
    shutil.which("node") is None or not FRONTEND_CLI.exists(),
    reason="frontend not built; run npm install && npm run build in frontend/",
)

SCENARIO = """
name = pc-accept
equation.d = 1
equation.sign = focusing
grid.n = 4096
grid.half_width = 12.0
init.kind = pseudoconformal
init.tstar = 1.0
step.dt_init = 1e-3
step.dt_min = 1e-10
step.c_dt = 5e-3
step.m_stop = 4.2
step.rho_tail = 0.05
step.t_max = 2.0
cadence.diag_stride = 5
cadence.snap_stride = 30
output.dir = pc-accept
"""


@pytest.fixture(scope="module")
def acceptance_outputs(tmp_path_factory):
    base = tmp_path_factory.mktemp("accept")
    run_dir = simulate(parse_scenario(SCENARIO), base_dir=base)
    rescan(run_dir)
    rates(run_dir)
    lemma_dir = base / "lemma"
    builtin_lemma_suite(lemma_dir)
    return run_dir, lemma_dir


def plotview(*args):
    return subprocess.run(
        ["node", str(FRONTEND_CLI), *[str(a) for a in args]],
        capture_output=True, text=True,
    )


def check_outputs(out_path: Path):
    assert out_path.exists() and out_path.stat().st_size > 0
    sidecar = json.loads((out_path.parent / (out_path.name + ".json")).read_text())
    assert isinstance(sidecar["fitted_slope"], (int, float))
    return sidecar


@pytest.mark.parametrize("kind", ["rate-loglog", "window-vs-time", "field-heatmap"])
def test_run_dir_figures(acceptance_outputs, tmp_path, kind):
    run_dir, _ = acceptance_outputs
    out = tmp_path / f"{kind}.svg"
    proc = plotview(kind, "--in", run_dir, "--out", out)
    assert proc.returncode == 0, proc.stderr
    sidecar = check_outputs(out)
    assert sidecar["kind"] == kind


def test_persistence_figure(acceptance_outputs, tmp_path):
    _, lemma_dir = acceptance_outputs
    case_csv = lemma_dir / "gaussian-1d.csv"
    out = tmp_path / "persistence.svg"
    proc = plotview("persistence-curve", "--in", case_csv, "--out", out)
    assert proc.returncode == 0, proc.stderr
    sidecar = check_outputs(out)
    assert sidecar["annotations"]["all_above"] == 1


def test_annotated_slopes_match_physics(acceptance_outputs, tmp_path):
    run_dir, _ = acceptance_outputs
    out = tmp_path / "rate.svg"
    assert plotview("rate-loglog", "--in", run_dir, "--out", out).returncode == 0
    sidecar = json.loads((tmp_path / "rate.svg.json").read_text())
    # density slope on the simulated family is -2 within the loose budget
    assert abs(sidecar["annotations"]["density_slope"] + 2.0) < 0.2

    out2 = tmp_path / "window.svg"
    assert plotview("window-vs-time", "--in", run_dir, "--out", out2).returncode == 0
    sidecar2 = json.loads((tmp_path / "window.svg.json").read_text())
    assert abs(sidecar2["fitted_slope"] - 1.0) < 0.2


def test_empty_diagnostics_is_an_error(acceptance_outputs, tmp_path):
    run_dir, _ = acceptance_outputs
    broken = tmp_path / "broken"
    shutil.copytree(run_dir, broken)
    (broken / "diagnostics.csv").write_text("")
    out = tmp_path / "x.svg"
    proc = plotview("rate-loglog", "--in", broken, "--out", out)
    assert proc.returncode == 1
    assert not out.exists()
    assert "empty" in proc.stderr
