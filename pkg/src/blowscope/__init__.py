"""Pseudo-spectral simulator and blow-up diagnostics for the mass-critical
nonlinear Schrodinger equation on a periodic box."""

__version__ = "0.1.0"

from .spectral import (  # noqa: F401
    Field,
    FreqRegion,
    Grid,
    Spectrum,
    boundary_shell_mass_fraction,
    dealias,
    forward_transform,
    inverse_transform,
    project,
    project_field,
)
from .propagator import SymmetryParams, apply_symmetry, linear_flow  # noqa: F401
from .integrator import (  # noqa: F401
    Cadence,
    EquationSpec,
    RunResult,
    StepControl,
    estimate_tstar,
    pde_residual,
    run,
    step,
)
from .solutions import (  # noqa: F401
    GroundState,
    PseudoconformalFamily,
    gaussian,
    ground_state,
    pseudoconformal_blowup,
    soliton,
)
from .diagnostics import (  # noqa: F401
    EtaPartition,
    KappaParams,
    RateFit,
    RateFunction,
    ScanResult,
    TimeSeries,
    accumulate_F,
    check_local_estimate,
    check_log_lower_bound,
    concentration_scan,
    estimate_alpha,
    eta_partition,
    fit_power_law,
    mass,
    rate_neg_derivative,
    rate_value,
    rate_window,
    strichartz_density,
    thickened_concentration_fraction,
)
from .lemma_lab import (  # noqa: F401
    PersistenceCase,
    make_case,
    rescaled_persistence,
    run_persistence,
)
