"""Exception types shared across the package.

Every refusal carries a stable ``code`` string so that reports and the CLI
can name the failure mode without parsing prose.
"""

from __future__ import annotations


class BlowscopeError(Exception):
    """Base class; ``code`` identifies the failure mode."""

    code = "ERROR"


class NonFiniteInput(BlowscopeError):
    code = "NON_FINITE_INPUT"


class RefusedAliasing(BlowscopeError):
    code = "REFUSED_ALIASING"


class RefusedSubgrid(BlowscopeError):
    code = "REFUSED_SUBGRID"


class RefusedUnderresolved(BlowscopeError):
    code = "REFUSED_UNDERRESOLVED"


class TruncationSuspect(BlowscopeError):
    code = "TRUNCATION_SUSPECT"


class NumericalBlowup(BlowscopeError):
    """Raised when a step produces non-finite values; carries the last
    finite state so the caller can salvage the trajectory."""

    code = "NUMERICAL_BLOWUP"

    def __init__(self, message, last_state=None, t=None):
        super().__init__(message)
        self.last_state = last_state
        self.t = t


class NoBlowupTrend(BlowscopeError):
    code = "NO_BLOWUP_TREND"


class ConcentrationAbsent(BlowscopeError):
    code = "CONCENTRATION_ABSENT"


class InsufficientWindow(BlowscopeError):
    code = "INSUFFICIENT_WINDOW"


class InsufficientSampling(BlowscopeError):
    code = "INSUFFICIENT_SAMPLING"


class DegenerateCase(BlowscopeError):
    code = "DEGENERATE_CASE"


class SolverFailure(BlowscopeError):
    code = "SOLVER_FAILURE"


class ConfigError(BlowscopeError):
    """Scenario/config parse failure with a line-precise message."""

    code = "CONFIG_ERROR"

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
