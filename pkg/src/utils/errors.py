"""
Exception hierarchy for fraclap.

Evaluators report non-convergence as data on their EvalReport; the exceptions
here are for inputs outside a contract and for hard numerical failures.
"""


class FraclapError(Exception):
    """Base class for all library errors."""
    pass


class DomainError(FraclapError, ValueError):
    """Argument outside the domain of an operation."""
    pass


class PoleError(FraclapError, ValueError):
    """Function evaluated at a pole (e.g. gamma at a non-positive integer)."""
    pass


class QuadratureError(FraclapError):
    """Adaptive quadrature failed to meet its error budget."""
    pass


class NonConvergenceError(FraclapError):
    """A scale limit did not stabilize."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class AdmissibilityError(FraclapError):
    """Test function lies outside an evaluator's decay contract."""

    def __init__(self, message: str, method: str = "", function: str = ""):
        super().__init__(message)
        self.method = method
        self.function = function


class UnsupportedError(FraclapError):
    """Structurally excluded request (e.g. Riesz potential with alpha >= d)."""
    pass


class BudgetError(FraclapError):
    """Monte Carlo path exceeded its step budget."""
    pass


class AliasingError(FraclapError):
    """FFT grid fails the Nyquist mass check."""
    pass
