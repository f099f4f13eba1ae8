"""Exception and warning types raised across the package."""


class WitnessError(Exception):
    """Base class for all package errors."""


class DimensionError(WitnessError, ValueError):
    """Index or matrix size incompatible with the truncation dimension."""


class DomainError(WitnessError, ValueError):
    """A physical parameter lies outside its allowed range."""


class ContractError(WitnessError, ValueError):
    """An operator was required to be a density operator but is not."""


class TruncationError(WitnessError):
    """Probability mass leaked past the truncation dimension."""


class TruncationWarning(UserWarning):
    """Trace deficit exceeded the truncation tolerance (non-fatal path)."""


class QuadratureError(WitnessError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message, *, estimates=None, nodes=None):
        super().__init__(message)
        self.estimates = list(estimates or [])
        self.nodes = list(nodes or [])


class OptimizationError(WitnessError):
    """A minimizer failed to converge; carries the best point found."""

    def __init__(self, message, *, best=None):
        super().__init__(message)
        self.best = best


class SpecError(WitnessError, ValueError):
    """Malformed state or map specification string."""
