"""Exception hierarchy shared by all modules."""


class NonlocError(Exception):
    """Base class for errors raised by nonloc_mt."""


class OutsideDomain(NonlocError, ValueError):
    pass


class SingularPoint(NonlocError, ValueError):
    pass


class NoConvergence(NonlocError, RuntimeError):
    pass


class LevelSetResolutionFailure(NonlocError, RuntimeError):
    pass


class HighVariance(NonlocError, RuntimeError):
    """Monte Carlo relative standard error stayed above the accepted ratio."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class QuadratureMismatch(NonlocError, RuntimeError):
    pass


class DiagonalSingularity(NonlocError, ValueError):
    pass


class BudgetViolated(NonlocError, ValueError):
    pass
