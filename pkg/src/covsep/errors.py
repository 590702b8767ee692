"""Exception types shared across the package."""


class ValidationError(ValueError):
    """An input violates a documented invariant (shape, symmetry, range...)."""


class SingularReducedStateError(ValidationError):
    """A state (or one of its reductions) has an eigenvalue below the rank
    cutoff, so an operation requiring full rank cannot proceed."""

    def __init__(self, message, min_eigenvalue=None, cutoff=None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue
        self.cutoff = cutoff


class NoConvergenceError(RuntimeError):
    """An iterative procedure exhausted its budget.  Carries the best
    bounds/residual reached so callers can report partial results."""

    def __init__(self, message, residual=None, lower_bound=None, upper_bound=None):
        super().__init__(message)
        self.residual = residual
        self.lower_bound = lower_bound
        self.upper_bound = upper_bound


class NoThresholdError(RuntimeError):
    """A parameter scan found no verdict flip on the requested range."""


class AmbiguousThresholdError(RuntimeError):
    """A parameter scan found more than one verdict flip, so a single
    threshold is not well defined."""
