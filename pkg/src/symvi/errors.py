"""Exception types shared across the library."""


class InvalidInputError(ValueError):
    """Inputs violate an operation's preconditions (shape, domain, or support)."""


class DegenerateStatisticError(ValueError):
    """A statistic is requested outside its domain (e.g. near-zero marginal variance)."""


class OptimizationFailedError(RuntimeError):
    """No optimizer start produced a finite objective value."""


class ProjectionUndefinedError(ValueError):
    """The map projection is undefined at the requested point (antipode of the center)."""
