"""Exception types shared across the package."""


class InvalidParameter(ValueError):
    """A scalar parameter is out of its admissible range."""


class InvalidInput(ValueError):
    """An input collection is malformed (duplicates, non-convex, wrong shape)."""


class DomainError(ValueError):
    """Inputs are well formed but fall outside the region where the operation is defined."""


class BudgetError(RuntimeError):
    """A retry loop exceeded its configured number of attempts."""
