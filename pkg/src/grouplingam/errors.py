"""Exception types shared across the package."""


class GroupLingamError(ValueError):
    """Base class for all errors raised by this package."""


class InvalidInputError(GroupLingamError):
    """Input violates a documented precondition (shape, range, emptiness)."""


class AcyclicityError(GroupLingamError):
    """A connection matrix admits no causal ordering (contains a cycle)."""


class DegenerateRegressorError(GroupLingamError):
    """A regressor has (numerically) zero variance."""


class DegenerateInputError(GroupLingamError):
    """A data row is (numerically) constant and cannot be standardized."""


class CollinearityError(GroupLingamError):
    """Predecessor Gram matrix is singular during connection-strength fitting."""
