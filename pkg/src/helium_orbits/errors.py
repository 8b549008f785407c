"""Exception types shared across the package."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class AccuracyError(ArithmeticError):
    """Requested tolerance could not be reached within the work budget."""


class RegularityError(ArithmeticError):
    """A singular integral (e.g. of 1/q near a collision) looks divergent."""


class DegenerateError(ValueError):
    """Signal is identically zero or has non-isolated zeros."""
