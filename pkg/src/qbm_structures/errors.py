"""Exception types shared across the package."""


class DomainError(ValueError):
    """A parameter or input lies outside its physical/contractual domain."""


class ConditioningError(ArithmeticError):
    """A computation became numerically ill-conditioned (e.g. near-singular covariance)."""
