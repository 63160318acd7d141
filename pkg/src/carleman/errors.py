"""Exception types shared across the package."""


class CarlemanError(Exception):
    """Base class for all package-specific errors."""


class SequenceMismatchError(CarlemanError):
    """Two operands are certified against different weight sequences."""


class SectorMismatchError(CarlemanError):
    """Two operands live on different sectors."""


class NonzeroConstantTermError(CarlemanError):
    """An operation requiring a vanishing constant term received c0 != 0."""


class NotLogConvexError(CarlemanError):
    """The operation needs a log-convex sequence and the check failed."""


class PartitionBudgetError(CarlemanError):
    """Partition enumeration would exceed the configured budget."""


class DomainError(CarlemanError):
    """Evaluation requested outside a function's domain, or the domain
    does not meet a structural requirement (e.g. unboundedness)."""


class RayAngleError(DomainError):
    """No admissible integration-ray angle exists for the given argument."""


class PrecisionBudgetError(CarlemanError):
    """Adaptive precision escalation hit the hard cap before converging."""


class WitnessError(CarlemanError):
    """A required witness (log-convex equivalent, second opening index)
    is missing or fails its admissibility check."""


class ZeroCoefficientError(CarlemanError):
    """A coefficient-ratio computation hit a zero coefficient."""


class NonRealCoefficientError(CarlemanError):
    """Coefficients were expected to be real within tolerance."""
