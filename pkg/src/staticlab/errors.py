"""Exception types raised across staticlab."""


class StaticLabError(ValueError):
    """Base class for all staticlab errors."""


class OutOfDomain(StaticLabError):
    pass


class NonFinite(StaticLabError):
    pass


class DomainTooSmall(StaticLabError):
    pass


class InvalidTolerance(StaticLabError):
    pass


class StepFailure(StaticLabError):
    pass


class DegenerateInitialization(StaticLabError):
    """h''(s0) vanishes, so f(s0) cannot be solved from the first-order constraint."""


class EmptyDomainIntersection(StaticLabError):
    pass


class NonPositiveWarp(StaticLabError):
    pass


class StencilOutOfDomain(StaticLabError):
    pass


class SingularMetric(StaticLabError):
    pass


class MissingScalar(StaticLabError):
    pass


class WrongModelClass(StaticLabError):
    pass


class TooFewSamples(StaticLabError):
    pass


class InvalidR(StaticLabError):
    pass


class HorizonViolation(StaticLabError):
    pass


class IntegrabilityMismatch(StaticLabError):
    pass


class UnknownEntry(StaticLabError):
    pass
