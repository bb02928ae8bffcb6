"""Exception hierarchy shared by every module."""


class MovingTargetsError(Exception):
    """Base class for all package errors."""


class InvalidChain(MovingTargetsError, ValueError):
    """Transition matrix is not stochastic, not square or not irreducible."""


class SingularSystem(MovingTargetsError, ArithmeticError):
    pass


class LengthMismatch(MovingTargetsError, ValueError):
    pass


class CapExceeded(MovingTargetsError):
    """d(t) stayed above the threshold up to the scan cap."""


class MonotonicityViolation(MovingTargetsError):
    pass


class StateLimitExceeded(MovingTargetsError):
    pass


class SearchSpaceExceeded(MovingTargetsError):
    pass


class BudgetExceeded(MovingTargetsError):
    pass


class GadgetFalsified(MovingTargetsError):
    """A certificate inequality failed; it signals an implementation bug."""


class InvalidCase(MovingTargetsError, ValueError):
    pass


class InvalidReflection(MovingTargetsError, ValueError):
    pass


class SymmetryViolation(MovingTargetsError, ValueError):
    pass


class InvalidParams(MovingTargetsError, ValueError):
    pass


class NotLumpable(MovingTargetsError):
    pass


class ConfigError(MovingTargetsError, ValueError):
    pass
