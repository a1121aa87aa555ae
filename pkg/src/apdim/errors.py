"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class ApdimError(Exception):
    exit_code = 1


class ValidationError(ApdimError, ValueError):
    exit_code = 2


class BudgetExceeded(ApdimError):
    exit_code = 3


class CertificationError(ApdimError, ArithmeticError):
    """A numeric result could not be certified at the available precision."""

    exit_code = 4


class PrecisionExhausted(CertificationError):
    pass


class RationalInput(CertificationError):
    """Gauss-map iteration terminated: the input is rational."""


class DepthExhausted(CertificationError):
    pass


class Undersampled(CertificationError):
    pass


class HolderViolation(ValidationError):
    pass


class MonotonicityViolation(ValidationError):
    pass


class NonConvergent(CertificationError):
    pass


class InsufficientLadder(ValidationError):
    pass
