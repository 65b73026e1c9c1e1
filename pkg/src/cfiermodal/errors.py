"""Exception types shared across the package."""


class CfierError(Exception):
    """Base class for package errors."""


class DomainError(CfierError, ValueError):
    """Argument outside the supported domain."""


class ConvergenceError(CfierError, RuntimeError):
    """An iterative evaluation did not converge."""


class BranchPointError(CfierError, ValueError):
    """A square root was requested exactly at its branch point."""


class DegenerateError(CfierError, ArithmeticError):
    """A denominator vanished where it should not."""


class SingularModeError(CfierError, ArithmeticError):
    """Modal eigenvalues too small to invert."""

    def __init__(self, message, modes=()):
        super().__init__(message)
        self.modes = list(modes)


class TailConvergenceError(CfierError, RuntimeError):
    """Truncated spectrum did not settle when the mode range was extended."""


class TruncationError(CfierError, ValueError):
    """Modal expansion is not negligible at the truncation order."""


class OracleFailure(CfierError, AssertionError):
    """A numerical self-check disagreed with its independent reference."""


class CheckViolation(CfierError, AssertionError):
    """A sampled inequality was violated; carries offending (k, n) tuples."""

    def __init__(self, message, offenders=()):
        super().__init__(message)
        self.offenders = list(offenders)
