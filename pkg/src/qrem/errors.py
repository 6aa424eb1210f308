"""Exception types shared across the package."""


class QremError(Exception):
    """Base class for package-specific errors."""


class CapacityError(QremError, ValueError):
    """Requested system size exceeds an implementation cap."""


class DomainError(QremError, ValueError):
    """Argument outside the mathematical domain of a formula."""


class DimensionError(QremError, ValueError):
    """Vector length incompatible with the 2**n basis."""


class BracketError(QremError, RuntimeError):
    """Root or minimum not bracketed by the search interval."""


class ConvergenceError(QremError, RuntimeError):
    """An iterative solve failed to reach the requested tolerance."""


class NumericError(QremError, ArithmeticError):
    """Numerically inconsistent inputs (e.g. a radicand negative beyond round-off)."""


class StepSizeError(QremError, RuntimeError):
    """Unitarity drift exceeded the allowed bound; reduce the time step."""


class ConfigError(QremError, ValueError):
    """Invalid experiment configuration."""
