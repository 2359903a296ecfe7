"""Exception hierarchy shared by the numerical modules."""


class BlowfliesError(Exception):
    """Base class for every error raised by this package."""


class InfeasibleParametersError(BlowfliesError, ValueError):
    """Raised when ``p > gamma`` and ``tau < ln(p/gamma)/mu`` do not both hold."""


class NoEquilibriumError(BlowfliesError, ValueError):
    """Raised when an operation needs a positive equilibrium that does not exist."""


class NoWindowError(BlowfliesError, ValueError):
    """Raised when the harvest is too large for any delay to admit equilibria."""


class FoldSingularityError(BlowfliesError, ArithmeticError):
    """Raised when the two equilibria (numerically) coincide."""


class DomainError(BlowfliesError, ValueError):
    """Raised when a function is evaluated outside its domain."""


class ConvergenceError(BlowfliesError, ArithmeticError):
    """Raised when an iterative solver fails to converge."""


class InconclusiveProbeError(BlowfliesError, RuntimeError):
    """Raised when a simulation probe cannot tell the two sides of a Hopf point apart."""
