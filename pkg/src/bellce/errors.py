"""Exception types shared across the package."""


class ContractViolation(ValueError):
    """Raised when an argument breaks an operation's precondition."""


class ResourceError(RuntimeError):
    """Raised when a requested statevector or table exceeds the memory cap."""


class NumericalError(ArithmeticError):
    """Raised when an iterative numerical routine fails to converge."""


class NumericalDegeneracyError(NumericalError):
    """Raised when a norm or probability mass underflows to zero."""
