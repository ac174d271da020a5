"""Exception types. The CLI maps these onto exit codes."""


class SimclustError(Exception):
    """Base class for package errors."""


class ValidationError(SimclustError, ValueError):
    """Bad input: wrong shapes, non-finite values, impossible settings."""


class NumericalError(SimclustError, ArithmeticError):
    """A numerical routine could not produce a usable result."""
