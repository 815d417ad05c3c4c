"""Exception types shared across the package.

The CLI maps these onto its exit codes, so library code should raise the
most specific one that applies.
"""


class CrsarError(Exception):
    """Base class for all package errors."""


class DomainError(CrsarError, ValueError):
    """An argument lies outside the domain of a function or model."""


class ConvergenceError(CrsarError, RuntimeError):
    """An iterative or adaptive numerical routine missed its tolerance."""


class DataError(CrsarError, ValueError):
    """Input data could not be parsed or violates the data contract."""
