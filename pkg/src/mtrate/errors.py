"""Exception types shared across the package.

The CLI maps these onto exit codes: invalid input -> 2, numerical
failure -> 3. Everything else is an ordinary bug.
"""


class MtrateError(Exception):
    """Base class for all package errors."""


class InvalidProblemError(MtrateError):
    """Input data violates a precondition (dimensions, PD-ness, feasibility)."""


class NumericalError(MtrateError):
    """A solver or factorization failed to converge or produced garbage."""
