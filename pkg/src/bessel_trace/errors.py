"""Exception types shared across the library.

The CLI maps DomainError (and config validation failures) to exit code 1
and NumericError to exit code 2.
"""


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class UnsupportedOrderError(DomainError):
    """Bessel order without a closed-form path (only 1/2 and 3/2 have one)."""


class NumericError(ArithmeticError):
    """A numerical procedure failed to converge or lost too much precision."""
