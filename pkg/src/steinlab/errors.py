"""Exception hierarchy.

Each class maps onto one CLI exit code (see :mod:`steinlab.cli`).
"""


class SteinLabError(Exception):
    """Base class for every error raised by this package."""


class DomainError(SteinLabError, ValueError):
    """An argument lies outside the domain of the operation."""


class LagRangeError(DomainError, IndexError):
    """A covariance lag beyond the stored table."""


class RegimeError(SteinLabError):
    """The operation belongs to the other limit-theorem regime."""


class BoundaryError(RegimeError):
    """q(2 beta - 1) == 1: neither regime applies."""


class NumericError(SteinLabError, ArithmeticError):
    """A numerical tolerance or resource cap could not be met."""


class TruncationOverflowError(NumericError):
    """The requested weight truncation exceeds the memory cap."""


class StreamExhaustedError(NumericError):
    """A replicate asked for more variates than its substream holds."""
