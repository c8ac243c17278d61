"""Numerical laboratory for long-memory moving averages and Hermite functionals."""

__version__ = "0.1.0"

from .constants import ModelParams, Regime  # noqa: E402
from .errors import (BoundaryError, DomainError, NumericError,  # noqa: E402
                     RegimeError, SteinLabError)

__all__ = ["ModelParams", "Regime", "SteinLabError", "DomainError",
           "RegimeError", "BoundaryError", "NumericError", "__version__"]
