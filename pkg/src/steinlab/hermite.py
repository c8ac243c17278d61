"""Hermite polynomials in the two normalizations in use.

``H_n`` ("paper" scaling) is ``(-1)^n / n! e^{x^2/2} d^n/dx^n e^{-x^2/2}``,
so ``H_n = He_n / n!`` where ``He_n`` is the monic probabilists' family.
Both are evaluated by their three-term recurrences; the explicit
coefficient form cancels catastrophically beyond degree ~15.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


class Normalization(str, enum.Enum):
    PAPER = "paper"
    PROBABILISTS = "probabilists"


def _check_degree(n: int, max_degree: int | None = None) -> int:
    if int(n) != n or n < 0:
        raise DomainError(f"degree must be a non-negative integer, got {n}")
    if max_degree is not None and n > max_degree:
        raise DomainError(f"degree {n} exceeds max_degree {max_degree}")
    return int(n)


def hermite_prob(n: int, x):
    """``He_n(x)`` via ``He_{k+1} = x He_k - k He_{k-1}``."""
    n = _check_degree(n)
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return prev
    cur = x.copy()
    for k in range(1, n):
        prev, cur = cur, x * cur - k * prev
    return cur


def hermite_paper(n: int, x):
    """``H_n(x)`` via ``(k+1) H_{k+1} = x H_k - H_{k-1}``."""
    n = _check_degree(n)
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return prev
    cur = x.copy()
    for k in range(1, n):
        prev, cur = cur, (x * cur - prev) / (k + 1)
    return cur


@dataclass(frozen=True)
class HermiteEvaluator:
    """Degree-capped evaluator for one normalization."""

    max_degree: int
    normalization: Normalization = Normalization.PAPER

    def __call__(self, n: int, x):
        _check_degree(n, self.max_degree)
        if self.normalization is Normalization.PAPER:
            return hermite_paper(n, x)
        return hermite_prob(n, x)

    def scale(self, n: int) -> float:
        """Factor taking this normalization to ``He_n``."""
        return 1.0 if self.normalization is Normalization.PROBABILISTS else float(math.factorial(n))
