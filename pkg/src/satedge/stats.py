"""Paired sign tests used to check monotone trends across a swept parameter."""
from __future__ import annotations

from math import comb
from typing import Sequence


def binom_tail(k: int, n: int) -> float:
    """P(X >= k) for X ~ Binomial(n, 1/2)."""
    return sum(comb(n, i) for i in range(k, n + 1)) / 2 ** n if n else 1.0


def sign_counts(before: Sequence[float], after: Sequence[float]) -> tuple[int, int, int]:
    """(increases, decreases, ties) of ``after`` relative to ``before``, paired."""
    if len(before) != len(after):
        raise ValueError("paired samples must have equal length")
    inc = sum(b > a for a, b in zip(before, after))
    dec = sum(b < a for a, b in zip(before, after))
    return inc, dec, len(before) - inc - dec


def significantly_decreasing(before, after, alpha: float = 0.05) -> bool:
    """Decreases dominate at level ``alpha``; ties count against the claim."""
    _, dec, _ = sign_counts(before, after)
    return binom_tail(dec, len(before)) < alpha


def not_significantly_decreasing(before, after, alpha: float = 0.05) -> bool:
    """No evidence, at level ``alpha``, that ``after`` tends to fall below ``before``."""
    inc, dec, _ = sign_counts(before, after)
    return binom_tail(dec, inc + dec) >= alpha
