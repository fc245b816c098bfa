"""Rounding helpers that are robust to binary floating point."""

import math


def ceil_div(c: float, eps: float) -> int:
    """``ceil(c / eps)``, treating quotients within 1e-9 of an integer as that integer."""
    q = c / eps
    r = round(q)
    if abs(q - r) <= 1e-9 * max(1.0, abs(q)):
        return int(r)
    return math.ceil(q)


def ceil_log2_inv(eps: float) -> int:
    """``ceil(log2(1 / eps))``, snapped the same way."""
    q = math.log2(1.0 / eps)
    r = round(q)
    if abs(q - r) <= 1e-9:
        return int(r)
    return math.ceil(q)


def check_eps(eps: float) -> float:
    eps = float(eps)
    if not 0.0 < eps <= 1.0:
        raise ValueError(f"epsilon must lie in (0, 1], got {eps}")
    return eps
