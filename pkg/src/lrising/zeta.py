"""Riemann zeta and generalized harmonic numbers via Euler-Maclaurin summation.

Only real arguments are supported. ``power_sum(n, s)`` is accurate to a few
ulps for every real ``s`` (including ``s <= 1``), which lets callers obtain
lattice normalizations for chains far larger than can be enumerated.
"""

from __future__ import annotations

import math
from fractions import Fraction

# B_2, B_4, ..., B_20
_BERNOULLI = (
    Fraction(1, 6),
    Fraction(-1, 30),
    Fraction(1, 42),
    Fraction(-1, 30),
    Fraction(5, 66),
    Fraction(-691, 2730),
    Fraction(7, 6),
    Fraction(-3617, 510),
    Fraction(43867, 798),
    Fraction(-174611, 330),
)
# B_{2k} / (2k)!
_EM_COEFFS = tuple(
    float(b / math.factorial(2 * (k + 1))) for k, b in enumerate(_BERNOULLI)
)

_HEAD = 32  # terms summed directly before the Euler-Maclaurin tail


def _rising(s: float, m: int) -> float:
    """s (s+1) ... (s+m-1)."""
    out = 1.0
    for i in range(m):
        out *= s + i
    return out


def _em_corrections(s: float, x: float) -> float:
    """Sum_k B_2k/(2k)! * (-1)^(2k-1) d^(2k-1)/dx^(2k-1) x^-s, without sign flip.

    Returns sum_k B_2k/(2k)! * s(s+1)...(s+2k-2) * x^(-s-2k+1), i.e. minus the
    odd-derivative sum evaluated at x.
    """
    total = 0.0
    for k, c in enumerate(_EM_COEFFS, start=1):
        total += c * _rising(s, 2 * k - 1) * x ** (-s - 2 * k + 1)
    return total


def zeta(s: float) -> float:
    """Riemann zeta function for real s > 1."""
    if not s > 1.0:
        raise ValueError(f"zeta(s) requires s > 1, got {s}")
    if math.isinf(s):
        return 1.0
    m = float(_HEAD)
    head = math.fsum(j ** -s for j in range(1, _HEAD))
    tail = m ** (1.0 - s) / (s - 1.0) + 0.5 * m**-s + _em_corrections(s, m)
    return head + tail


def power_sum(n: int, s: float) -> float:
    """Generalized harmonic number H(n, s) = sum_{j=1}^{n} j^-s."""
    n = int(n)
    if n < 1:
        return 0.0
    if n <= 4 * _HEAD:
        return math.fsum(j ** -s for j in range(1, n + 1))
    a, b = float(_HEAD), float(n)
    head = math.fsum(j ** -s for j in range(1, _HEAD))
    log_ratio = math.log(b / a)
    if s == 1.0:
        integral = log_ratio
    else:
        # a^(1-s) * (exp((1-s) ln(b/a)) - 1) / (1-s), stable as s -> 1
        integral = a ** (1.0 - s) * math.expm1((1.0 - s) * log_ratio) / (1.0 - s)
    ends = 0.5 * (a**-s + b**-s)
    corr = _em_corrections(s, a) - _em_corrections(s, b)
    return head + integral + ends + corr
