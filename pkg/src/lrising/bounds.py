"""Gaussian envelopes of the amplitude factor and the minimal-size solver.

With x_e = 2 Nrm J_e t and S2 = sum_e m_e J_e^2:

* cos x <= exp(-x^2/2) for |x| <= pi/2 gives |F(t)| <= exp(-2 Nrm^2 S2 t^2);
* cos x >= exp(-x^2) for |x| <= 1 gives F(t) >= exp(-4 Nrm^2 S2 t^2).

Outside the respective argument windows only the trivial bounds remain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoSolutionError, RegimeError, ValidationError
from .evolution import cosine_product
from .model import (
    ENUMERATION_CAP,
    CouplingLaw,
    DisplacementMultiset,
    LatticeSpec,
    ModelParams,
    Regime,
    displacement_multiset,
    regime_classify,
)
from .zeta import power_sum

UPPER_X_MAX = math.pi / 2
LOWER_X_MAX = 1.0
UPPER_KAPPA = 2.0  # |F| <= exp(-UPPER_KAPPA * Nrm^2 S2 t^2)
LOWER_KAPPA = 4.0  # F >= exp(-LOWER_KAPPA * Nrm^2 S2 t^2)


@dataclass(frozen=True)
class BoundResult:
    value: float
    valid: bool
    validity_reason: str = ""


def second_moment(multiset: DisplacementMultiset) -> float:
    """S2 = sum of multiplicity * effective_strength**2."""
    return multiset.sum_strength_squared


def _max_argument(params: ModelParams, multiset: DisplacementMultiset, t: float) -> float:
    if not params.interacting or len(multiset) == 0:
        return 0.0
    return 2.0 * params.normalization * float(multiset.effective_strength.max()) * abs(t)


def _exponent(params: ModelParams, multiset: DisplacementMultiset, t: float) -> float:
    if not params.interacting:
        return 0.0
    return params.normalization**2 * second_moment(multiset) * t * t


def gaussian_upper_bound(params: ModelParams, multiset: DisplacementMultiset | None, t: float) -> BoundResult:
    multiset = multiset if multiset is not None else params.multiset()
    if t < 0:
        raise ValidationError("bounds are defined for t >= 0")
    x = _max_argument(params, multiset, t)
    if x > UPPER_X_MAX:
        return BoundResult(1.0, False, f"argument {x:.6g} exceeded pi/2 cutoff")
    return BoundResult(math.exp(-UPPER_KAPPA * _exponent(params, multiset, t)), True)


def gaussian_lower_bound(params: ModelParams, multiset: DisplacementMultiset | None, t: float) -> BoundResult:
    multiset = multiset if multiset is not None else params.multiset()
    if t < 0:
        raise ValidationError("bounds are defined for t >= 0")
    x = _max_argument(params, multiset, t)
    if x > LOWER_X_MAX:
        return BoundResult(0.0, False, f"argument {x:.6g} exceeded x_max={LOWER_X_MAX} cutoff")
    return BoundResult(math.exp(-LOWER_KAPPA * _exponent(params, multiset, t)), True)


# -- minimal system size -------------------------------------------------------


@dataclass(frozen=True)
class _Moments:
    normalization: float
    s2: float
    max_effective: float


def _chain_moments(n: int, law: CouplingLaw) -> _Moments:
    """Normalization, S2 and largest effective coupling of an even chain, no enumeration."""
    half = n // 2
    a, c = law.alpha, law.amplitude_C
    tail = c * half**-a
    total = 2.0 * c * power_sum(half, a)
    s2 = 2.0 * c * c * power_sum(half, 2.0 * a) + 2.0 * tail * tail
    return _Moments(1.0 / total, s2, max(c, 2.0 * tail))


def _lattice_moments(lattice: LatticeSpec, law: CouplingLaw) -> _Moments:
    ms = displacement_multiset(lattice, law)
    return _Moments(1.0 / ms.sum_strength, ms.sum_strength_squared, float(ms.effective_strength.max()))


def deviation_certificate(moments: _Moments, tau: float, a0: float) -> tuple[float, bool]:
    """(|A0| (1 - exp(-4 Nrm^2 S2 tau^2)), argument-window validity at tau)."""
    expo = LOWER_KAPPA * moments.normalization**2 * moments.s2 * tau * tau
    valid = 2.0 * moments.normalization * moments.max_effective * tau <= LOWER_X_MAX
    return abs(a0) * -math.expm1(-expo), valid


def _lattice_for(dimension: int, side: int, metric: str) -> LatticeSpec:
    return LatticeSpec(dimension, side, metric)


def minimal_system_size(
    tau: float,
    delta: float,
    law: CouplingLaw,
    dimension: int = 1,
    A0: float = 1.0,
    metric: str = "euclidean",
    cap: int = ENUMERATION_CAP,
) -> int:
    """Smallest even-sided lattice whose lower envelope certifies |<A>(t) - A0| < delta on [0, tau).

    Returns the number of sites N = L**dimension.
    """
    if not tau > 0 or not delta > 0:
        raise ValidationError("tau and delta must be positive")
    if regime_classify(law.alpha, dimension) is not Regime.STRONG_LONG_RANGE:
        raise RegimeError(f"no finite minimal size for alpha={law.alpha} >= d={dimension}")
    if not abs(A0) > delta:
        raise ValidationError("|A0| must exceed delta")

    def moments(side: int) -> _Moments:
        if dimension == 1:
            return _chain_moments(side, law)
        return _lattice_moments(_lattice_for(dimension, side, metric), law)

    def certified(side: int) -> bool:
        dev, valid = deviation_certificate(moments(side), tau, A0)
        return valid and dev < delta

    lo_side = 4 if dimension == 1 else 2
    max_side = int(round(cap ** (1.0 / dimension)))
    max_side -= max_side % 2
    while max_side**dimension > cap:
        max_side -= 2
    while (max_side + 2) ** dimension <= cap:
        max_side += 2

    if certified(lo_side):
        return lo_side**dimension
    hi = lo_side
    while True:
        lo, hi = hi, min(2 * hi, max_side)
        if certified(hi):
            break
        if hi == max_side:
            raise NoSolutionError(
                f"no lattice up to {max_side ** dimension} sites certifies tau={tau}, delta={delta}"
            )
    # invariant: lo fails, hi certified; both even
    while hi - lo > 2:
        mid = (lo + hi) // 2
        mid -= mid % 2
        if certified(mid):
            hi = mid
        else:
            lo = mid
    # the search used fast moment sums; confirm with enumerated couplings
    if dimension == 1:
        while True:
            dev, valid = deviation_certificate(_lattice_moments(LatticeSpec.chain(hi), law), tau, A0)
            if valid and dev < delta:
                break
            hi += 2
            if hi > max_side:
                raise NoSolutionError("certificate failed at the search cap")
    return hi**dimension


@dataclass(frozen=True)
class SizeVerification:
    n_sites: int
    max_deviation: float
    delta: float
    points: int
    passed: bool


def verify_minimal_size(
    n_sites: int,
    tau: float,
    delta: float,
    law: CouplingLaw,
    dimension: int = 1,
    A0: float = 1.0,
    metric: str = "euclidean",
    points: int = 1000,
) -> SizeVerification:
    """Evaluate |<A>(t) - A0| at h = 0 on ``points`` grid times in [0, tau)."""
    side = round(n_sites ** (1.0 / dimension))
    params = ModelParams(_lattice_for(dimension, side, metric), law, 0.0)
    times = np.arange(points) * (tau / points)
    F = cosine_product(params).values(times)
    dev = float(np.max(np.abs(A0 * F - A0)))
    return SizeVerification(params.n_sites, dev, delta, points, dev < delta)
