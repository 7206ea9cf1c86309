"""Equilibration times, scaling exponents, curve collapse and recurrences."""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, stats

from .errors import NotFoundError, ValidationError
from .evolution import CosineProduct, cosine_product, resolve_workers
from .model import CouplingLaw, DisplacementMultiset, LatticeSpec, ModelParams

SCAN_FACTOR = 1.05
BISECT_RTOL = 1e-6
T_CAP = 1e12
DEFAULT_THETA = 0.5


@dataclass
class EquilibrationReport:
    theta: float
    alpha: float
    dimension: int
    n_values: list[int]
    tau_values: list[float]
    gamma: float
    gamma_stderr: float
    intercept: float
    residuals: list[float] = field(default_factory=list)

    @property
    def entries(self) -> list[tuple[int, float]]:
        return list(zip(self.n_values, self.tau_values))

    def to_dict(self) -> dict:
        return {
            "theta": self.theta,
            "alpha": self.alpha,
            "dimension": self.dimension,
            "entries": [{"N": n, "tau0": t} for n, t in self.entries],
            "gamma": self.gamma,
            "gamma_stderr": self.gamma_stderr,
            "intercept": self.intercept,
            "residuals": self.residuals,
        }


def _product(params: ModelParams, multiset: DisplacementMultiset | None) -> CosineProduct:
    return cosine_product(params, multiset)


def first_zero(product: CosineProduct) -> float:
    """Earliest time at which one cosine factor vanishes (inf if none)."""
    if product.max_rate == 0.0:
        return math.inf
    return math.pi / (2.0 * product.max_rate)


def equilibration_time(
    params: ModelParams, multiset: DisplacementMultiset | None = None, theta: float = DEFAULT_THETA
) -> float:
    """First t > 0 with |F(t)| <= theta.

    The Larmor factor is not part of F, so the field h plays no role here.
    """
    if not 0.0 < theta <= 1.0:
        raise ValidationError(f"theta must lie in (0, 1], got {theta}")
    if theta == 1.0:
        return 0.0
    ms = multiset if multiset is not None else params.multiset()
    product = _product(params, multiset)
    t_zero = first_zero(product)
    if math.isinf(t_zero):
        raise NotFoundError("amplitude factor is constant; no crossing exists")

    def excess(t):
        return product.value(t) - theta

    # geometric scan from the Gaussian decay scale; F decreases monotonically up to t_zero
    t_hi = min(0.1 / (params.normalization * math.sqrt(ms.sum_strength_squared)), t_zero)
    t_lo = 0.0
    while excess(t_hi) > 0:
        if t_hi >= t_zero or t_hi > T_CAP:
            raise NotFoundError(f"no crossing of theta={theta} below t={t_hi:.6g}")
        t_lo, t_hi = t_hi, min(t_hi * SCAN_FACTOR, t_zero)
    if t_lo == 0.0 and excess(t_hi) <= 0 and t_hi > 0:
        t_lo = 0.0
    return optimize.brentq(excess, t_lo, t_hi, xtol=1e-300, rtol=BISECT_RTOL * 1e-3)


def fit_power_law(n_values, tau_values):
    """Unweighted least squares of ln tau against ln N: (slope, stderr, intercept, residuals)."""
    x = np.log(np.asarray(n_values, dtype=np.float64))
    y = np.log(np.asarray(tau_values, dtype=np.float64))
    res = stats.linregress(x, y)
    residuals = y - (res.intercept + res.slope * x)
    return float(res.slope), float(res.stderr), float(res.intercept), residuals.tolist()


def _chain_or_lattice(n: int, dimension: int, metric: str) -> LatticeSpec:
    side = round(n ** (1.0 / dimension))
    if side**dimension != n:
        raise ValidationError(f"{n} is not a perfect {dimension}-th power")
    return LatticeSpec(dimension, side, metric)


def scaling_exponent(
    law: CouplingLaw,
    dimension: int,
    n_values,
    theta: float = DEFAULT_THETA,
    metric: str = "euclidean",
    workers: int | None = None,
) -> EquilibrationReport:
    n_values = sorted({int(n) for n in n_values})
    if len(n_values) < 4:
        raise ValidationError("a scaling fit needs at least 4 distinct system sizes")

    def tau_for(n):
        params = ModelParams(_chain_or_lattice(n, dimension, metric), law)
        return equilibration_time(params, None, theta)

    workers = resolve_workers(workers)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            taus = list(pool.map(tau_for, n_values))
    else:
        taus = [tau_for(n) for n in n_values]
    gamma, stderr, intercept, residuals = fit_power_law(n_values, taus)
    return EquilibrationReport(theta, law.alpha, dimension, n_values, taus, gamma, stderr, intercept, residuals)


def curve_collapse_metric(law: CouplingLaw, dimension: int, n_values, times, metric: str = "euclidean") -> float:
    """max over time grid and N pairs of |F_N(t) - F_N'(t)|."""
    n_values = list(n_values)
    if len(n_values) < 2:
        raise ValidationError("curve collapse needs at least two system sizes")
    times = np.asarray(times, dtype=np.float64)
    curves = {}
    for n in n_values:
        if n not in curves:
            params = ModelParams(_chain_or_lattice(n, dimension, metric), law)
            curves[n] = cosine_product(params).values(times)
    worst = 0.0
    for a, b in itertools.combinations(n_values, 2):
        worst = max(worst, float(np.max(np.abs(curves[a] - curves[b]))))
    return worst


def recurrence_scan(
    params: ModelParams,
    multiset: DisplacementMultiset | None = None,
    eta: float = 1e-3,
    t_max: float = 1e3,
    dt: float = 0.05,
) -> list[float]:
    """Local maxima of F above 1 - eta in (first zero, t_max], refined by golden section.

    F is a trigonometric polynomial whose largest angular frequency is
    sum_e m_e w_e = 2 (a consequence of the normalization), so |F''| <= 4 and a
    grid spacing ``dt`` misses a peak height by at most dt^2 / 2.
    """
    if not 0.0 < eta < 1.0:
        raise ValidationError(f"eta must lie in (0, 1), got {eta}")
    product = _product(params, multiset)
    t_start = first_zero(product)
    if math.isinf(t_start) or t_start >= t_max:
        return []
    grid = np.arange(t_start, t_max + dt, dt)
    grid = grid[grid <= t_max]
    F = product.values(grid)
    slack = 0.5 * dt * dt
    interior = (F[1:-1] >= F[:-2]) & (F[1:-1] >= F[2:]) & (F[1:-1] > 1.0 - eta - slack)
    found: list[float] = []
    for i in np.nonzero(interior)[0] + 1:
        a, c = grid[i - 1], grid[i + 1]
        t_star = optimize.golden(lambda t: -product.value(t), brack=(a, grid[i], c), tol=1e-12)
        t_star = float(min(max(t_star, a), c))
        if product.value(t_star) > 1.0 - eta and (not found or t_star - found[-1] > dt):
            found.append(t_star)
    return found
