"""Closed-form dynamics of the x-magnetization.

For an initial state diagonal in the sigma^x product basis and h the z-field,

    <A>(t) = <A>(0) * cos(2 h t) * F(t),   F(t) = prod_e cos(2 Nrm J_e t)^{mult_e},

with J_e the per-site effective couplings of the displacement multiset. Large
products are accumulated as ``sum mult * ln|cos|``: factors with argument
above 1 are summed directly and the remaining tail through the convergent
series ``ln cos x = -sum_n c_n x^(2n)`` against precomputed power sums of the
couplings, which makes every time point O(block size) regardless of N.
"""

from __future__ import annotations

import enum
import functools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ValidationError
from .model import DisplacementMultiset, ModelParams

DIRECT_MAX_FACTORS = 2048  # classes up to which the plain product is used
ZERO_TOL = 1e-15
LOG_FLOOR = math.log(1e-300)
SERIES_X_MAX = 1.0
SERIES_TERMS = 48
BLOCK = 256
TIME_BLOCK = 64  # time points evaluated together; chunking is aligned to it

WORKERS_ENV = "LRISING_WORKERS"


class Mode(str, enum.Enum):
    HAMILTONIAN_EXACT = "hamiltonian_exact"
    AS_PUBLISHED = "as_published"


def _tangent_numbers(n: int) -> list[int]:
    """T_1, T_3, ..., T_{2n-1}: tan x = sum T_{2k-1} x^(2k-1) / (2k-1)!."""
    t = [0] * (n + 1)
    t[1] = 1
    for k in range(2, n + 1):
        t[k] = (k - 1) * t[k - 1]
    for k in range(2, n + 1):
        for j in range(k, n + 1):
            t[j] = (j - k) * t[j - 1] + (j - k + 2) * t[j]
    return t[1:]


def log_cos_coefficients(n_terms: int = SERIES_TERMS) -> np.ndarray:
    """c_1..c_n with ln cos x = -sum_k c_k x^(2k) for |x| < pi/2."""
    tan = _tangent_numbers(n_terms)
    return np.array([float(Fraction(tk, math.factorial(2 * k))) for k, tk in enumerate(tan, start=1)])


_LOG_COS_C = log_cos_coefficients()


@dataclass(frozen=True)
class ObservableSpec:
    """A = sum_i a_i sigma_i^x."""

    coefficients: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.coefficients, dtype=np.float64)
        if a.ndim != 1 or not np.all(np.isfinite(a)):
            raise ValidationError("observable coefficients must be a finite 1-d vector")
        object.__setattr__(self, "coefficients", a)

    @classmethod
    def uniform(cls, n_sites: int, a: float = 1.0) -> "ObservableSpec":
        return cls(np.full(n_sites, float(a)))

    def check_size(self, n_sites: int) -> None:
        if len(self.coefficients) != n_sites:
            raise ValidationError(f"observable has {len(self.coefficients)} coefficients, lattice has {n_sites} sites")


@dataclass(frozen=True)
class InitialStateSpec:
    """Per-site <sigma_i^x>(0) of a state diagonal in the sigma^x product basis."""

    site_x_expectations: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.site_x_expectations, dtype=np.float64)
        if m.ndim != 1 or not np.all(np.abs(m) <= 1.0):
            raise ValidationError("initial x-expectations must be a 1-d vector with entries in [-1, 1]")
        object.__setattr__(self, "site_x_expectations", m)

    @classmethod
    def uniform(cls, n_sites: int, m: float = 1.0) -> "InitialStateSpec":
        return cls(np.full(n_sites, float(m)))

    def check_size(self, n_sites: int) -> None:
        if len(self.site_x_expectations) != n_sites:
            raise ValidationError(
                f"initial state has {len(self.site_x_expectations)} entries, lattice has {n_sites} sites"
            )


def initial_expectation(observable: ObservableSpec, initial: InitialStateSpec) -> float:
    return math.fsum(observable.coefficients * initial.site_x_expectations)


@dataclass
class TimeSeries:
    times: np.ndarray
    values: np.ndarray
    mode: str
    digest: str
    params: dict = field(default_factory=dict)
    initial_value: float = 1.0

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.times.shape != self.values.shape:
            raise ValidationError("times and values must have equal length")

    def __len__(self) -> int:
        return len(self.times)


class CosineProduct:
    """Evaluator of F(t) = prod_e cos(w_e t)^{m_e} for fixed rates w_e."""

    def __init__(self, rates, multiplicity):
        rates = np.abs(np.asarray(rates, dtype=np.float64))
        mult = np.asarray(multiplicity, dtype=np.float64)
        order = np.argsort(-rates, kind="stable")
        self.rates = rates[order]
        self.mult = mult[order]
        self.odd = (np.asarray(multiplicity)[order] % 2).astype(bool)
        self._tables = None

    def __len__(self) -> int:
        return len(self.rates)

    @property
    def max_rate(self) -> float:
        return float(self.rates[0]) if len(self.rates) else 0.0

    @property
    def uses_series(self) -> bool:
        return len(self.rates) > DIRECT_MAX_FACTORS

    # -- series tables -------------------------------------------------
    def _series_tables(self):
        if self._tables is None:
            self._tables = self._build_tables()
        return self._tables

    def _build_tables(self):
        n = len(self.rates)
        nb = -(-n // BLOCK)
        pad = nb * BLOCK - n
        rates = np.concatenate([self.rates, np.zeros(pad)])
        mult = np.concatenate([self.mult, np.zeros(pad)])
        lead = rates[::BLOCK].copy()
        q = (rates.reshape(nb, BLOCK) / lead[:, None]) ** 2
        q = q.ravel()
        p = np.ones_like(q)
        sums = np.empty((nb, SERIES_TERMS))
        for k in range(SERIES_TERMS):
            p *= q
            sums[:, k] = (mult * p).reshape(nb, BLOCK).sum(axis=1)
        del p, q
        # R[b, k] = sum_{e >= b*BLOCK} m_e (w_e / lead_b)^(2k)
        ratio2 = np.ones(nb)
        ratio2[:-1] = (lead[1:] / lead[:-1]) ** 2
        powers = np.arange(1, SERIES_TERMS + 1)
        tables = np.empty_like(sums)
        tables[-1] = sums[-1]
        for b in range(nb - 2, -1, -1):
            tables[b] = sums[b] + ratio2[b] ** powers * tables[b + 1]
        # Horner-ready coefficients c_k * R_k
        return lead, tables * _LOG_COS_C

    # -- point evaluation ----------------------------------------------
    def _direct_log(self, s: float, stop: int | None = None):
        x = self.rates[:stop] * s
        c = np.cos(x)
        if np.any(np.abs(c) < ZERO_TOL):
            return -math.inf, 0
        neg = (c < 0) & self.odd[:stop]
        sign = -1 if np.count_nonzero(neg) % 2 else 1
        # ln|cos x| = log1p(-2 min(sin^2, cos^2)(x/2)); plain log(cos x) loses digits for small x
        half = 0.5 * x
        gap = np.minimum(np.sin(half) ** 2, np.cos(half) ** 2)
        return float(np.dot(self.mult[:stop], np.log1p(-2.0 * gap))), sign

    def log_amplitude(self, t: float, method: str = "auto") -> tuple[float, int]:
        s = abs(float(t))
        if not math.isfinite(s):
            raise ValidationError(f"time must be finite, got {t}")
        if s == 0.0 or len(self.rates) == 0:
            return 0.0, 1
        if method == "direct" or not self.uses_series:
            log_mag, sign = self._direct_log(s)
        else:
            lead, coef = self._series_tables()
            b = int(np.searchsorted(-lead, -SERIES_X_MAX / s, side="left"))
            log_mag, sign = self._direct_log(s, b * BLOCK) if b else (0.0, 1)
            if sign and b < len(lead):
                x2 = (lead[b] * s) ** 2
                acc = 0.0
                for ck in coef[b, ::-1]:
                    acc = acc * x2 + ck
                log_mag -= acc * x2
        if sign == 0 or log_mag < LOG_FLOOR:
            return -math.inf, 0
        return log_mag, sign

    def value(self, t: float, method: str = "auto") -> float:
        if method == "auto" and not self.uses_series:
            return float(np.prod(np.cos(self.rates * abs(float(t))) ** self.mult))
        log_mag, sign = self.log_amplitude(t, method)
        return sign * math.exp(log_mag) if sign else 0.0

    def _block_values(self, times: np.ndarray, method: str) -> np.ndarray:
        if method == "auto" and not self.uses_series:
            c = np.cos(np.outer(np.abs(times), self.rates))
            return np.prod(c**self.mult, axis=1)
        return np.array([self.value(t, method) for t in times])

    def values(self, times, workers: int | None = None, method: str = "auto") -> np.ndarray:
        times = np.asarray(times, dtype=np.float64)
        if len(self.rates) == 0:
            return np.ones_like(times)
        if self.uses_series and method == "auto":
            self._series_tables()
        blocks = [times[i : i + TIME_BLOCK] for i in range(0, len(times), TIME_BLOCK)]
        workers = resolve_workers(workers)
        if workers <= 1 or len(blocks) <= 1:
            parts = [self._block_values(b, method) for b in blocks]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(lambda b: self._block_values(b, method), blocks))
        return np.concatenate(parts) if parts else np.empty(0)


def resolve_workers(workers: int | None) -> int:
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1"))
    if workers < 1:
        raise ValidationError(f"worker count must be >= 1, got {workers}")
    return workers


def factor_rates(params: ModelParams, multiset: DisplacementMultiset | None = None, mode=Mode.HAMILTONIAN_EXACT):
    """Angular rates and multiplicities of the cosine factors of F."""
    mode = Mode(mode)
    if not params.interacting:
        return np.empty(0), np.empty(0, dtype=np.int64)
    nrm = params.normalization
    if mode is Mode.AS_PUBLISHED:
        if params.lattice.dimension != 1:
            raise ValidationError("as_published mode is defined for chains only")
        j = np.arange(1, params.n_sites + 1, dtype=np.float64)
        strength = params.law.amplitude_C * np.power(j, -params.law.alpha)
        return 2.0 * nrm * strength, np.full(len(j), 2, dtype=np.int64)
    ms = multiset if multiset is not None else params.multiset()
    return 2.0 * nrm * ms.effective_strength, np.asarray(ms.multiplicity)


@functools.lru_cache(maxsize=2)
def _cached_product(params: ModelParams, mode: Mode) -> CosineProduct:
    return CosineProduct(*factor_rates(params, None, mode))


def cosine_product(params: ModelParams, multiset: DisplacementMultiset | None = None, mode=Mode.HAMILTONIAN_EXACT):
    mode = Mode(mode)
    if multiset is None or multiset is params.multiset():
        return _cached_product(params, mode)
    return CosineProduct(*factor_rates(params, multiset, mode))


def amplitude_factor(params: ModelParams, multiset=None, t: float = 0.0, mode=Mode.HAMILTONIAN_EXACT) -> float:
    """F(t), the Larmor-free amplitude factor."""
    return cosine_product(params, multiset, mode).value(t)


def log_amplitude(params: ModelParams, multiset=None, t: float = 0.0, mode=Mode.HAMILTONIAN_EXACT):
    """(ln|F(t)|, sign F(t)); sign 0 with -inf magnitude at a vanishing factor."""
    return cosine_product(params, multiset, mode).log_amplitude(t)


def time_grid(t_min: float, t_max: float, points: int, spacing: str = "linear") -> np.ndarray:
    if points < 1:
        raise ValidationError("a time grid needs at least one point")
    if spacing == "linear":
        if points > 1 and not t_max > t_min:
            raise ValidationError("t_max must exceed t_min")
        return np.linspace(t_min, t_max, points)
    if spacing == "log":
        if not (0 < t_min < t_max):
            raise ValidationError("log spacing needs 0 < t_min < t_max")
        return np.geomspace(t_min, t_max, points)
    raise ValidationError(f"unknown grid spacing {spacing!r}")


def _check_grid(times: np.ndarray) -> None:
    if times.ndim != 1 or len(times) == 0:
        raise ValidationError("time grid must be a nonempty 1-d sequence")
    if not np.all(np.isfinite(times)):
        raise ValidationError("time grid must be finite")
    if np.any(np.diff(times) <= 0):
        raise ValidationError("time grid must be strictly increasing")


def expectation_series(
    params: ModelParams,
    observable: ObservableSpec | None = None,
    initial: InitialStateSpec | None = None,
    times=(0.0,),
    mode=Mode.HAMILTONIAN_EXACT,
    workers: int | None = None,
    multiset: DisplacementMultiset | None = None,
) -> TimeSeries:
    n = params.n_sites
    observable = observable if observable is not None else ObservableSpec.uniform(n)
    initial = initial if initial is not None else InitialStateSpec.uniform(n)
    observable.check_size(n)
    initial.check_size(n)
    times = np.asarray(times, dtype=np.float64)
    _check_grid(times)
    mode = Mode(mode)

    a0 = initial_expectation(observable, initial)
    amp = cosine_product(params, multiset, mode).values(times, workers)
    values = a0 * np.cos(2.0 * params.field_h * times) * amp
    return TimeSeries(times, values, mode.value, params.digest(), params.to_dict(), a0)
