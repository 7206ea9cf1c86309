"""Lattice, coupling law, Kac normalization and the displacement multiset.

The Hamiltonian is the long-range Ising model on a periodic lattice,

    H = Nrm * sum_i sum_{v in V+} eps(|v|) s_i s_{i+v} - h sum_i s_i,

where ``V+`` holds one representative of every pair {v, -v} of torus
displacements. Antipodal (self-paired) displacements with v == -v appear for
both endpoints of the bond, exactly as the chain sum over ``j <= N/2`` does, so
the per-site effective coupling of such a displacement is ``2 eps``.
Everything downstream only needs the multiset of per-site effective couplings.
"""

from __future__ import annotations

import enum
import functools
import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import DomainError, SizeLimitError, UnsupportedDimensionError, ValidationError
from .zeta import zeta

ENUMERATION_CAP = 2**26
METRICS = ("euclidean", "chebyshev")


class Regime(str, enum.Enum):
    STRONG_LONG_RANGE = "strong_long_range"
    MARGINAL = "marginal"
    SUMMABLE = "summable"


@dataclass(frozen=True)
class CouplingLaw:
    """Power-law pair coupling eps(r) = C * r**(-alpha)."""

    alpha: float
    amplitude_C: float = 1.0

    def __post_init__(self):
        alpha, amp = float(self.alpha), float(self.amplitude_C)
        if not (math.isfinite(alpha) and alpha >= 0.0):
            raise ValidationError(f"alpha must be finite and >= 0, got {self.alpha}")
        if not (math.isfinite(amp) and amp > 0.0):
            raise ValidationError(f"amplitude_C must be finite and > 0, got {self.amplitude_C}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "amplitude_C", amp)


@dataclass(frozen=True)
class LatticeSpec:
    """Periodic hypercubic lattice with ``side_length ** dimension`` sites."""

    dimension: int
    side_length: int
    metric: str = "euclidean"

    def __post_init__(self):
        if int(self.dimension) != self.dimension or self.dimension < 1:
            raise ValidationError(f"dimension must be a positive integer, got {self.dimension}")
        if int(self.side_length) != self.side_length or self.side_length < 2:
            raise ValidationError(f"side_length must be an integer >= 2, got {self.side_length}")
        if self.side_length % 2:
            raise ValidationError(
                f"side_length must be even so the antipodal displacement exists, got {self.side_length}"
            )
        if self.metric not in METRICS:
            raise ValidationError(f"metric must be one of {METRICS}, got {self.metric!r}")
        object.__setattr__(self, "dimension", int(self.dimension))
        object.__setattr__(self, "side_length", int(self.side_length))

    @classmethod
    def chain(cls, n_sites: int) -> "LatticeSpec":
        return cls(1, n_sites)

    @property
    def n_sites(self) -> int:
        return self.side_length**self.dimension


def coupling_strength(law: CouplingLaw, j: float) -> float:
    """eps(j) = C * j**(-alpha) for a lattice distance j >= 1."""
    if not j >= 1.0:
        raise DomainError(f"coupling distance must be >= 1, got {j}")
    return law.amplitude_C * float(j) ** -law.alpha


def regime_classify(alpha: float, dimension: int) -> Regime:
    if alpha < dimension:
        return Regime.STRONG_LONG_RANGE
    if alpha == dimension:
        return Regime.MARGINAL
    return Regime.SUMMABLE


@dataclass(frozen=True, eq=False)
class DisplacementMultiset:
    """Per-site coupling classes of the torus, sorted by increasing distance.

    ``strength`` holds eps(distance); a self-paired class contributes the
    effective coupling ``2 * strength`` per site. ``sum_strength`` and
    ``sum_strength_squared`` are multiplicity-weighted sums of the effective
    couplings and their squares.
    """

    strength: np.ndarray
    multiplicity: np.ndarray
    self_paired: np.ndarray
    sum_strength: float = field(init=False)
    sum_strength_squared: float = field(init=False)

    def __post_init__(self):
        for name in ("strength", "multiplicity", "self_paired"):
            arr = np.asarray(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        eff = self.effective_strength
        mult = self.multiplicity.astype(np.float64)
        object.__setattr__(self, "sum_strength", math.fsum(mult * eff))
        object.__setattr__(self, "sum_strength_squared", math.fsum(mult * eff * eff))

    @property
    def effective_strength(self) -> np.ndarray:
        return np.where(self.self_paired, 2.0 * self.strength, self.strength)

    @property
    def n_neighbors(self) -> int:
        return int(self.multiplicity.sum())

    def __len__(self) -> int:
        return len(self.strength)

    def __iter__(self) -> Iterator[tuple[float, int, bool]]:
        for s, m, p in zip(self.strength, self.multiplicity, self.self_paired):
            yield float(s), int(m), bool(p)

    @property
    def entries(self) -> list[tuple[float, int, bool]]:
        return list(self)


def _distance_classes(lattice: LatticeSpec):
    """Group the non-zero torus displacements by distance key.

    Works on per-axis minimum images m in [0, L/2]; an axis value occurs twice
    on the ring unless m is 0 or L/2. Returns (key, weight, self_paired) arrays
    where key is the squared Euclidean or the Chebyshev distance.
    """
    L, d = lattice.side_length, lattice.dimension
    half = L // 2
    m = np.arange(half + 1, dtype=np.int64)
    axis_weight = np.full(half + 1, 2, dtype=np.int64)
    axis_weight[0] = 1
    axis_weight[half] = 1
    axis_fixed = (m == 0) | (m == half)

    if d == 1:
        return m[1:] ** 2 if lattice.metric == "euclidean" else m[1:], axis_weight[1:], axis_fixed[1:]

    grids = np.meshgrid(*([m] * d), indexing="ij", sparse=True)
    if lattice.metric == "euclidean":
        key = sum(g**2 for g in grids)
    else:
        key = functools.reduce(np.maximum, grids)
    weight = functools.reduce(np.multiply, np.meshgrid(*([axis_weight] * d), indexing="ij", sparse=True))
    fixed = functools.reduce(np.logical_and, np.meshgrid(*([axis_fixed] * d), indexing="ij", sparse=True))
    shape = (half + 1,) * d
    key = np.broadcast_to(key, shape).ravel()[1:]
    weight = np.broadcast_to(weight, shape).ravel()[1:]
    fixed = np.broadcast_to(fixed, shape).ravel()[1:]

    # group by (key, self_paired)
    combined = key * 2 + fixed.astype(np.int64)
    uniq, inverse = np.unique(combined, return_inverse=True)
    weights = np.bincount(inverse, weights=weight).astype(np.int64)
    return uniq // 2, weights, (uniq % 2).astype(bool)


def displacement_multiset(lattice: LatticeSpec, law: CouplingLaw) -> DisplacementMultiset:
    if lattice.n_sites > ENUMERATION_CAP:
        raise SizeLimitError(
            f"lattice with {lattice.n_sites} sites exceeds the enumeration cap {ENUMERATION_CAP}"
        )
    return _cached_multiset(lattice, law)


@functools.lru_cache(maxsize=2)
def _cached_multiset(lattice: LatticeSpec, law: CouplingLaw) -> DisplacementMultiset:
    key, weight, fixed = _distance_classes(lattice)
    dist = np.sqrt(key.astype(np.float64)) if lattice.metric == "euclidean" else key.astype(np.float64)
    strength = law.amplitude_C * np.power(dist, -law.alpha)
    return DisplacementMultiset(strength, weight, fixed)


def normalization(lattice: LatticeSpec, law: CouplingLaw) -> float:
    """Kac normalization: inverse of the per-site effective coupling sum."""
    return 1.0 / displacement_multiset(lattice, law).sum_strength


def normalization_asymptotic(alpha: float, N: float, dimension: int = 1) -> float:
    """Large-N form of 2 * Nrm for a chain with C = 1.

    ``N = math.inf`` returns the thermodynamic-limit value.
    """
    if dimension != 1:
        raise UnsupportedDimensionError("asymptotic normalization is only known for d = 1")
    if alpha < 0:
        raise ValidationError(f"alpha must be >= 0, got {alpha}")
    if math.isinf(N):
        return 1.0 / zeta(alpha) if alpha > 1 else 0.0
    if N < 4:
        raise ValidationError(f"N must be >= 4, got {N}")
    if alpha < 1:
        return (1.0 - alpha) * 2.0 ** (1.0 - alpha) * N ** (alpha - 1.0)
    if alpha == 1:
        return 1.0 / math.log(N)
    return 1.0 / zeta(alpha)


@dataclass(frozen=True)
class ModelParams:
    """Complete model definition for one run.

    ``interacting=False`` switches all pair couplings off (the field-only
    model); the normalization is still that of the coupling law.
    """

    lattice: LatticeSpec
    law: CouplingLaw
    field_h: float = 0.0
    interacting: bool = True
    normalization: float = field(init=False, compare=False)

    def __post_init__(self):
        if not math.isfinite(self.field_h):
            raise ValidationError(f"field_h must be finite, got {self.field_h}")
        object.__setattr__(self, "field_h", float(self.field_h))
        object.__setattr__(self, "normalization", normalization(self.lattice, self.law))

    @classmethod
    def chain(cls, n_sites: int, alpha: float, *, C: float = 1.0, h: float = 0.0, interacting: bool = True):
        return cls(LatticeSpec.chain(n_sites), CouplingLaw(alpha, C), h, interacting)

    @property
    def n_sites(self) -> int:
        return self.lattice.n_sites

    def multiset(self) -> DisplacementMultiset:
        return displacement_multiset(self.lattice, self.law)

    def to_dict(self) -> dict:
        return {
            "dimension": self.lattice.dimension,
            "side_length": self.lattice.side_length,
            "metric": self.lattice.metric,
            "alpha": self.law.alpha,
            "amplitude_C": self.law.amplitude_C,
            "field_h": self.field_h,
            "interacting": self.interacting,
            "normalization": self.normalization,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelParams":
        params = cls(
            LatticeSpec(d["dimension"], d["side_length"], d.get("metric", "euclidean")),
            CouplingLaw(d["alpha"], d.get("amplitude_C", 1.0)),
            d.get("field_h", 0.0),
            d.get("interacting", True),
        )
        if "normalization" in d and d["normalization"] != params.normalization:
            raise ValidationError("stored normalization does not match recomputation")
        return params

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]
