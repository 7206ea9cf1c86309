"""Brute-force expectation values from the Hamiltonian on small lattices.

H is diagonal in the sigma^z basis, so for a product state in the x basis

    <sigma_k^x>(t) = m_k 2^-N sum_s exp(i Delta_k(s) t),

where Delta_k(s) = E(s with spin k flipped) - E(s). The configuration space is
enumerated as bitmasks in contiguous blocks (bit value 0 -> s = +1). Couplings
are rebuilt here from the lattice geometry, independently of the
displacement multiset used by the closed form.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .errors import NumericalCheckError, SizeLimitError, ValidationError
from .evolution import InitialStateSpec, ObservableSpec, TimeSeries, initial_expectation
from .model import ModelParams, coupling_strength

ORACLE_CAP = 24
CONFIG_BLOCK = 1 << 14
MAX_BATCH_ELEMENTS = 1 << 22
IMAG_TOL = 1e-12


def _site_coords(params: ModelParams) -> np.ndarray:
    L, d = params.lattice.side_length, params.lattice.dimension
    return np.array(list(itertools.product(range(L), repeat=d)), dtype=np.int64).reshape(-1, d)


def _distance(v: np.ndarray, L: int, metric: str) -> float:
    m = np.minimum(v % L, (-v) % L)
    if metric == "euclidean":
        return math.sqrt(int(np.dot(m, m)))
    return float(m.max())


def bond_matrix(params: ModelParams) -> np.ndarray:
    """W with E(s) = Nrm * s^T W s - h sum(s), built from the literal double sum.

    Every site i couples to i + v for one representative v of each {v, -v}
    pair; a self-paired v is its own representative, so its bond shows up
    from both endpoints.
    """
    n = params.n_sites
    W = np.zeros((n, n))
    if not params.interacting:
        return W
    L, d = params.lattice.side_length, params.lattice.dimension
    coords = _site_coords(params)
    index = {tuple(c): i for i, c in enumerate(coords)}
    reps = []
    for v in itertools.product(range(L), repeat=d):
        v = np.array(v)
        if not v.any():
            continue
        if tuple(v % L) <= tuple((-v) % L):
            reps.append((v, coupling_strength(params.law, _distance(v, L, params.lattice.metric))))
    for i, c in enumerate(coords):
        for v, eps in reps:
            W[i, index[tuple((c + v) % L)]] += eps
    return W


def _spins(configs: np.ndarray, n: int) -> np.ndarray:
    bits = (configs[:, None] >> np.arange(n)) & 1
    return 1.0 - 2.0 * bits


def energy(params: ModelParams, s, W: np.ndarray | None = None) -> float:
    s = np.asarray(s, dtype=np.float64)
    W = bond_matrix(params) if W is None else W
    return params.normalization * float(s @ W @ s) - params.field_h * float(s.sum())


def flip_energy_gap(params: ModelParams, s, k: int, W: np.ndarray | None = None) -> float:
    """E(s with spin k flipped) - E(s)."""
    s = np.asarray(s, dtype=np.float64)
    n = params.n_sites
    if not 0 <= k < n:
        raise IndexError(f"site index {k} out of range for {n} sites")
    W = bond_matrix(params) if W is None else W
    local = params.normalization * float((W[k] + W[:, k]) @ s)
    return -2.0 * s[k] * local + 2.0 * params.field_h * s[k]


def _gap_block(params: ModelParams, sym: np.ndarray, configs: np.ndarray) -> np.ndarray:
    s = _spins(configs, params.n_sites)
    return -2.0 * s * (params.normalization * (s @ sym)) + 2.0 * params.field_h * s


def site_response(params: ModelParams, times) -> np.ndarray:
    """g[t, k] = 2^-N sum_s cos(Delta_k(s) t); shape (len(times), N)."""
    n = params.n_sites
    if n > ORACLE_CAP:
        raise SizeLimitError(f"oracle enumeration is capped at {ORACLE_CAP} sites, got {n}")
    times = np.atleast_1d(np.asarray(times, dtype=np.float64))
    W = bond_matrix(params)
    sym = W + W.T
    total = 1 << n
    block = min(total, CONFIG_BLOCK)
    batch = max(1, MAX_BATCH_ELEMENTS // (block * n))

    re = np.zeros((len(times), n))
    im = np.zeros((len(times), n))
    for start in range(0, total, block):
        gaps = _gap_block(params, sym, np.arange(start, start + block, dtype=np.int64))
        for i in range(0, len(times), batch):
            phase = gaps[None, :, :] * times[i : i + batch, None, None]
            re[i : i + batch] += np.cos(phase).sum(axis=1)
            im[i : i + batch] += np.sin(phase).sum(axis=1)
    if np.max(np.abs(im), initial=0.0) > IMAG_TOL * total:
        raise NumericalCheckError("imaginary parts failed to cancel in oracle sum")
    return re / total


def oracle_expectation(params: ModelParams, observable: ObservableSpec, initial: InitialStateSpec, t):
    """<A>(t) by enumeration; scalar for scalar t, array for an array of times."""
    observable.check_size(params.n_sites)
    initial.check_size(params.n_sites)
    weights = observable.coefficients * initial.site_x_expectations
    out = site_response(params, t) @ weights
    return float(out[0]) if np.ndim(t) == 0 else out


def oracle_series(params: ModelParams, observable=None, initial=None, times=(0.0,)) -> TimeSeries:
    n = params.n_sites
    observable = observable if observable is not None else ObservableSpec.uniform(n)
    initial = initial if initial is not None else InitialStateSpec.uniform(n)
    times = np.asarray(times, dtype=np.float64)
    if times.ndim != 1 or len(times) == 0 or np.any(np.diff(times) <= 0):
        raise ValidationError("time grid must be nonempty and strictly increasing")
    values = oracle_expectation(params, observable, initial, times)
    return TimeSeries(times, values, "oracle", params.digest(), params.to_dict(),
                      initial_expectation(observable, initial))
