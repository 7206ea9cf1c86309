import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lrising.errors import SizeLimitError
from lrising.evolution import InitialStateSpec, ObservableSpec, cosine_product, expectation_series
from lrising.model import CouplingLaw, LatticeSpec, ModelParams
from lrising.oracle import bond_matrix, energy, flip_energy_gap, oracle_expectation, oracle_series


def dense_evolution(params, obs, init, t):
    """<A>(t) by explicit 2^N-dim matrix exponentials, for tiny systems."""
    n = params.n_sites
    W = bond_matrix(params)
    diag = np.empty(2**n)
    for c in range(2**n):
        s = 1.0 - 2.0 * ((c >> np.arange(n)) & 1)
        diag[c] = energy(params, s, W)
    # rho = prod_i (1 + m_i sigma^x_i) / 2 in the z basis
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    rho = np.ones((1, 1))
    for i in reversed(range(n)):
        rho = np.kron(rho, 0.5 * (np.eye(2) + init.site_x_expectations[i] * sx))
    rho = rho.reshape(2**n, 2**n)
    A = np.zeros((2**n, 2**n))
    for i in range(n):
        op = np.ones((1, 1))
        for k in reversed(range(n)):
            op = np.kron(op, sx if k == i else np.eye(2))
        A += obs.coefficients[i] * op
    phase = np.exp(-1j * diag * t)
    rho_t = phase[:, None] * rho * phase.conj()[None, :]
    return float(np.real(np.trace(rho_t @ A)))


# -- energies and flip gaps -----------------------------------------------------


def test_all_up_four_ring_flip_gap():
    # Nrm = 1/4 for alpha=0 on 4 sites; neighbours of k see 1 + 1 + 2*1 = 4 per unit
    p = ModelParams.chain(4, 0.0)
    assert flip_energy_gap(p, np.ones(4), 0) == pytest.approx(-2.0, rel=1e-15)


def test_flip_gap_with_field_and_mixed_state():
    p = ModelParams.chain(4, 1.0, h=0.3)
    s = np.array([1.0, -1.0, 1.0, 1.0])
    # Nrm = 1/3; neighbours of site 0: 1 (w=1), 3 (w=1), 2 (w=1/2 twice) -> local = (-1 + 1 + 1)/3
    assert flip_energy_gap(p, s, 0) == pytest.approx(-2 * (1 / 3) + 0.6, rel=1e-14)


def test_flip_gap_equals_energy_difference(rng):
    p = ModelParams(LatticeSpec(2, 4, "chebyshev"), CouplingLaw(1.3, 2.0), 0.45)
    W = bond_matrix(p)
    for _ in range(20):
        s = rng.choice([-1.0, 1.0], size=p.n_sites)
        k = int(rng.integers(p.n_sites))
        flipped = s.copy()
        flipped[k] = -flipped[k]
        gap = energy(p, flipped, W) - energy(p, s, W)
        assert flip_energy_gap(p, s, k, W) == pytest.approx(gap, rel=1e-12, abs=1e-13)


def test_all_up_energy_is_half_the_site_count():
    # one representative per bond pair is half the effective coupling sum, so E = N / 2
    for p in (ModelParams.chain(10, 0.7), ModelParams(LatticeSpec(2, 4), CouplingLaw(2.0))):
        assert energy(p, np.ones(p.n_sites)) == pytest.approx(p.n_sites / 2, rel=1e-14)


def test_bond_matrix_row_sums():
    p = ModelParams(LatticeSpec(3, 2), CouplingLaw(1.0))
    W = bond_matrix(p)
    np.testing.assert_allclose((W + W.T).sum(axis=1), 1.0 / p.normalization, rtol=1e-14)


def test_flip_gap_site_out_of_range():
    with pytest.raises(IndexError):
        flip_energy_gap(ModelParams.chain(4, 0.0), np.ones(4), 4)


# -- enumeration oracle ------------------------------------------------------------


def test_oracle_initial_value():
    p = ModelParams.chain(6, 0.5, h=0.2)
    obs = ObservableSpec([1, 2, 3, 4, 5, 6])
    init = InitialStateSpec([1, -1, 0.5, 0, 0.25, -0.75])
    expected = 1 - 2 + 1.5 + 0 + 1.25 - 4.5
    assert oracle_expectation(p, obs, init, 0.0) == pytest.approx(expected, rel=1e-14)


def test_oracle_larmor_only():
    p = ModelParams.chain(6, 1.0, h=0.9, interacting=False)
    t = np.linspace(0, 4, 9)
    vals = oracle_expectation(p, ObservableSpec.uniform(6), InitialStateSpec.uniform(6, 0.5), t)
    np.testing.assert_allclose(vals, 3 * np.cos(1.8 * t), rtol=1e-13, atol=1e-13)


@pytest.mark.parametrize("n", [2, 4, 6])
def test_oracle_matches_dense_evolution(n, rng):
    p = ModelParams.chain(n, 0.9, h=0.35)
    obs = ObservableSpec(rng.normal(size=n))
    init = InitialStateSpec(rng.uniform(-1, 1, size=n))
    for t in (0.3, 1.7, 6.0):
        assert oracle_expectation(p, obs, init, t) == pytest.approx(dense_evolution(p, obs, init, t), abs=1e-12)


def test_translation_covariance():
    p = ModelParams.chain(8, 0.6, h=0.1)
    t = np.array([0.5, 2.0, 7.0])
    init = InitialStateSpec.uniform(8, 0.8)
    responses = [oracle_expectation(p, ObservableSpec(np.eye(8)[k]), init, t) for k in range(8)]
    for r in responses[1:]:
        np.testing.assert_allclose(r, responses[0], rtol=1e-12, atol=1e-14)


@settings(max_examples=15, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=6, max_size=6), st.lists(st.floats(-3, 3), min_size=6, max_size=6),
       st.floats(-2, 2))
def test_linearity_in_observable(a, b, lam):
    p = ModelParams.chain(6, 1.1, h=0.2)
    init = InitialStateSpec.uniform(6, 0.7)
    t = 1.3
    combined = ObservableSpec(np.array(a) + lam * np.array(b))
    lhs = oracle_expectation(p, combined, init, t)
    rhs = oracle_expectation(p, ObservableSpec(a), init, t) + lam * oracle_expectation(p, ObservableSpec(b), init, t)
    assert lhs == pytest.approx(rhs, abs=1e-11)


@pytest.mark.parametrize("n", [2, 4, 6, 8, 10, 12])
@pytest.mark.parametrize("alpha", [0.0, 0.5, 1.5])
def test_closed_form_matches_enumeration_on_chains(n, alpha, rng):
    p = ModelParams.chain(n, alpha, h=0.4)
    obs = ObservableSpec(rng.normal(size=n))
    init = InitialStateSpec(rng.uniform(-1, 1, size=n))
    t = np.linspace(0.05, 20, 40)
    exact = oracle_expectation(p, obs, init, t)
    fast = expectation_series(p, obs, init, t).values
    np.testing.assert_allclose(fast, exact, rtol=0, atol=1e-12)


@pytest.mark.parametrize(
    "lattice", [LatticeSpec(2, 4), LatticeSpec(2, 4, "chebyshev"), LatticeSpec(3, 2), LatticeSpec(2, 2)],
)
def test_closed_form_matches_enumeration_on_lattices(lattice):
    p = ModelParams(lattice, CouplingLaw(1.2), 0.25)
    t = np.linspace(0.1, 15, 25)
    exact = oracle_series(p, times=t).values
    np.testing.assert_allclose(expectation_series(p, times=t).values, exact, rtol=0, atol=1e-12)


def test_published_product_disagrees_with_enumeration():
    p = ModelParams.chain(8, 0.5)
    t = np.array([0.5, 1.0, 2.0, 3.0])
    exact = oracle_series(p, times=t).values / 8
    published = cosine_product(p, mode="as_published").values(t)
    assert np.max(np.abs(published - exact)) > 0.01
    # the disagreement is exactly the surplus factors of the published product
    nrm = p.normalization
    surplus = np.cos(2 * nrm * 4**-0.5 * t) ** 2 / np.cos(4 * nrm * 4**-0.5 * t)
    surplus *= np.prod([np.cos(2 * nrm * j**-0.5 * t) ** 2 for j in range(5, 9)], axis=0)
    np.testing.assert_allclose(published, exact * surplus, rtol=1e-11)


def test_oracle_size_cap():
    with pytest.raises(SizeLimitError):
        oracle_expectation(ModelParams.chain(26, 1.0), ObservableSpec.uniform(26), InitialStateSpec.uniform(26), 1.0)


def test_oracle_scalar_and_array_time():
    p = ModelParams.chain(4, 0.0)
    obs, init = ObservableSpec.uniform(4), InitialStateSpec.uniform(4)
    assert isinstance(oracle_expectation(p, obs, init, 1.0), float)
    assert oracle_expectation(p, obs, init, np.array([1.0, 2.0])).shape == (2,)
    assert oracle_expectation(p, obs, init, math.pi) == pytest.approx(0.0, abs=1e-14)
