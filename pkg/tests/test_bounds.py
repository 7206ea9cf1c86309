import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lrising.bounds import (
    LOWER_X_MAX,
    UPPER_X_MAX,
    _chain_moments,
    _lattice_moments,
    gaussian_lower_bound,
    gaussian_upper_bound,
    minimal_system_size,
    second_moment,
    verify_minimal_size,
)
from lrising.errors import NoSolutionError, RegimeError, ValidationError
from lrising.evolution import amplitude_factor
from lrising.model import CouplingLaw, LatticeSpec, ModelParams
from lrising.zeta import zeta


def certificate_by_enumeration(n, law, tau):
    """1 - exp(-4 Nrm^2 S2 tau^2) and window validity from the literal coupling list."""
    eps = [law.amplitude_C * j**-law.alpha for j in range(1, n // 2 + 1)]
    eff = [2 * e for e in eps[:-1]] + [2 * eps[-1]]  # both directions, antipodal doubled
    s1 = math.fsum(eff)
    s2 = math.fsum(2 * e * e for e in eps[:-1]) + (2 * eps[-1]) ** 2
    nrm = 1.0 / s1
    x_max = 2 * nrm * max(eps[0], 2 * eps[-1]) * tau
    return -math.expm1(-4 * nrm * nrm * s2 * tau * tau), x_max <= 1.0


# -- second moment ---------------------------------------------------------------


def test_second_moment_examples():
    assert second_moment(ModelParams.chain(4, 0.0).multiset()) == pytest.approx(6.0, rel=1e-15)
    assert second_moment(ModelParams.chain(6, 1.0).multiset()) == pytest.approx(53 / 18, rel=1e-15)
    big = second_moment(ModelParams.chain(10**6, 2.0).multiset())
    assert big == pytest.approx(2 * zeta(4.0), rel=1e-15)


@pytest.mark.parametrize("n, alpha", [(4, 0.0), (10, 0.3), (1000, 1.7), (123456, 0.5)])
def test_chain_moments_match_enumeration(n, alpha):
    n += n % 2
    law = CouplingLaw(alpha, 2.5)
    fast = _chain_moments(n, law)
    slow = _lattice_moments(LatticeSpec.chain(n), law)
    assert fast.normalization == pytest.approx(slow.normalization, rel=1e-13)
    assert fast.s2 == pytest.approx(slow.s2, rel=1e-13)
    assert fast.max_effective == pytest.approx(slow.max_effective, rel=1e-15)


# -- scalar kernels ---------------------------------------------------------------


def test_cosine_kernel_inequalities_on_dense_grid():
    x = np.linspace(0, UPPER_X_MAX, 10**6)
    assert np.all(np.cos(x) <= np.exp(-x * x / 2) + 1e-16)
    x = np.linspace(0, LOWER_X_MAX, 10**6)
    assert np.all(np.cos(x) >= np.exp(-x * x) - 1e-16)


# -- bounds -----------------------------------------------------------------------


def test_bounds_examples():
    p = ModelParams.chain(4, 0.0)  # rates 1/2 (x2) and 1; Nrm^2 S2 = 6/16
    t = 0.5
    up = gaussian_upper_bound(p, None, t)
    lo = gaussian_lower_bound(p, None, t)
    assert up.valid and lo.valid
    assert up.value == pytest.approx(math.exp(-2 * 0.375 * 0.25), rel=1e-15)
    assert lo.value == pytest.approx(math.exp(-4 * 0.375 * 0.25), rel=1e-15)
    assert lo.value <= amplitude_factor(p, t=t) <= up.value


def test_bounds_report_invalid_window():
    p = ModelParams.chain(4, 0.0)
    up = gaussian_upper_bound(p, None, 2.0)
    lo = gaussian_lower_bound(p, None, 1.2)
    assert not up.valid and up.value == 1.0 and up.validity_reason
    assert not lo.valid and lo.value == 0.0 and lo.validity_reason


def test_negative_time_rejected():
    p = ModelParams.chain(8, 1.0)
    with pytest.raises(ValidationError):
        gaussian_upper_bound(p, None, -1.0)
    with pytest.raises(ValidationError):
        gaussian_lower_bound(p, None, -1.0)


@settings(max_examples=150, deadline=None)
@given(st.integers(2, 600), st.floats(0, 3), st.floats(0, 0.999))
def test_sandwich_inside_validity_window(half, alpha, frac):
    p = ModelParams.chain(2 * half, alpha)
    ms = p.multiset()
    x_per_t = 2 * p.normalization * float(ms.effective_strength.max())
    t = frac * UPPER_X_MAX / x_per_t
    F = amplitude_factor(p, t=t)
    up = gaussian_upper_bound(p, ms, t)
    assert up.valid and abs(F) <= up.value * (1 + 1e-12)
    lo = gaussian_lower_bound(p, ms, t)
    if lo.valid:
        assert F >= lo.value * (1 - 1e-12)


def test_bounds_monotone_in_time():
    p = ModelParams.chain(200, 0.5)
    ts = np.linspace(0, 30, 200)
    up = [gaussian_upper_bound(p, None, t) for t in ts]
    lo = [gaussian_lower_bound(p, None, t) for t in ts]
    up_vals = [b.value for b in up if b.valid]
    lo_vals = [b.value for b in lo if b.valid]
    assert np.all(np.diff(up_vals) <= 0) and np.all(np.diff(lo_vals) <= 0)
    assert all(u.value >= l.value for u, l in zip(up, lo) if u.valid and l.valid)


def test_bounds_on_a_lattice():
    p = ModelParams(LatticeSpec(2, 6), CouplingLaw(1.0))
    for t in (0.1, 0.5, 1.0):
        F = amplitude_factor(p, t=t)
        assert gaussian_lower_bound(p, None, t).value <= F <= gaussian_upper_bound(p, None, t).value


# -- minimal system size ------------------------------------------------------------


def test_nmin_tiny_horizon_is_smallest_chain():
    assert minimal_system_size(1e-6, 0.1, CouplingLaw(0.5)) == 4


@pytest.mark.parametrize("tau, delta, alpha", [(10, 0.01, 0.5), (1, 0.001, 0.25), (5, 0.01, 0.75), (3, 0.05, 0.0)])
def test_nmin_is_the_first_certified_chain(tau, delta, alpha):
    law = CouplingLaw(alpha)
    n = minimal_system_size(tau, delta, law)
    dev, ok = certificate_by_enumeration(n, law, tau)
    assert ok and dev < delta
    if n > 4:
        dev, ok = certificate_by_enumeration(n - 2, law, tau)
        assert not (ok and dev < delta)


def test_nmin_certified_size_passes_direct_check():
    law = CouplingLaw(0.5)
    n = minimal_system_size(10, 0.01, law)
    check = verify_minimal_size(n, 10, 0.01, law)
    assert check.passed and check.max_deviation < 0.01 and check.points == 1000


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 5), st.floats(0.01, 0.5), st.floats(0, 0.9))
def test_nmin_monotone(tau, delta, alpha):
    law = CouplingLaw(alpha)
    n = minimal_system_size(tau, delta, law)
    assert minimal_system_size(tau * 1.5, delta, law) >= n
    assert minimal_system_size(tau, delta / 2, law) >= n


def test_nmin_in_two_dimensions():
    law = CouplingLaw(1.0)
    n = minimal_system_size(0.5, 0.05, law, dimension=2)
    side = math.isqrt(n)
    assert side * side == n and side % 2 == 0
    check = verify_minimal_size(n, 0.5, 0.05, law, dimension=2)
    assert check.passed


@pytest.mark.parametrize("alpha, d", [(1.0, 1), (2.0, 1), (2.5, 2)])
def test_nmin_regime_error(alpha, d):
    with pytest.raises(RegimeError):
        minimal_system_size(1.0, 0.01, CouplingLaw(alpha), dimension=d)


def test_nmin_requires_initial_value_above_delta():
    with pytest.raises(ValidationError):
        minimal_system_size(1.0, 0.5, CouplingLaw(0.5), A0=0.4)


def test_nmin_cap():
    with pytest.raises(NoSolutionError):
        minimal_system_size(50, 0.001, CouplingLaw(0.75), cap=2**20)
