import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import percolab as pl
from percolab import tribes
from percolab.grid import ParameterError
from percolab.tribes import DomainError, TribesSpec


def exact_sf_fraction(n, t):
    """Independent oracle: dyadic tail probability via integer binomials."""
    j0 = math.ceil(t)
    if j0 <= 0:
        return Fraction(1)
    if j0 > n:
        return Fraction(0)
    return Fraction(sum(math.comb(n, j) for j in range(j0, n + 1)), 2 ** n)


def test_power_floor_guard():
    # (10**6)**(1/3) floats to 99.9999...; the floor must still be 100
    assert TribesSpec(10 ** 6, 1 / 3).ell == 100
    assert TribesSpec(10 ** 6, 1 / 2).ell == 1000
    assert TribesSpec(10 ** 7, 1 / 2).ell == 3162


def test_spec_partition_arithmetic():
    spec = TribesSpec(1000, 0.5)
    assert spec.ell == 31 and spec.m == 32 and spec.debris == 8
    assert spec.m * spec.ell + spec.debris == spec.n


def test_tribes_value_hand_examples():
    spec = TribesSpec(9, 0.5)  # ell=3, m=3
    bits = np.array([1, 0, 0, 1, 1, 0, 0, 0, 0], dtype=np.uint8)
    assert tribes.tribes_value(bits, spec) == 2
    assert tribes.tribes_value(np.ones(9, dtype=np.uint8), spec) == 3
    assert tribes.tribes_value(np.zeros(9, dtype=np.uint8), spec) == 0


def test_binomial_pmf_sf_against_integer_oracle():
    for n in (1, 5, 17, 64, 200):
        for t in range(0, n + 1, max(1, n // 7)):
            assert tribes.binomial_sf(n, t) == pytest.approx(
                float(exact_sf_fraction(n, t)), rel=1e-12)
            assert tribes.binomial_pmf(n, t) == pytest.approx(
                math.comb(n, t) / 2 ** n, rel=1e-12)


def test_binomial_sf_fractional_thresholds():
    # P(X >= 2.3) == P(X >= 3)
    assert tribes.binomial_sf(10, 2.3) == pytest.approx(
        float(exact_sf_fraction(10, 3)), rel=1e-12)


def test_binomial_cdf_plus_sf_is_one():
    for n in (9, 1001, 10 ** 6):
        for s in (n // 2 - 2, n // 2, n // 2 + 7):
            total = math.exp(tribes.binomial_logcdf(n, s)) \
                + tribes.binomial_sf(n, s + 1)
            assert total == pytest.approx(1.0, abs=1e-12)


def test_bahadur_asymptotics_shape():
    # the asymptotic must approach the exact value as n grows (log scale)
    x = 2.0
    for n in (10 ** 4, 10 ** 6):
        t = n / 2 + x * math.sqrt(n) / 2
        exact = tribes.binomial_sf(n, t)
        approx = tribes.binomial_tail_asymptotic(n, x)
        assert abs(math.log(exact) - math.log(approx)) < 0.5
    with pytest.raises(ParameterError):
        tribes.binomial_tail_asymptotic(100, 0.0)


def test_tribes_cdf_against_independence_oracle():
    spec = TribesSpec(9, 0.5)  # ell=3, m=3
    for s in range(-1, 4):
        single = float(sum(Fraction(math.comb(3, j), 8)
                           for j in range(0, max(s + 1, 0))))
        assert tribes.tribes_cdf_exact(spec, s) == pytest.approx(single ** 3,
                                                                 abs=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.integers(10, 5000), st.floats(0.2, 0.8), st.floats(0.05, 0.95))
def test_quantile_is_generalised_inverse(n, lam, beta):
    spec = TribesSpec(n, lam)
    q = tribes.tribes_quantile_exact(spec, beta)
    assert tribes.tribes_cdf_exact(spec, q) >= beta
    if q > 0:
        assert tribes.tribes_cdf_exact(spec, q - 1) < beta


def test_cdf_is_monotone_and_bounded():
    spec = TribesSpec(100, 0.5)
    prev = 0.0
    for s in range(spec.ell + 1):
        cur = tribes.tribes_cdf_exact(spec, s)
        assert prev <= cur <= 1.0
        prev = cur
    assert prev == 1.0


def test_influence_against_enumeration_oracle():
    # ell=2, m=2 (n=4, lam=0.5): enumerate all 16 configurations
    spec = TribesSpec(4, 0.5)
    q = 1.0
    count = 0
    for word in range(16):
        bits = np.array([(word >> i) & 1 for i in range(4)], dtype=np.uint8)
        v0 = tribes.tribes_value(bits, spec) > q
        bits[0] ^= 1
        if (tribes.tribes_value(bits, spec) > q) != v0:
            count += 1
    assert tribes.tribes_influence_exact(spec, q) == pytest.approx(count / 16)


def test_influence_vector_zero_on_debris():
    spec = TribesSpec(10, 0.5)  # ell=3, m=3, debris=1
    vec = tribes.tribes_influence_vector(spec, 1.5)
    assert np.all(vec[:9] > 0)
    assert vec[9] == 0.0


def test_bks_is_m_ell_inf_squared():
    spec = TribesSpec(1000, 0.5)
    q = tribes.tribes_quantile_exact(spec, 0.5)
    inf = tribes.tribes_influence_exact(spec, q)
    assert tribes.tribes_bks_exact(spec, q) == pytest.approx(
        spec.m * spec.ell * inf * inf)


def test_predictor_domain_error_never_clamps():
    with pytest.raises(DomainError):
        tribes.s_quantile_predictor(100, 0.5, 1e-6)
    # valid point evaluates fine
    s = tribes.s_quantile_predictor(10 ** 6, 0.5, 0.5)
    assert 500 < s < 600


def test_predictor_parameter_validation():
    with pytest.raises(ParameterError):
        tribes.s_quantile_predictor(100, 0.0, 0.5)
    with pytest.raises(ParameterError):
        tribes.s_quantile_predictor(100, 0.5, 1.0)


def test_tau_tribes_identity_random_configs():
    g = pl.GridSpec(5, 1)
    for i in range(200):
        cfg = pl.sample_config(g, 0.5, 77, i)
        assert tribes.tau_tribes_identity_check(cfg)


def test_tau_tribes_identity_trivial_configs():
    g = pl.GridSpec(5, 1)
    assert tribes.tau_tribes_identity_check(pl.sample_config(g, 1.0, 0, 0))
    assert tribes.tau_tribes_identity_check(pl.sample_config(g, 0.0, 0, 0))
