import math

import numpy as np
import pytest
from scipy.stats import norm

import percolab as pl
from percolab import mdev
from percolab.grid import ParameterError


def test_gaussian_tail_matches_scipy():
    for x in (0.0, 0.5, 1.0, 2.5, 6.0):
        assert mdev.gaussian_tail(x) == pytest.approx(float(norm.sf(x)),
                                                      rel=1e-12)


def test_empirical_quantile_definition():
    vals = np.array([5.0, 1.0, 3.0, 2.0, 4.0])
    # ceil(beta*N)-th order statistic
    assert mdev.empirical_quantile(vals, 0.5) == 3.0
    assert mdev.empirical_quantile(vals, 0.2) == 1.0
    assert mdev.empirical_quantile(vals, 0.21) == 2.0
    assert mdev.empirical_quantile(vals, 0.999) == 5.0
    with pytest.raises(ParameterError):
        mdev.empirical_quantile(vals, 1.5)


def test_two_point_law_moments_by_enumeration():
    law = mdev.TwoPointLaw(2.0, -1.0, 0.4)
    mu = 0.4 * 2 + 0.6 * (-1)
    assert law.mean == pytest.approx(mu)
    assert law.variance == pytest.approx(
        0.4 * (2 - mu) ** 2 + 0.6 * (-1 - mu) ** 2)
    assert law.third_central_moment == pytest.approx(
        0.4 * (2 - mu) ** 3 + 0.6 * (-1 - mu) ** 3)


def test_chunk_intervals_partition():
    for n in (10, 200, 997):
        for gamma in (0.6, 2 / 3, 0.9, 1.0):
            iv = mdev.chunk_intervals(n, gamma)
            assert iv[0][0] == 0 and iv[-1][1] == n
            for (a0, a1), (b0, b1) in zip(iv, iv[1:]):
                assert a1 == b0 and a1 > a0
            assert len(iv) == max(1, int(math.floor(n ** (1 - gamma) + 1e-9)))
    with pytest.raises(ParameterError):
        mdev.chunk_intervals(100, 0.4)


def test_chunk_sandwich_trivial_and_random():
    g = pl.GridSpec(24, 4)
    all_a = pl.sample_config(g, 1.0, 0, 0)
    assert mdev.chunk_sandwich_check(all_a, 2 / 3)
    for i in range(50):
        cfg = pl.sample_config(g, 0.5, 31, i)
        assert mdev.chunk_sandwich_check(cfg, 2 / 3)


def test_minimal_gamma_certifies_moment_condition():
    law = mdev.TwoPointLaw(1.0, -1.0, 0.5)
    gamma = mdev.minimal_gamma(law)
    mu = law.mean
    for j in range(2, 41):
        mj = law.p * abs(law.hi - mu) ** j + (1 - law.p) * abs(law.lo - mu) ** j
        assert mj <= math.gamma(j + 1) * gamma ** j * (1 + 1e-9)


def test_cgf_expansion_symmetric_coin():
    # for the fair +/-1 coin the quartic residual ratio tends to 1/12
    assert mdev.logcosh_r4(1e-3) == pytest.approx(1 / 12, rel=0.01)
    law = mdev.TwoPointLaw(1.0, -1.0, 0.5)
    res = mdev.cgf_expansion_check(law, [1e-3, 1e-4])
    assert res.accepted_s == [1e-3, 1e-4]
    assert res.max_r4 == pytest.approx(1 / 12, rel=0.05)


def test_cgf_expansion_rejects_out_of_range_points():
    law = mdev.TwoPointLaw(1.0, -1.0, 0.5)
    res = mdev.cgf_expansion_check(law, [1e-3, 1e9])
    assert 1e9 in res.rejected_s and 1e-3 in res.accepted_s


def test_binomial_row_tail_ratio_against_scipy():
    from scipy.stats import binom

    m, x = 10 ** 4, 2.0
    t = (m + x * math.sqrt(m)) / 2
    ref = float(binom.sf(math.ceil(t) - 1, m, 0.5)) / float(norm.sf(x))
    assert mdev.binomial_row_tail_ratio(m, x) == pytest.approx(ref, rel=1e-9)


def test_md_array_check_gaussian_limit():
    law = mdev.TwoPointLaw(1.0, -1.0, 0.5)
    spec = mdev.ArraySpec(((law, 10 ** 4),))
    rows = mdev.md_array_check(spec, [1.0], 10 ** 6, seed=3)
    assert rows[0].reliable
    assert rows[0].ratio == pytest.approx(1.0, abs=0.05)


def test_md_array_check_rejects_small_x():
    law = mdev.TwoPointLaw(1.0, -1.0, 0.5)
    spec = mdev.ArraySpec(((law, 100),))
    with pytest.raises(ParameterError):
        mdev.md_array_check(spec, [0.2], 1000, seed=0)


def test_array_spec_requires_unit_sigma():
    small = mdev.TwoPointLaw(0.1, -0.1, 0.5)
    with pytest.raises(ParameterError):
        mdev.ArraySpec(((small, 100),))


def test_anticoncentration_scan_known_distribution():
    # point mass: all values in one window
    vals = np.full(1000, 7.0)
    assert mdev.anticoncentration_scan(vals, 1.0, a=1.0, n=5, spacing=1.0) == 1.0
    # two atoms farther apart than the window: max window mass is the max freq
    vals = np.array([5.0] * 600 + [9.0] * 400)
    assert mdev.anticoncentration_scan(vals, 1.0, a=1.0, n=5, spacing=1.0) \
        == pytest.approx(0.6)


def test_variance_k1_closed_form():
    # tau at a fixed band with k=1 is a row sum: Var = n (b-a)^2 / 4 exactly
    n, a, b = 64, 1.0, 2.0
    vals = mdev.sample_band_values(n, 1, a, b, 0, 20_000, seed=5)
    expected = n * (b - a) ** 2 / 4
    se = mdev.jackknife_variance_stderr(vals)
    assert abs(vals.var(ddof=1) - expected) < 4 * se


def test_jackknife_stderr_scales_down():
    rng = np.random.default_rng(0)
    small = mdev.jackknife_variance_stderr(rng.normal(size=1000))
    large = mdev.jackknife_variance_stderr(rng.normal(size=64000))
    assert large < small


def test_mdfpp_tail_check_uses_independent_calibration():
    res1 = mdev.mdfpp_tail_check(32, 2, [1.0], 2000, seed=1)
    res2 = mdev.mdfpp_tail_check(32, 2, [1.0], 2000, seed=1,
                                 calibration_seed=999)
    assert res1.mean != res2.mean  # different calibration runs
    with pytest.raises(ParameterError):
        mdev.mdfpp_tail_check(32, 2, [0.1], 100, seed=1)


def test_d_value_and_quantile_prediction_finite():
    d = mdev.d_value(1000, 0.5)
    assert d > 0
    pred = mdev.predict_quantiles(100.0, 5.0, 1000, 0.5)
    assert pred.u_beta < 100.0
    assert pred.u_bar_beta < 100.0
