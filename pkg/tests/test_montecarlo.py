import numpy as np
import pytest

import percolab as pl
from percolab import crossing, montecarlo as mc
from percolab.grid import ParameterError


def test_chunk_cover():
    for n, w in ((10, 3), (1, 4), (100, 7)):
        spans = mc._chunks(n, w)
        covered = [i for lo, hi in spans for i in range(lo, hi)]
        assert covered == list(range(n))


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("PERCOLAB_THREADS", "3")
    assert mc.worker_count() == 3
    monkeypatch.setenv("PERCOLAB_THREADS", "zero")
    with pytest.raises(ParameterError):
        mc.worker_count()
    monkeypatch.setenv("PERCOLAB_THREADS", "0")
    with pytest.raises(ParameterError):
        mc.worker_count()


def test_results_independent_of_thread_count():
    g = pl.GridSpec(10, 2)
    for stat in ("t", "tau", "taustar"):
        ref = mc.sample_statistic(stat, g, 123, 7, threads=1)
        for threads in (2, 5, 16):
            got = mc.sample_statistic(stat, g, 123, 7, threads=threads)
            assert np.array_equal(ref[0], got[0])
            if ref[1] is not None:
                assert np.array_equal(ref[1], got[1])


def test_sample_statistic_matches_reference_crossing():
    g = pl.GridSpec(5, 2)
    vals, bands = mc.sample_statistic("taustar", g, 30, 99)
    for i in range(30):
        cfg = pl.sample_config(g, 0.5, 99, i)
        ref = crossing.tau_star(cfg)
        assert vals[i] == ref.value
        assert bands[i] == ref.band_offset


def test_k1_fast_path_matches_canonical_config_sampler():
    g = pl.GridSpec(6, 1)
    vals, _ = mc.sample_statistic("tau", g, 25, 7)
    for i in range(25):
        cfg = pl.sample_config(g, 0.5, 7, i)
        assert vals[i] == crossing.tau(cfg).value


def test_sample_statistic_pair_consistent_with_single_stat():
    g = pl.GridSpec(8, 3)
    t_v, t_b, s_v, s_b = mc.sample_statistic_pair(g, 40, 5)
    tv2, tb2 = mc.sample_statistic("tau", g, 40, 5)
    sv2, sb2 = mc.sample_statistic("taustar", g, 40, 5)
    assert np.array_equal(t_v, tv2) and np.array_equal(t_b, tb2)
    assert np.array_equal(s_v, sv2) and np.array_equal(s_b, sb2)
    assert np.all(t_v <= s_v)


def test_collapsed_row_min_matches_bit_level_law():
    # same law, different sampler: compare means within MC error
    n, samples = 24, 4000
    g = pl.GridSpec(n, 1)
    bit_vals, _ = mc.sample_statistic("tau", g, samples, 1)
    col_vals = mc.sample_row_min_collapsed(n, samples, 2)
    se = np.hypot(bit_vals.std() / np.sqrt(samples),
                  col_vals.std() / np.sqrt(samples))
    assert abs(bit_vals.mean() - col_vals.mean()) < 5 * se


def test_noise_pairs_trivial_epsilons():
    g = pl.GridSpec(16, 1)
    pairs = mc.sample_noise_pairs("taustar", g, 26, 0.0, 500, 3)
    assert np.array_equal(pairs[:, 0], pairs[:, 1])
    pairs = mc.sample_noise_pairs("taustar", g, 26, 1.0, 5000, 3)
    cov = np.mean(pairs[:, 0] * pairs[:, 1]) \
        - pairs[:, 0].mean() * pairs[:, 1].mean()
    assert abs(cov) < 0.02


def test_noise_pairs_generic_path_marginals():
    g = pl.GridSpec(6, 2)
    pairs = mc.sample_noise_pairs("taustar", g, 9.5, 0.3, 4000, 11)
    # both marginals estimate the same probability
    assert abs(pairs[:, 0].mean() - pairs[:, 1].mean()) < 0.05


def test_affected_offsets_cover_pivotal_bands():
    g = pl.GridSpec(5, 2)
    rng = np.random.default_rng(0)
    from percolab import kernels

    for _ in range(40):
        bits = rng.integers(0, 2, size=g.edge_count, dtype=np.uint8)
        for e in range(g.edge_count):
            aff = mc._affected_offsets(g, e, "tau")
            flipped = bits.copy()
            flipped[e] ^= 1
            for off in range(g.n - g.k + 1):
                v0 = kernels.band_value(bits, g.n, g.k, off, g.a, g.b)
                v1 = kernels.band_value(flipped, g.n, g.k, off, g.a, g.b)
                if v0 != v1:
                    assert off in aff


def test_influence_subset_matches_direct_estimator():
    from percolab.functionals import TAU_STAR, Functional
    from percolab import noise

    g = pl.GridSpec(4, 2)
    q = 5.5
    edges = mc.stratified_edge_subset(g)[:4]
    rows = mc.estimate_influences_subset("taustar", g, q, edges, 3000, 21)
    f = Functional(TAU_STAR, q, grid=g)
    for e, est, se in rows:
        direct, dse = noise.estimate_influence(f, e, 3000, 22)
        assert abs(est - direct) < 5 * max(np.hypot(se, dse), 1e-3)


def test_stratified_edge_subset_is_deterministic_and_bounded():
    for n in (4, 100, 1600):
        g = pl.GridSpec(n, 1)
        edges = mc.stratified_edge_subset(g)
        assert edges == mc.stratified_edge_subset(g)
        assert 1 <= len(edges) <= 64
        assert all(0 <= e < g.edge_count for e in edges)
