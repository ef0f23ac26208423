"""Deterministic-parallel Monte Carlo execution.

Every sample is a pure function of (master seed, sample index), so results are
independent of worker count and scheduling.  Workers process contiguous index
chunks and results are assembled in index order.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .grid import GridSpec, ParameterError
from .rng import substream

THREADS_ENV = "PERCOLAB_THREADS"


def worker_count() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            w = int(env)
        except ValueError as exc:
            raise ParameterError(f"{THREADS_ENV} must be an integer, got {env!r}") from exc
        if w < 1:
            raise ParameterError(f"{THREADS_ENV} must be >= 1, got {w}")
        return w
    return os.cpu_count() or 1


@dataclass(frozen=True)
class EstimateSummary:
    """A Monte Carlo estimate with its provenance."""

    name: str
    value: float
    stderr: float
    n: int
    seed: int


def _chunks(n: int, workers: int) -> list[tuple[int, int]]:
    per = math.ceil(n / workers)
    return [(i, min(i + per, n)) for i in range(0, n, per)]


def run_indexed(fn, n_samples: int, out_width: int, threads: int | None = None) -> np.ndarray:
    """Evaluate ``fn(lo, hi) -> ndarray of shape (hi-lo, out_width)`` over index
    chunks, in parallel, and assemble results in index order."""
    workers = threads if threads else worker_count()
    out = np.empty((n_samples, out_width))
    spans = _chunks(n_samples, workers)
    if workers == 1 or len(spans) == 1:
        for lo, hi in spans:
            out[lo:hi] = fn(lo, hi)
        return out
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {pool.submit(fn, lo, hi): (lo, hi) for lo, hi in spans}
        for fut, (lo, hi) in futures.items():
            out[lo:hi] = fut.result()
    return out


# ---------------------------------------------------------------------------
# Crossing-statistic samplers
# ---------------------------------------------------------------------------

def _draw_bits(rng: np.random.Generator, count: int, p_a: float) -> np.ndarray:
    if p_a == 0.5:
        return rng.integers(0, 2, size=count, dtype=np.uint8)
    return (rng.random(count) < p_a).astype(np.uint8)


def sample_statistic(stat: str, grid: GridSpec, samples: int, seed: int,
                     p_a: float = 0.5, band_offset: int = 0,
                     threads: int | None = None) -> tuple[np.ndarray, np.ndarray | None]:
    """Sample t / tau / taustar values; returns (values, band_offsets or None).

    k = 1 statistics touch only the horizontal bits and go through the
    row-sum fast path.
    """
    n, k, a, b = grid.n, grid.k, grid.a, grid.b
    want_band = stat in ("tau", "taustar")

    if stat == "t":
        def fn(lo: int, hi: int) -> np.ndarray:
            out = np.empty((hi - lo, 1))
            for i in range(lo, hi):
                rng = substream(seed, i)
                bits = _draw_bits(rng, grid.edge_count, p_a)
                out[i - lo, 0] = kernels.band_value(bits, n, k, band_offset, a, b)
            return out
        vals = run_indexed(fn, samples, 1, threads)
        return vals[:, 0], None

    if stat not in ("tau", "taustar"):
        raise ParameterError(f"unknown statistic {stat!r}")

    if k == 1:
        def fn(lo: int, hi: int) -> np.ndarray:
            out = np.empty((hi - lo, 2))
            for i in range(lo, hi):
                rng = substream(seed, i)
                hbits = _draw_bits(rng, n * n, p_a).reshape(n, n)
                rows = kernels.row_sums(hbits, a, b)
                j = int(np.argmin(rows))
                out[i - lo] = (rows[j], j)
            return out
    else:
        def fn(lo: int, hi: int) -> np.ndarray:
            out = np.empty((hi - lo, 2))
            for i in range(lo, hi):
                rng = substream(seed, i)
                bits = _draw_bits(rng, grid.edge_count, p_a)
                t, tb, s, sb = kernels.tau_values(bits, n, k, a, b)
                out[i - lo] = (t, tb) if stat == "tau" else (s, sb)
            return out
    res = run_indexed(fn, samples, 2, threads)
    return res[:, 0], res[:, 1].astype(np.int64)


def sample_statistic_pair(grid: GridSpec, samples: int, seed: int,
                          p_a: float = 0.5, threads: int | None = None
                          ) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Sample tau and taustar from the same configs in one band sweep each.

    Returns (tau_values, tau_bands, taustar_values, taustar_bands).
    """
    n, k, a, b = grid.n, grid.k, grid.a, grid.b

    if k == 1:
        def fn(lo: int, hi: int) -> np.ndarray:
            out = np.empty((hi - lo, 4))
            for i in range(lo, hi):
                rng = substream(seed, i)
                hbits = _draw_bits(rng, n * n, p_a).reshape(n, n)
                rows = kernels.row_sums(hbits, a, b)
                j = int(np.argmin(rows))
                out[i - lo] = (rows[j], j, rows[j], j)
            return out
    else:
        def fn(lo: int, hi: int) -> np.ndarray:
            out = np.empty((hi - lo, 4))
            for i in range(lo, hi):
                rng = substream(seed, i)
                bits = _draw_bits(rng, grid.edge_count, p_a)
                out[i - lo] = kernels.tau_values(bits, n, k, a, b)
            return out
    res = run_indexed(fn, samples, 4, threads)
    return (res[:, 0], res[:, 1].astype(np.int64),
            res[:, 2], res[:, 3].astype(np.int64))


def sample_noise_pairs(stat: str, grid: GridSpec, threshold: float, epsilon: float,
                       samples: int, seed: int, p_a: float = 0.5,
                       threads: int | None = None) -> np.ndarray:
    """Paired indicators (f(w), f(w^eps)) for a crossing functional; shape (N, 2).

    k = 1 goes through the collapsed row-popcount representation (exact in
    law), which is what makes n = 1600 pipelines fast.
    """
    n, k, a, b = grid.n, grid.k, grid.a, grid.b
    if k == 1 and p_a == 0.5:
        return _noise_pairs_collapsed_rows(n, a, b, threshold, epsilon,
                                           samples, seed, threads)

    def stat_of(bits: np.ndarray) -> float:
        if k == 1:
            rows = kernels.row_sums(bits.reshape(n, n), a, b)
            return float(rows.min())
        t, _, s, _ = kernels.tau_values(bits, n, k, a, b)
        return t if stat == "tau" else s

    count = n * n if k == 1 else grid.edge_count

    def fn(lo: int, hi: int) -> np.ndarray:
        out = np.empty((hi - lo, 2))
        for i in range(lo, hi):
            rng = substream(seed, i)
            w = _draw_bits(rng, count, p_a)
            mask = rng.random(count) < epsilon
            fresh = _draw_bits(rng, count, p_a)
            w_eps = np.where(mask, fresh, w)
            out[i - lo, 0] = stat_of(w) > threshold
            out[i - lo, 1] = stat_of(w_eps) > threshold
        return out

    return run_indexed(fn, samples, 2, threads)


def sample_row_min_collapsed(n: int, samples: int, seed: int, a: float = 1.0,
                             b: float = 2.0, threads: int | None = None
                             ) -> np.ndarray:
    """tau(n,1) sampler via the row-popcount law (exact in distribution).

    Row weights are n*b - (b-a)*popcount with iid Bin(n, 1/2) popcounts, so one
    binomial vector per sample replaces n^2 bit draws; this is what makes
    n = 1e4 with 1e5 samples feasible.
    """
    def fn(lo: int, hi: int) -> np.ndarray:
        out = np.empty((hi - lo, 1))
        for i in range(lo, hi):
            rng = substream(seed, i)
            pops = rng.binomial(n, 0.5, size=n)
            out[i - lo, 0] = n * b - (b - a) * int(pops.max())
        return out
    return run_indexed(fn, samples, 1, threads)[:, 0]


def _noise_pairs_collapsed_rows(n: int, a: float, b: float, threshold: float,
                                epsilon: float, samples: int, seed: int,
                                threads: int | None) -> np.ndarray:
    """Paired indicators for 1{tau(n,1) > q} under epsilon-resampling, with
    each row's (popcount, resampled popcount) drawn jointly:
    S' = S - Bin(S, eps) - ... + Bin(#resampled, 1/2), exact in law."""
    def fn(lo: int, hi: int) -> np.ndarray:
        out = np.empty((hi - lo, 2))
        for i in range(lo, hi):
            rng = substream(seed, i)
            pops = rng.binomial(n, 0.5, size=n)
            res_ones = rng.binomial(pops, epsilon)
            res_zeros = rng.binomial(n - pops, epsilon)
            fresh = rng.binomial(res_ones + res_zeros, 0.5)
            pops_eps = pops - res_ones + fresh
            t0 = n * b - (b - a) * int(pops.max())
            t1 = n * b - (b - a) * int(pops_eps.max())
            out[i - lo] = (t0 > threshold, t1 > threshold)
        return out
    return run_indexed(fn, samples, 2, threads)


def _affected_offsets(grid: GridSpec, edge: int, stat: str) -> list[int]:
    """Band offsets whose crossing time can change when ``edge`` flips."""
    orient, x, y = grid.decode(edge)
    n, k = grid.n, grid.k
    if stat == "taustar":
        if orient == 1 and (y // k) != ((y + 1) // k):
            return []
        off = (y // k) * k
        return [off] if off <= n - k else []
    lo = y - k + 1 if orient == 0 else y - k + 2
    hi = y
    return [i for i in range(max(lo, 0), min(hi, n - k) + 1)]


def estimate_influences_subset(stat: str, grid: GridSpec, threshold: float,
                               edges: list[int], samples: int, seed: int,
                               p_a: float = 0.5) -> list[tuple[int, float, float]]:
    """MC influence of each probe edge of 1{stat > q}, via targeted band
    recomputation.  Returns (edge, estimate, stderr) triples."""
    n, k, a, b = grid.n, grid.k, grid.a, grid.b
    if stat not in ("tau", "taustar"):
        raise ParameterError(f"influence probing supports tau/taustar, got {stat!r}")
    offsets = (list(range(0, n - k + 1)) if stat == "tau"
               else [i * k for i in range(n // k)])
    off_pos = {off: j for j, off in enumerate(offsets)}
    affected = {e: [off_pos[o] for o in _affected_offsets(grid, e, stat)
                    if o in off_pos] for e in edges}
    hits = {e: 0 for e in edges}
    for i in range(samples):
        rng = substream(seed, i)
        bits = _draw_bits(rng, grid.edge_count, p_a)
        vals = np.array([kernels.band_value(bits, n, k, off, a, b) for off in offsets])
        order = np.argsort(vals, kind="stable")
        min1 = vals[order[0]]
        f0 = min1 > threshold
        for e in edges:
            aff = affected[e]
            if not aff:
                continue
            rest = math.inf
            for j in order:
                if j not in aff:
                    rest = vals[j]
                    break
            bits[e] ^= 1
            new_min = rest
            for j in aff:
                v = kernels.band_value(bits, n, k, offsets[j], a, b)
                if v < new_min:
                    new_min = v
            bits[e] ^= 1
            if (new_min > threshold) != f0:
                hits[e] += 1
    out = []
    for e in edges:
        p = hits[e] / samples
        out.append((e, p, math.sqrt(p * (1 - p) / samples)))
    return out


def stratified_edge_subset(grid: GridSpec, limit: int = 64) -> list[int]:
    """Deterministic probe edges: corners, mid-edges, centre, both orientations."""
    n = grid.n
    xs = sorted({0, n // 2, max(n - 1, 0)})
    ys = sorted({0, n // 2, max(n - 1, 0)})
    edges = []
    for y in ys:
        for x in xs:
            if x < n and y < n:
                edges.append(grid.horizontal_index(x, y))
            if x <= n and y < n - 1:
                edges.append(grid.vertical_index(x, y))
    seen = []
    for e in edges:
        if e not in seen:
            seen.append(e)
    return seen[:limit]
