"""High-throughput value-only crossing kernels.

Numba-compiled label-setting searches over band subgraphs, plus the straight
row fast path for k=1.  Values are guaranteed identical to the reference
implementation in :mod:`percolab.crossing`; geodesics are not produced here.
"""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _band_value(bits: np.ndarray, n: int, k: int, band_offset: int,
                a: float, b: float) -> float:
    """Crossing time of [0,n] x [band_offset, band_offset+k-1]; binary-heap Dijkstra."""
    if k == 1:
        y = band_offset
        total = 0.0
        for x in range(n):
            total += a if bits[y * n + x] else b
        return total

    hoff = n * n
    nv = (n + 1) * k
    dist = np.full(nv, np.inf)
    done = np.zeros(nv, dtype=np.uint8)
    # binary heap of (priority, vertex)
    cap = 5 * nv  # each edge relaxes at most twice from settled endpoints
    hp = np.empty(cap)
    hv = np.empty(cap, dtype=np.int64)
    hn = 0

    def push(hp, hv, hn, p, v):
        i = hn
        hp[i] = p
        hv[i] = v
        while i > 0:
            par = (i - 1) >> 1
            if hp[par] <= hp[i]:
                break
            hp[par], hp[i] = hp[i], hp[par]
            hv[par], hv[i] = hv[i], hv[par]
            i = par
        return hn + 1

    for r in range(k):
        dist[r] = 0.0
        hn = push(hp, hv, hn, 0.0, r)

    best = np.inf
    while hn > 0:
        d = hp[0]
        u = hv[0]
        hn -= 1
        hp[0] = hp[hn]
        hv[0] = hv[hn]
        i = 0
        while True:
            l = 2 * i + 1
            if l >= hn:
                break
            m = l
            if l + 1 < hn and hp[l + 1] < hp[l]:
                m = l + 1
            if hp[i] <= hp[m]:
                break
            hp[i], hp[m] = hp[m], hp[i]
            hv[i], hv[m] = hv[m], hv[i]
            i = m
        if done[u] or d > dist[u]:
            continue
        done[u] = 1
        x = u // k
        r = u - x * k
        y = r + band_offset
        if x == n:
            best = d
            break
        # four moves; vertex ids v = x*k + r
        for mv in range(4):
            if mv == 0:
                if x >= n:
                    continue
                v = (x + 1) * k + r
                w = a if bits[y * n + x] else b
            elif mv == 1:
                if x <= 0:
                    continue
                v = (x - 1) * k + r
                w = a if bits[y * n + (x - 1)] else b
            elif mv == 2:
                if r + 1 >= k:
                    continue
                v = x * k + (r + 1)
                w = a if bits[hoff + y * (n + 1) + x] else b
            else:
                if r <= 0:
                    continue
                v = x * k + (r - 1)
                w = a if bits[hoff + (y - 1) * (n + 1) + x] else b
            if done[v]:
                continue
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                hn = push(hp, hv, hn, nd, v)
    return best


@njit(cache=True, nogil=True)
def _tau_values(bits: np.ndarray, n: int, k: int, a: float, b: float):
    """(tau, tau_band, tau_star, tau_star_band) in a single pass over all bands."""
    tau_v = np.inf
    tau_band = 0
    star_v = np.inf
    star_band = 0
    for i in range(n - k + 1):
        v = _band_value(bits, n, k, i, a, b)
        if v < tau_v:
            tau_v = v
            tau_band = i
        if i % k == 0 and i // k < n // k and v < star_v:
            star_v = v
            star_band = i
    return tau_v, tau_band, star_v, star_band


def band_value(bits: np.ndarray, n: int, k: int, band_offset: int, a: float, b: float) -> float:
    """Fast crossing-time value; identical to ``crossing.crossing_time(...).value``."""
    return float(_band_value(np.ascontiguousarray(bits, dtype=np.uint8), n, k, band_offset, a, b))


def tau_values(bits: np.ndarray, n: int, k: int, a: float, b: float):
    """Fast (tau, tau_band, tau_star, tau_star_band) for one configuration."""
    t, tb, s, sb = _tau_values(np.ascontiguousarray(bits, dtype=np.uint8), n, k, a, b)
    return float(t), int(tb), float(s), int(sb)


def row_sums(hbits: np.ndarray, a: float, b: float) -> np.ndarray:
    """Per-row crossing weights for k=1 from an (n, n) horizontal-bit matrix."""
    n = hbits.shape[1]
    pop = hbits.sum(axis=1, dtype=np.int64)
    return n * b - (b - a) * pop
