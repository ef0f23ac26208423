"""Exact crossing times, geodesics, and pivotality on explicit configurations.

All searches run on a horizontal band [0,n] x [i, i+k-1] with a zero-cost
virtual source attached to the left boundary and a virtual sink attached to
the right.  Ties between equal-weight paths are broken by the smaller index
of the incoming edge, which makes the selected geodesic canonical.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .grid import GridSpec, ParameterError, WeightConfig


@dataclass(frozen=True)
class CrossingResult:
    """Crossing time, the canonically selected geodesic, and the band achieving it."""

    value: float
    geodesic: frozenset
    band_offset: int


def _check_band(grid: GridSpec, band_offset: int) -> None:
    if not 0 <= band_offset <= grid.n - grid.k:
        raise ParameterError(
            f"band_offset {band_offset} out of range [0, {grid.n - grid.k}]"
        )


def crossing_time(config: WeightConfig, band_offset: int) -> CrossingResult:
    """Minimal left-right crossing weight of the band [0,n] x [band_offset, band_offset+k-1].

    Label-setting search over the band subgraph.  The geodesic is recovered by
    parent pointers; among equally short paths the one whose incoming edges
    have the smaller indices is selected.
    """
    grid = config.grid
    _check_band(grid, band_offset)
    n, k = grid.n, grid.k
    bits = config.bits
    a, b = grid.a, grid.b

    # Vertices of the band are (x, r) with r = y - band_offset in [0, k).
    nv = (n + 1) * k

    def vid(x: int, r: int) -> int:
        return x * k + r

    dist = np.full(nv, np.inf)
    in_edge = np.full(nv, np.iinfo(np.int64).max, dtype=np.int64)
    parent = np.full(nv, -1, dtype=np.int64)
    done = np.zeros(nv, dtype=bool)

    heap = []
    for r in range(k):
        v = vid(0, r)
        dist[v] = 0.0
        in_edge[v] = -1
        heapq.heappush(heap, (0.0, -1, v))

    def weight(idx: int) -> float:
        return a if bits[idx] else b

    while heap:
        d, e, u = heapq.heappop(heap)
        if done[u] or d > dist[u] or (d == dist[u] and e > in_edge[u]):
            continue
        done[u] = True
        x, r = divmod(u, k)
        y = r + band_offset
        # Neighbours: left/right horizontal, up/down vertical, all inside the band.
        moves = []
        if x < n:
            moves.append((vid(x + 1, r), grid.horizontal_index(x, y)))
        if x > 0:
            moves.append((vid(x - 1, r), grid.horizontal_index(x - 1, y)))
        if r + 1 < k:
            moves.append((vid(x, r + 1), grid.vertical_index(x, y)))
        if r > 0:
            moves.append((vid(x, r - 1), grid.vertical_index(x, y - 1)))
        for v, idx in moves:
            if done[v]:
                continue
            nd = d + weight(idx)
            if nd < dist[v] or (nd == dist[v] and idx < in_edge[v]):
                dist[v] = nd
                in_edge[v] = idx
                parent[v] = u
                heapq.heappush(heap, (nd, idx, v))

    # Virtual sink: best right-boundary vertex, ties by smaller incoming edge index.
    best = min(range(k), key=lambda r: (dist[vid(n, r)], in_edge[vid(n, r)]))
    target = vid(n, best)
    edges = []
    v = target
    while parent[v] >= 0 or in_edge[v] >= 0:
        edges.append(int(in_edge[v]))
        v = int(parent[v])
        if v < 0:
            break
    return CrossingResult(float(dist[target]), frozenset(edges), band_offset)


def tau(config: WeightConfig) -> CrossingResult:
    """Restricted crossing time: minimum of all n-k+1 band crossing times.

    Records the smallest band offset achieving the minimum.
    """
    grid = config.grid
    best = None
    for i in range(grid.n - grid.k + 1):
        res = crossing_time(config, i)
        if best is None or res.value < best.value:
            best = res
    return best


def tau_star(config: WeightConfig) -> CrossingResult:
    """Minimum crossing time over the floor(n/k) disjoint bands tiling the square."""
    grid = config.grid
    best = None
    for i in range(grid.n // grid.k):
        res = crossing_time(config, i * grid.k)
        if best is None or res.value < best.value:
            best = res
    return best


def geodesic_census(config: WeightConfig, band_offset: int) -> tuple[int, int]:
    """(count_a, count_b) of edge weights along the canonically selected geodesic."""
    res = crossing_time(config, band_offset)
    count_a = sum(1 for e in res.geodesic if config.bits[e])
    return count_a, len(res.geodesic) - count_a


def enumerate_crossing_paths(grid: GridSpec, band_offset: int = 0) -> list[tuple[int, ...]]:
    """All simple left-right crossing paths of the band, as tuples of edge indices.

    Brute-force oracle; intended for small grids only.
    """
    _check_band(grid, band_offset)
    n, k = grid.n, grid.k
    paths: list[tuple[int, ...]] = []

    def neighbours(x: int, y: int):
        if x < n:
            yield (x + 1, y), grid.horizontal_index(x, y)
        if x > 0:
            yield (x - 1, y), grid.horizontal_index(x - 1, y)
        if y + 1 < band_offset + k:
            yield (x, y + 1), grid.vertical_index(x, y)
        if y > band_offset:
            yield (x, y - 1), grid.vertical_index(x, y - 1)

    def walk(x: int, y: int, visited: set, edges: list) -> None:
        if x == n:
            paths.append(tuple(edges))
            return
        for (nx, ny), idx in neighbours(x, y):
            if (nx, ny) in visited:
                continue
            visited.add((nx, ny))
            edges.append(idx)
            walk(nx, ny, visited, edges)
            edges.pop()
            visited.remove((nx, ny))

    for y0 in range(band_offset, band_offset + k):
        walk(0, y0, {(0, y0)}, [])
    return paths


def brute_force_crossing(config: WeightConfig, band_offset: int = 0,
                         paths: list[tuple[int, ...]] | None = None) -> float:
    """Exhaustive-minimum crossing time; independent oracle for ``crossing_time``."""
    if paths is None:
        paths = enumerate_crossing_paths(config.grid, band_offset)
    w = config.weights()
    return min(float(w[list(p)].sum()) for p in paths)
