"""Grid geometry, canonical edge enumeration, and two-point weight configurations.

The grid graph lives on the vertex set {0..n} x {0..n-1}.  Edges are indexed
densely: first all horizontal edges in row-major (y, x) order, then all
vertical edges in (y, x) order.  A configuration assigns weight ``a`` (bit 1)
or ``b`` (bit 0) to every edge.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import substream

HORIZONTAL = 0
VERTICAL = 1


class ParameterError(ValueError):
    """Invalid geometry or probability parameter."""


def edge_count(n: int) -> int:
    """Number of edges of the grid graph on {0..n} x {0..n-1} (equals 2n^2 - 1)."""
    return n * n + (n + 1) * (n - 1)


@dataclass(frozen=True)
class GridSpec:
    """Geometry of the square [0,n] x [0,n-1] with band height k and weights a < b."""

    n: int
    k: int
    a: float = 1.0
    b: float = 2.0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ParameterError(f"n must be >= 1, got {self.n}")
        if not 1 <= self.k <= self.n:
            raise ParameterError(f"k must satisfy 1 <= k <= n, got k={self.k}, n={self.n}")
        if not 0 < self.a < self.b:
            raise ParameterError(f"weights must satisfy 0 < a < b, got a={self.a}, b={self.b}")

    @property
    def edge_count(self) -> int:
        return edge_count(self.n)

    @property
    def horizontal_count(self) -> int:
        return self.n * self.n

    def horizontal_index(self, x: int, y: int) -> int:
        """Index of the edge (x,y)-(x+1,y); 0 <= x < n, 0 <= y < n."""
        return y * self.n + x

    def vertical_index(self, x: int, y: int) -> int:
        """Index of the edge (x,y)-(x,y+1); 0 <= x <= n, 0 <= y < n-1."""
        return self.horizontal_count + y * (self.n + 1) + x

    def decode(self, index: int) -> tuple[int, int, int]:
        """Inverse of the enumeration: (orientation, x, y)."""
        if not 0 <= index < self.edge_count:
            raise ParameterError(f"edge index {index} out of range for n={self.n}")
        if index < self.horizontal_count:
            return HORIZONTAL, index % self.n, index // self.n
        rest = index - self.horizontal_count
        return VERTICAL, rest % (self.n + 1), rest // (self.n + 1)


@dataclass(frozen=True)
class WeightConfig:
    """Assignment of {a,b} weights to the grid edges; bit 1 means weight a."""

    grid: GridSpec
    bits: np.ndarray

    def __post_init__(self) -> None:
        if self.bits.shape != (self.grid.edge_count,):
            raise ParameterError(
                f"bit vector has length {self.bits.shape}, expected {self.grid.edge_count}"
            )
        self.bits.flags.writeable = False

    def weight(self, index: int) -> float:
        return self.grid.a if self.bits[index] else self.grid.b

    def weights(self) -> np.ndarray:
        """Dense array of edge weights."""
        return np.where(self.bits, self.grid.a, self.grid.b)


def sample_config(grid: GridSpec, p_a: float, master_seed: int, sample_index: int) -> WeightConfig:
    """Draw a configuration with i.i.d. bits, bit=1 with probability p_a.

    Deterministic given (master_seed, sample_index).
    """
    if not 0.0 <= p_a <= 1.0:
        raise ParameterError(f"p_a must lie in [0,1], got {p_a}")
    rng = substream(master_seed, sample_index)
    if p_a == 0.5:
        bits = rng.integers(0, 2, size=grid.edge_count, dtype=np.uint8)
    else:
        bits = (rng.random(grid.edge_count) < p_a).astype(np.uint8)
    return WeightConfig(grid, bits)


def flip_edge(config: WeightConfig, index: int) -> WeightConfig:
    """Configuration differing from ``config`` in exactly bit ``index``."""
    if not 0 <= index < config.grid.edge_count:
        raise ParameterError(f"edge index {index} out of range")
    bits = config.bits.copy()
    bits[index] ^= 1
    return WeightConfig(config.grid, bits)


def config_from_bits(grid: GridSpec, bits) -> WeightConfig:
    """Configuration from any 0/1 sequence of the right length."""
    arr = np.asarray(bits, dtype=np.uint8).copy()
    return WeightConfig(grid, arr)
