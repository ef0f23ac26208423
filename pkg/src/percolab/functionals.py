"""Boolean observables: a real statistic paired with a threshold.

A functional evaluates to 1 iff its statistic exceeds the threshold strictly.
Crossing-type statistics are monotone nonincreasing in the bits (bit 1 means
the cheap weight a), so the induced Boolean function is monotone.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .grid import GridSpec, ParameterError, WeightConfig, config_from_bits, flip_edge

RECT_CROSSING = "rect_crossing"
TAU = "tau"
TAU_STAR = "tau_star"
TRIBES = "tribes"

_KINDS = (RECT_CROSSING, TAU, TAU_STAR, TRIBES)


@dataclass(frozen=True)
class Functional:
    """Named observable 1{statistic > threshold}."""

    kind: str
    threshold: float
    grid: GridSpec | None = None
    tribes_spec: "object | None" = None  # TribesSpec; typed loosely to avoid a cycle
    band_offset: int = 0

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ParameterError(f"unknown functional kind {self.kind!r}")
        if self.kind == TRIBES:
            if self.tribes_spec is None:
                raise ParameterError("tribes functional requires tribes_spec")
        elif self.grid is None:
            raise ParameterError(f"{self.kind} functional requires grid")

    @property
    def n_bits(self) -> int:
        if self.kind == TRIBES:
            return self.tribes_spec.n
        return self.grid.edge_count

    @property
    def monotone(self) -> bool:
        return True

    def statistic(self, bits: np.ndarray) -> float:
        """Real statistic on a raw bit vector."""
        bits = np.ascontiguousarray(bits, dtype=np.uint8)
        if self.kind == TRIBES:
            from .tribes import tribes_value

            return float(tribes_value(bits, self.tribes_spec))
        g = self.grid
        if self.kind == RECT_CROSSING:
            return kernels.band_value(bits, g.n, g.k, self.band_offset, g.a, g.b)
        t, _, s, _ = kernels.tau_values(bits, g.n, g.k, g.a, g.b)
        return t if self.kind == TAU else s

    def __call__(self, bits: np.ndarray) -> int:
        return int(self.statistic(bits) > self.threshold)

    def eval_config(self, config: WeightConfig) -> int:
        return self(config.bits)


def is_pivotal(config: WeightConfig, edge: int, f) -> bool:
    """Whether flipping ``edge`` changes the outcome; flip-symmetric by construction."""
    return f(config.bits) != f(flip_edge(config, edge).bits)
