"""Polynomial Tribes: exact distribution, influences, and closed-form quantile predictors.

The statistic is the maximal popcount over floor(n / floor(n^lambda)) disjoint
blocks of length floor(n^lambda); leftover bits are debris and are ignored.
Binomial quantities are computed exactly in log space by outward summation
with compensated accumulation, accurate to ~1e-12 relative for n up to 1e7.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import GridSpec, ParameterError, WeightConfig


class DomainError(ValueError):
    """A closed-form predictor was evaluated outside its domain (negative radicand)."""


_FLOOR_GUARD = 1e-9


def _power_floor(n: int, exponent: float) -> int:
    """floor(n**exponent) with a guard against floating-point undershoot at
    exact integer powers (e.g. (10**6)**(1/3))."""
    return int(math.floor(n ** exponent + _FLOOR_GUARD))


@dataclass(frozen=True)
class TribesSpec:
    """n bits split into tribes of length ell = floor(n^lambda)."""

    n: int
    lam: float

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ParameterError(f"n must be >= 1, got {self.n}")
        if not 0.0 < self.lam < 1.0:
            raise ParameterError(f"lambda must lie in (0,1), got {self.lam}")

    @property
    def ell(self) -> int:
        return _power_floor(self.n, self.lam)

    @property
    def m(self) -> int:
        return self.n // self.ell

    @property
    def debris(self) -> int:
        return self.n - self.m * self.ell


def tribes_value(bits: np.ndarray, spec: TribesSpec) -> int:
    """Maximal number of 1s in any tribe; debris bits ignored."""
    ell, m = spec.ell, spec.m
    bits = np.asarray(bits)
    if bits.shape[0] < m * ell:
        raise ParameterError(
            f"bit vector of length {bits.shape[0]} shorter than {m * ell}"
        )
    return int(bits[: m * ell].reshape(m, ell).sum(axis=1).max())


# ---------------------------------------------------------------------------
# Exact binomial arithmetic (p = 1/2), log space
# ---------------------------------------------------------------------------

def _log_central_pmf(n: int) -> float:
    """log P(X_n = floor(n/2)), accurate to ~1e-15 absolute for large n.

    Differencing lgamma values of size ~n log n loses ~9 digits at n = 1e7,
    so the Stirling series for log C(2m, m) - 2m log 2 is applied with the
    large terms cancelled analytically.
    """
    m = n // 2
    if n % 2 == 1:
        # pmf(2m+1, m) = pmf(2m, m) * (2m+1) / (2m+2)
        return _log_central_pmf(2 * m) + math.log((2 * m + 1) / (2 * m + 2))
    if m == 0:
        return 0.0
    if m < 500:
        return (
            math.lgamma(n + 1) - 2 * math.lgamma(m + 1) - n * math.log(2.0)
        )
    return (
        -0.5 * math.log(math.pi * m)
        - 1.0 / (8 * m)
        + 1.0 / (192 * m**3)
        - 1.0 / (640 * m**5)
    )


def binomial_logpmf(n: int, s: int) -> float:
    """log P(X_n = s) for X_n ~ Bin(n, 1/2); -inf outside {0..n}.

    Near the mode the value is anchored at the central coefficient and reached
    by a pairwise-summed log-ratio walk, which keeps full relative accuracy at
    n up to 1e7 where direct lgamma differencing would lose ~9 digits.
    """
    if s < 0 or s > n:
        return -math.inf
    s_hi = max(s, n - s)  # pmf is symmetric about n/2
    mode = n // 2 if n % 2 == 0 else (n - 1) // 2
    if n < 1000 or s_hi - mode > 200_000:
        return (
            math.lgamma(n + 1) - math.lgamma(s + 1) - math.lgamma(n - s + 1)
            - n * math.log(2.0)
        )
    j = np.arange(mode, s_hi)
    walk = float(np.sum(np.log((n - j) / (j + 1.0))))
    return _log_central_pmf(n) + walk


def _upper_sum(n: int, j0: int) -> float:
    """log sum_{j=j0}^{n} pmf(j) for j0 > n/2 (terms decay away from the mode).

    Ratio recurrence from the leading term with Kahan-compensated accumulation.
    """
    log_lead = binomial_logpmf(n, j0)
    total = 1.0
    comp = 0.0
    term = 1.0
    j = j0
    while j < n:
        term *= (n - j) / (j + 1)
        j += 1
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if term < 1e-17 * total:
            break
    return log_lead + math.log(total)


def binomial_logsf(n: int, t: float) -> float:
    """log P(X_n >= t), exact.  Thresholds below the mode go through the
    complement so the summed series is always decreasing."""
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    j0 = math.ceil(t)
    if j0 <= 0:
        return 0.0
    if j0 > n:
        return -math.inf
    if j0 > n / 2:
        return _upper_sum(n, j0)
    # P(X >= j0) = 1 - P(X <= j0 - 1) = 1 - P(X >= n - j0 + 1) by symmetry
    lower = math.exp(_upper_sum(n, n - j0 + 1))
    return math.log1p(-lower)


def binomial_sf(n: int, t: float) -> float:
    """P(X_n >= t), exact."""
    return math.exp(binomial_logsf(n, t))


def binomial_logcdf(n: int, s: float) -> float:
    """log P(X_n <= s), exact (symmetry: equals P(X_n >= n - floor(s)))."""
    return binomial_logsf(n, n - math.floor(s))


def binomial_pmf(n: int, s: int) -> float:
    return math.exp(binomial_logpmf(n, s))


def binomial_tail_asymptotic(n: int, x: float) -> float:
    """Leading-order tail P(X_n >= n/2 + x sqrt(n)/2) ~ exp(-x^2/2)/(x sqrt(2 pi))."""
    if x <= 0:
        raise ParameterError(f"x must be positive, got {x}")
    return math.exp(-x * x / 2) / (x * math.sqrt(2 * math.pi))


def binomial_pmf_asymptotic(n: int, x: float) -> float:
    """Leading-order point mass at floor(n/2 + x sqrt(n)/2)."""
    if x <= 0:
        raise ParameterError(f"x must be positive, got {x}")
    return math.sqrt(2.0 / (math.pi * n)) * math.exp(-x * x / 2)


# ---------------------------------------------------------------------------
# Tribes distribution and influences
# ---------------------------------------------------------------------------

def tribes_logcdf(spec: TribesSpec, s: float) -> float:
    """log P(S <= s) = m * log P(X_ell <= s)."""
    if s < 0:
        return -math.inf
    if s >= spec.ell:
        return 0.0
    return spec.m * binomial_logcdf(spec.ell, s)


def tribes_cdf_exact(spec: TribesSpec, s: float) -> float:
    """P(S <= s), exact via independence across tribes."""
    return math.exp(tribes_logcdf(spec, s))


def tribes_quantile_exact(spec: TribesSpec, beta: float) -> int:
    """Left-continuous integer quantile inf{s in Z : P(S <= s) >= beta}."""
    if not 0.0 < beta < 1.0:
        raise ParameterError(f"beta must lie in (0,1), got {beta}")
    lo, hi = 0, spec.ell
    while lo < hi:
        mid = (lo + hi) // 2
        if tribes_cdf_exact(spec, mid) >= beta:
            hi = mid
        else:
            lo = mid + 1
    return lo


def tribes_influence_exact(spec: TribesSpec, q: float) -> float:
    """Exact influence of any in-tribe bit of 1{S > q}; debris bits have influence 0.

    Pivotality needs exactly floor(q) ones among the tribe's other ell-1 bits
    and every other tribe at popcount <= q.
    """
    ell, m = spec.ell, spec.m
    if q >= ell:
        return 0.0
    fq = math.floor(q)
    if fq < 0 or fq > ell - 1:
        return 0.0
    log_inf = binomial_logpmf(ell - 1, fq) + (m - 1) * binomial_logcdf(ell, q)
    return math.exp(log_inf)


def tribes_influence_vector(spec: TribesSpec, q: float) -> np.ndarray:
    """Per-bit influences: uniform over in-tribe bits, zero on debris."""
    inf = tribes_influence_exact(spec, q)
    out = np.zeros(spec.n)
    out[: spec.m * spec.ell] = inf
    return out


def tribes_bks_exact(spec: TribesSpec, q: float) -> float:
    """Exact sum of squared influences of 1{S > q}."""
    inf = tribes_influence_exact(spec, q)
    return spec.m * spec.ell * inf * inf


def s_quantile_predictor(n: int, lam: float, beta: float) -> float:
    """Closed-form quantile predictor for the tribes maximum.

    s = ell/2 + (sqrt(ell)/2) * sqrt(2(1-lam) log n - log log n
        - 2 log(sqrt(4 pi (1-lam)) * log(1/beta))).
    Raises DomainError when the radicand is nonpositive; never clamps.
    """
    if not 0.0 < lam < 1.0:
        raise ParameterError(f"lambda must lie in (0,1), got {lam}")
    if not 0.0 < beta < 1.0:
        raise ParameterError(f"beta must lie in (0,1), got {beta}")
    ell = _power_floor(n, lam)
    radicand = (
        2 * (1 - lam) * math.log(n)
        - math.log(math.log(n))
        - 2 * math.log(math.sqrt(4 * math.pi * (1 - lam)) * math.log(1 / beta))
    )
    if radicand <= 0:
        raise DomainError(
            f"nonpositive radicand {radicand:.6g} for n={n}, lambda={lam}, beta={beta}"
        )
    return ell / 2 + math.sqrt(ell) / 2 * math.sqrt(radicand)


# ---------------------------------------------------------------------------
# k=1 first-passage correspondence
# ---------------------------------------------------------------------------

def row_tribes_bits(config: WeightConfig) -> np.ndarray:
    """Row-major horizontal-edge bits of a square grid, read as m tribes of length m."""
    return np.asarray(config.bits[: config.grid.horizontal_count])


def tau_tribes_identity_check(config: WeightConfig) -> bool:
    """tau(m,1) == a*S + b*(m-S) where S is the tribes maximum over the rows."""
    from . import kernels

    g = config.grid
    spec = TribesSpec(g.n * g.n, 0.5)
    s = tribes_value(row_tribes_bits(config), spec)
    t, _, _, _ = kernels.tau_values(config.bits, g.n, 1, g.a, g.b)
    return math.isclose(t, g.a * s + g.b * (g.n - s), rel_tol=0.0, abs_tol=1e-9)
