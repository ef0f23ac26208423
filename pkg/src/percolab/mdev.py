"""Gaussian-tail and quantile predictors plus numerical verification harnesses.

Covers the extreme-value quantile predictors for minima of independent band
crossings, the Cramer-type triangular-array tail check, cumulant-generating-
function regularity for two-point laws, the chunked sandwich bound, and the
variance / moment / anti-concentration experiments for crossing times.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from . import kernels
from .grid import GridSpec, ParameterError, WeightConfig
from .rng import substream
from .tribes import DomainError


def gaussian_tail(x: float) -> float:
    """1 - Phi(x), evaluated through erfc to avoid cancellation in the far tail."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def gaussian_density(x: float) -> float:
    return math.exp(-x * x / 2) / math.sqrt(2 * math.pi)


def mills_ratio(x: float) -> float:
    """phi(x) / (1 - Phi(x)); asymptotically x for large x."""
    return gaussian_density(x) / gaussian_tail(x)


def d_value(ell: int, beta: float) -> float:
    """d = sqrt(2 log ell - log(2 log ell) - 2 log(sqrt(2 pi) log(1/beta)))."""
    if ell < 3:
        raise ParameterError(f"need ell >= 3, got {ell}")
    if not 0.0 < beta < 1.0:
        raise ParameterError(f"beta must lie in (0,1), got {beta}")
    radicand = (
        2 * math.log(ell)
        - math.log(2 * math.log(ell))
        - 2 * math.log(math.sqrt(2 * math.pi) * math.log(1 / beta))
    )
    if radicand <= 0:
        raise DomainError(f"nonpositive radicand {radicand:.6g} for ell={ell}, beta={beta}")
    return math.sqrt(radicand)


@dataclass(frozen=True)
class QuantilePrediction:
    beta: float
    ell: int
    mean: float
    sd: float
    d: float
    u_beta: float
    u_bar_beta: float


def predict_quantiles(mean: float, sd: float, ell: int, beta: float,
                      n: int | None = None) -> QuantilePrediction:
    """Both closed-form quantile predictors for the minimum of band crossings.

    u_beta  = mean - d(ell, 1 - beta) * sd   (minimum of ell independent copies)
    u_bar   = mean - sd * sqrt(2 log n - log(2 log n) - 2 log(sqrt(2 pi) beta))
    ``n`` defaults to ``ell`` (exact for k = 1, where ell = n).
    """
    if n is None:
        n = ell
    d = d_value(ell, 1.0 - beta)
    bar_rad = (
        2 * math.log(n)
        - math.log(2 * math.log(n))
        - 2 * math.log(math.sqrt(2 * math.pi) * beta)
    )
    if bar_rad <= 0:
        raise DomainError(f"nonpositive radicand {bar_rad:.6g} for n={n}, beta={beta}")
    u = mean - d * sd
    u_bar = mean - sd * math.sqrt(bar_rad)
    return QuantilePrediction(beta, ell, mean, sd, d, u, u_bar)


def empirical_quantile(values: np.ndarray, beta: float) -> float:
    """ceil(beta * N)-th order statistic (left-continuous sample quantile)."""
    if not 0.0 < beta < 1.0:
        raise ParameterError(f"beta must lie in (0,1), got {beta}")
    v = np.sort(np.asarray(values, dtype=float))
    if v.shape[0] < 1:
        raise ParameterError("need at least one sample")
    idx = math.ceil(beta * v.shape[0]) - 1
    return float(v[max(idx, 0)])


# ---------------------------------------------------------------------------
# Cramer-type triangular-array check
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TwoPointLaw:
    """P(X = hi) = p, P(X = lo) = 1 - p, shifted to mean zero by construction check."""

    hi: float
    lo: float
    p: float

    def __post_init__(self) -> None:
        if not 0.0 < self.p < 1.0:
            raise ParameterError(f"p must lie in (0,1), got {self.p}")

    @property
    def mean(self) -> float:
        return self.p * self.hi + (1 - self.p) * self.lo

    @property
    def variance(self) -> float:
        mu = self.mean
        return self.p * (self.hi - mu) ** 2 + (1 - self.p) * (self.lo - mu) ** 2

    @property
    def third_central_moment(self) -> float:
        mu = self.mean
        return self.p * (self.hi - mu) ** 3 + (1 - self.p) * (self.lo - mu) ** 3


@dataclass(frozen=True)
class ArraySpec:
    """A triangular-array row: groups of i.i.d. two-point variables.

    ``groups`` maps a law to its multiplicity; the row has m = sum(counts)
    independent variables.  sigma must come out >= 1.
    """

    groups: tuple[tuple[TwoPointLaw, int], ...]

    @property
    def m(self) -> int:
        return sum(c for _, c in self.groups)

    @property
    def sigma(self) -> float:
        var = sum(law.variance * c for law, c in self.groups) / self.m
        return math.sqrt(var)

    def __post_init__(self) -> None:
        if self.sigma < 1.0:
            raise ParameterError(f"sigma_m = {self.sigma:.4g} < 1; rescale the laws")


@dataclass
class TailRatioRow:
    x: float
    ratio: float
    stderr: float
    tail_count: int
    reliable: bool


def md_array_check(spec: ArraySpec, x_grid, replications: int, seed: int,
                   batch: int = 10 ** 6) -> list[TailRatioRow]:
    """Empirical tail of the normalised row sum against the Gaussian tail.

    Each group's contribution is simulated with a single binomial draw per
    replication, so two-point rows of any size are cheap.  x below 0.5 is
    rejected (outside the moderate-deviation window).
    """
    x_grid = [float(x) for x in x_grid]
    if any(x < 0.5 for x in x_grid):
        raise ParameterError("x grid must satisfy x >= 0.5")
    scale = spec.sigma * math.sqrt(spec.m)
    shift = sum((law.mean * c) for law, c in spec.groups)
    counts = np.zeros(len(x_grid), dtype=np.int64)
    done = 0
    block = 0
    while done < replications:
        nrep = min(batch, replications - done)
        rng = substream(seed, block)
        total = np.zeros(nrep)
        for law, c in spec.groups:
            k = rng.binomial(c, law.p, size=nrep)
            total += k * law.hi + (c - k) * law.lo
        z = (total - shift) / scale
        for j, x in enumerate(x_grid):
            counts[j] += int(np.sum(z >= x))
        done += nrep
        block += 1
    rows = []
    for j, x in enumerate(x_grid):
        p = counts[j] / replications
        g = gaussian_tail(x)
        se = math.sqrt(p * (1 - p) / replications)
        rows.append(TailRatioRow(x, p / g, se / g, int(counts[j]), counts[j] >= 100))
    return rows


def binomial_row_tail_ratio(m: int, x: float) -> float:
    """Exact tail / Gaussian tail for the centred +/-1 coin row (no sampling)."""
    from .tribes import binomial_sf

    # sum of m coins at +/-1 is 2 X - m with X ~ Bin(m, 1/2); sigma = 1
    threshold = (m + x * math.sqrt(m)) / 2.0
    return binomial_sf(m, threshold) / gaussian_tail(x)


# ---------------------------------------------------------------------------
# Cumulant generating function regularity (two-point laws, closed form)
# ---------------------------------------------------------------------------

@dataclass
class CgfResiduals:
    max_r4: float
    max_r3: float
    max_r2: float
    accepted_s: list[float] = field(default_factory=list)
    rejected_s: list[float] = field(default_factory=list)


def minimal_gamma(law: TwoPointLaw, delta: float = 0.0, j_max: int = 40) -> float:
    """Smallest gamma (within 1e-6) satisfying E|X|^j <= j! gamma^{(1+delta)j}
    for centred X, checked for j <= j_max; the geometric tail is controlled by
    |X| <= max(|hi-mu|, |lo-mu|) analytically."""
    mu = law.mean
    bound = max(abs(law.hi - mu), abs(law.lo - mu))

    def ok(gamma: float) -> bool:
        g = gamma ** (1 + delta)
        if g <= 0:
            return False
        for j in range(2, j_max + 1):
            mj = law.p * abs(law.hi - mu) ** j + (1 - law.p) * abs(law.lo - mu) ** j
            if math.log(mj) > math.lgamma(j + 1) + j * math.log(g):
                return False
        # beyond j_max: E|X|^j <= bound^j and j! >= (j/e)^j, so g >= e*bound/j suffices
        return g * (j_max + 1) >= math.e * bound
    lo, hi = 1e-9, max(bound, 1.0) * 2
    while not ok(hi):
        hi *= 2
    for _ in range(60):
        mid = (lo + hi) / 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def cgf_expansion_check(law: TwoPointLaw, s_grid, delta: float = 0.0,
                        precision: int = 50) -> CgfResiduals:
    """Normalised residuals of the cubic expansion of the cumulant generating
    function of the centred law, evaluated in high precision.

    Points outside |s| <= 1/(2 gamma^{1+delta}) are rejected, not failed.
    """
    gamma = minimal_gamma(law, delta)
    radius = 1.0 / (2.0 * gamma ** (1 + delta))
    mu = law.mean
    var = law.variance
    mu3 = law.third_central_moment
    res = CgfResiduals(0.0, 0.0, 0.0)
    with mpmath.workdps(precision):
        hi = mpmath.mpf(law.hi) - mpmath.mpf(mu)
        lo = mpmath.mpf(law.lo) - mpmath.mpf(mu)
        p = mpmath.mpf(law.p)
        for s_raw in s_grid:
            s = mpmath.mpf(float(s_raw))
            if abs(float(s_raw)) > radius or s_raw == 0:
                res.rejected_s.append(float(s_raw))
                continue
            f = p * mpmath.exp(s * hi) + (1 - p) * mpmath.exp(s * lo)
            fp = p * hi * mpmath.exp(s * hi) + (1 - p) * lo * mpmath.exp(s * lo)
            fpp = p * hi * hi * mpmath.exp(s * hi) + (1 - p) * lo * lo * mpmath.exp(s * lo)
            psi = mpmath.log(f)
            psi1 = fp / f
            psi2 = (fpp * f - fp * fp) / (f * f)
            r4 = abs(psi - var * s ** 2 / 2 - mu3 * s ** 3 / 6) / abs(s) ** 4
            r3 = abs(psi1 - var * s - mu3 * s ** 2 / 2) / abs(s) ** 3
            r2 = abs(psi2 - var - mu3 * s) / abs(s) ** 2
            res.max_r4 = max(res.max_r4, float(r4))
            res.max_r3 = max(res.max_r3, float(r3))
            res.max_r2 = max(res.max_r2, float(r2))
            res.accepted_s.append(float(s_raw))
    return res


def logcosh_r4(s: float, precision: int = 50) -> float:
    """|log cosh s - s^2/2| / s^4 for the symmetric +/-1 law; tends to 1/12."""
    with mpmath.workdps(precision):
        v = abs(mpmath.log(mpmath.cosh(mpmath.mpf(s))) - mpmath.mpf(s) ** 2 / 2)
        return float(v / mpmath.mpf(s) ** 4)


# ---------------------------------------------------------------------------
# Chunk sandwich, variance scaling, moments, anti-concentration, tail ratios
# ---------------------------------------------------------------------------

def chunk_intervals(n: int, gamma: float) -> list[tuple[int, int]]:
    """Partition of [0,n] into floor(n^{1-gamma}) intervals of near-equal length."""
    if not 0.5 < gamma <= 1.0:
        raise ParameterError(f"gamma must lie in (1/2, 1], got {gamma}")
    m = max(1, int(math.floor(n ** (1.0 - gamma) + 1e-9)))
    base = n // m
    extra = n - base * m
    out = []
    left = 0
    for i in range(m):
        length = base + (1 if i < extra else 0)
        out.append((left, left + length))
        left += length
    return out


def chunk_sandwich_check(config: WeightConfig, gamma: float = 2.0 / 3.0) -> bool:
    """Verify sum(Y_i) <= t(n,k) <= sum(Y_i) + b * m * k exactly.

    Y_i is the crossing time of the i-th column chunk of the bottom band.
    """
    g = config.grid
    intervals = chunk_intervals(g.n, gamma)
    m = len(intervals)
    total = 0.0
    for (x0, x1) in intervals:
        total += _chunk_value(config, x0, x1)
    t = kernels.band_value(config.bits, g.n, g.k, 0, g.a, g.b)
    slack = g.b * m * g.k
    return total <= t + 1e-9 and t <= total + slack + 1e-9


def _chunk_value(config: WeightConfig, x0: int, x1: int) -> float:
    """Left-right crossing time of [x0,x1] x [0, k-1] via a relabelled kernel call."""
    g = config.grid
    width = x1 - x0
    k = g.k
    sub = GridSpec(max(width, k), k, g.a, g.b)
    bits = np.ones(sub.edge_count, dtype=np.uint8)
    # horizontal edges of the chunk
    for y in range(k):
        for x in range(width):
            bits[sub.horizontal_index(x, y)] = config.bits[g.horizontal_index(x0 + x, y)]
    # vertical edges
    for y in range(k - 1):
        for x in range(width + 1):
            bits[sub.vertical_index(x, y)] = config.bits[g.vertical_index(x0 + x, y)]
    # if the relabelled grid is wider than the chunk (width < k), wall off the rest
    if sub.n > width:
        for y in range(k):
            for x in range(width, sub.n):
                bits[sub.horizontal_index(x, y)] = 1
        val = kernels.band_value(bits, sub.n, k, 0, g.a, g.b)
        return val - (sub.n - width) * g.a
    return kernels.band_value(bits, sub.n, k, 0, g.a, g.b)


@dataclass
class VarianceScaling:
    n_grid: list[int]
    variances: list[float]
    stderrs: list[float]
    slope: float


def sample_band_values(n: int, k: int, a: float, b: float, band_offset: int,
                       samples: int, seed: int, p_a: float = 0.5) -> np.ndarray:
    """Monte Carlo sample of t(n,k) at a fixed band, one substream per sample."""
    grid = GridSpec(n, k, a, b)
    out = np.empty(samples)
    for i in range(samples):
        rng = substream(seed, i)
        bits = rng.integers(0, 2, size=grid.edge_count, dtype=np.uint8) if p_a == 0.5 \
            else (rng.random(grid.edge_count) < p_a).astype(np.uint8)
        out[i] = kernels.band_value(bits, n, k, band_offset, a, b)
    return out


def jackknife_variance_stderr(values: np.ndarray, n_blocks: int = 32) -> float:
    """Delete-block jackknife stderr of the sample variance."""
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    usable = (n // n_blocks) * n_blocks
    blocks = values[:usable].reshape(n_blocks, -1)
    full = values[:usable]
    estimates = []
    for i in range(n_blocks):
        rest = np.delete(blocks, i, axis=0).ravel()
        estimates.append(rest.var(ddof=1))
    estimates = np.array(estimates)
    return float(math.sqrt((n_blocks - 1) / n_blocks * np.sum((estimates - estimates.mean()) ** 2)))


def variance_scaling_experiment(k: int, n_grid, samples: int, seed: int,
                                a: float = 1.0, b: float = 2.0) -> VarianceScaling:
    """Least-squares slope of log Var(t(n,k)) against log n."""
    if samples < 10 ** 3:
        raise ParameterError(f"need >= 1000 samples per n, got {samples}")
    variances, stderrs = [], []
    for idx, n in enumerate(n_grid):
        vals = sample_band_values(n, k, a, b, 0, samples, seed + idx)
        variances.append(float(vals.var(ddof=1)))
        stderrs.append(jackknife_variance_stderr(vals))
    slope = float(np.polyfit(np.log(n_grid), np.log(variances), 1)[0])
    return VarianceScaling(list(n_grid), variances, stderrs, slope)


def moment_growth_check(n: int, k: int, samples: int, seed: int,
                        js=(2, 4, 6), a: float = 1.0, b: float = 2.0) -> dict:
    """Normalised central moments E|t - mean|^j / n^{j/2} of t(n,k)."""
    if k > math.isqrt(n) + 1 and k * k > n:
        raise ParameterError(f"need k <= sqrt(n), got k={k}, n={n}")
    vals = sample_band_values(n, k, a, b, 0, samples, seed)
    centred = vals - vals.mean()
    return {j: float(np.mean(np.abs(centred) ** j) / n ** (j / 2)) for j in js}


def anticoncentration_scan(values: np.ndarray, c: float, a: float, n: int,
                           spacing: float) -> float:
    """Max over window starts of the empirical mass of [x, x + c].

    Windows are aligned to the lattice of achievable values {n*a + j*spacing};
    the scan is exact on that lattice.
    """
    if c <= 0:
        raise ParameterError(f"window width must be positive, got {c}")
    values = np.asarray(values, dtype=float)
    j = np.rint((values - n * a) / spacing).astype(np.int64)
    width = int(math.floor(c / spacing + 1e-9)) + 1  # atoms covered by [x, x+c]
    lo, hi = int(j.min()), int(j.max())
    hist = np.bincount(j - lo, minlength=hi - lo + 1)
    if width >= hist.shape[0]:
        return 1.0
    csum = np.concatenate([[0], np.cumsum(hist)])
    window = csum[width:] - csum[:-width]
    return float(window.max() / values.shape[0])


@dataclass
class TailCheckResult:
    mean: float
    sd: float
    rows_lower: list[TailRatioRow]
    rows_upper: list[TailRatioRow]


def mdfpp_tail_check(n: int, k: int, x_grid, samples: int, seed: int,
                     calibration_samples: int | None = None,
                     calibration_seed: int | None = None,
                     a: float = 1.0, b: float = 2.0) -> TailCheckResult:
    """Standardised lower/upper tail ratios of t(n,k) against 1 - Phi(x).

    Standardisation uses an independent calibration run, preventing selection
    bias in the ratio.
    """
    x_grid = [float(x) for x in x_grid]
    if any(x < 0.5 for x in x_grid):
        raise ParameterError("x grid must satisfy x >= 0.5")
    if calibration_samples is None:
        calibration_samples = samples
    if calibration_seed is None:
        calibration_seed = seed + 10 ** 9 + 7
    calib = sample_band_values(n, k, a, b, 0, calibration_samples, calibration_seed)
    mean, sd = float(calib.mean()), float(calib.std(ddof=1))
    vals = sample_band_values(n, k, a, b, 0, samples, seed)
    z = (vals - mean) / sd
    rows_lower, rows_upper = [], []
    for x in x_grid:
        g = gaussian_tail(x)
        for rows, count in ((rows_lower, int(np.sum(z < -x))),
                            (rows_upper, int(np.sum(z > x)))):
            p = count / samples
            se = math.sqrt(p * (1 - p) / samples)
            rows.append(TailRatioRow(x, p / g, se / g, count, count >= 100))
    return TailCheckResult(mean, sd, rows_lower, rows_upper)
