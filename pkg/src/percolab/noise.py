"""Noise operator, influence estimation, BKS statistic, and exact small-instance oracles.

Monte Carlo estimators draw each sample from its own substream, so results do
not depend on scheduling.  The exact oracles enumerate all 2^E configurations
(capped at E <= 20) and evaluate the noise covariance through the
Fourier-Walsh transform.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import ParameterError
from .rng import substream


class CapacityError(ValueError):
    """Exact oracle asked for more bits than the 2^E enumeration cap allows."""


_MAX_ORACLE_BITS = 20


@dataclass(frozen=True)
class NoiseEstimate:
    epsilon: float
    covariance: float
    stderr: float
    samples: int
    batches: int


def resample(bits: np.ndarray, epsilon: float, rng: np.random.Generator,
             p_a: float = 0.5) -> np.ndarray:
    """Independently replace each bit by a fresh Bernoulli(p_a) bit with probability epsilon."""
    if not 0.0 <= epsilon <= 1.0:
        raise ParameterError(f"epsilon must lie in [0,1], got {epsilon}")
    if epsilon == 0.0:
        return bits.copy()
    mask = rng.random(bits.shape[0]) < epsilon
    if p_a == 0.5:
        fresh = rng.integers(0, 2, size=bits.shape[0], dtype=np.uint8)
    else:
        fresh = (rng.random(bits.shape[0]) < p_a).astype(np.uint8)
    out = bits.copy()
    out[mask] = fresh[mask]
    return out


def _sample_bits(rng: np.random.Generator, n: int, p_a: float) -> np.ndarray:
    if p_a == 0.5:
        return rng.integers(0, 2, size=n, dtype=np.uint8)
    return (rng.random(n) < p_a).astype(np.uint8)


def batch_means(values: np.ndarray, n_batches: int = 32) -> tuple[float, float]:
    """(mean, stderr) of the sample mean via batch means."""
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    if n < n_batches:
        n_batches = max(2, n)
    usable = (n // n_batches) * n_batches
    b = values[:usable].reshape(n_batches, -1).mean(axis=1)
    return float(values.mean()), float(b.std(ddof=1) / np.sqrt(n_batches))


def estimate_noise_covariance(f, epsilon: float, samples: int, seed: int,
                              p_a: float = 0.5, n_batches: int = 32) -> NoiseEstimate:
    """Plug-in estimate of E[f(w)f(w^eps)] - E[f(w)] E[f(w^eps)] from paired samples."""
    if samples < 2:
        raise ParameterError(f"need at least 2 samples, got {samples}")
    prod = np.empty(samples)
    val0 = np.empty(samples)
    val1 = np.empty(samples)
    n = f.n_bits
    for i in range(samples):
        rng = substream(seed, i)
        w = _sample_bits(rng, n, p_a)
        w_eps = resample(w, epsilon, rng, p_a)
        y0 = f(w)
        y1 = f(w_eps)
        val0[i] = y0
        val1[i] = y1
        prod[i] = y0 * y1
    # batch-means stderr of the covariance: per-batch plug-in estimates
    nb = n_batches if samples >= n_batches else max(2, samples)
    usable = (samples // nb) * nb
    p = prod[:usable].reshape(nb, -1)
    a = val0[:usable].reshape(nb, -1)
    b = val1[:usable].reshape(nb, -1)
    per_batch = p.mean(axis=1) - a.mean(axis=1) * b.mean(axis=1)
    cov = float(prod.mean() - val0.mean() * val1.mean())
    stderr = float(per_batch.std(ddof=1) / np.sqrt(nb))
    return NoiseEstimate(epsilon, cov, stderr, samples, nb)


def estimate_influence(f, edge: int, samples: int, seed: int,
                       p_a: float = 0.5) -> tuple[float, float]:
    """Monte Carlo estimate of Inf_edge(f) = P(f(w) != f(sigma_edge w)), with stderr."""
    hits = 0
    n = f.n_bits
    for i in range(samples):
        rng = substream(seed, i)
        w = _sample_bits(rng, n, p_a)
        y0 = f(w)
        w[edge] ^= 1
        if f(w) != y0:
            hits += 1
    p = hits / samples
    return p, float(np.sqrt(p * (1 - p) / samples))


def truth_table(f) -> np.ndarray:
    """f evaluated on every bit vector in {0,1}^E, indexed by the integer whose
    bit e is coordinate e."""
    n = f.n_bits
    if n > _MAX_ORACLE_BITS:
        raise CapacityError(f"{n} bits exceeds the 2^E oracle cap of {_MAX_ORACLE_BITS}")
    size = 1 << n
    shifts = np.arange(n, dtype=np.uint32)
    table = np.empty(size, dtype=np.int8)
    for x in range(size):
        bits = ((x >> shifts) & 1).astype(np.uint8)
        table[x] = f(bits)
    return table


def exact_influences(f, table: np.ndarray | None = None) -> np.ndarray:
    """Exact influence of every bit by full enumeration; entries are dyadic."""
    if table is None:
        table = truth_table(f)
    n = f.n_bits
    idx = np.arange(table.shape[0])
    return np.array([np.mean(table != table[idx ^ (1 << e)]) for e in range(n)])


def walsh_coefficients(table: np.ndarray) -> np.ndarray:
    """Fourier-Walsh coefficients of a function on {0,1}^E under uniform measure."""
    coeff = table.astype(float).copy()
    size = coeff.shape[0]
    h = 1
    while h < size:
        coeff = coeff.reshape(-1, 2 * h)
        left = coeff[:, :h].copy()
        right = coeff[:, h:].copy()
        coeff[:, :h] = left + right
        coeff[:, h:] = left - right
        coeff = coeff.reshape(-1)
        h *= 2
    return coeff / size


def walsh_noise_covariance(f, epsilon: float, table: np.ndarray | None = None) -> float:
    """Exact Cov(f(w), f(w^eps)) = sum_{S != 0} fhat(S)^2 (1-eps)^|S| (uniform bits)."""
    if not 0.0 <= epsilon <= 1.0:
        raise ParameterError(f"epsilon must lie in [0,1], got {epsilon}")
    if table is None:
        table = truth_table(f)
    coeff = walsh_coefficients(table)
    size = coeff.shape[0]
    pop = np.zeros(size, dtype=np.int64)
    h = 1
    while h < size:
        pop[h:2 * h] = pop[:h] + 1
        h *= 2
    rho = 1.0 - epsilon
    mask = np.arange(size) != 0
    return float(np.sum(coeff[mask] ** 2 * rho ** pop[mask]))


def bks_statistic(influences: np.ndarray) -> float:
    """Sum of squared influences."""
    iv = np.asarray(influences, dtype=float)
    return float(np.sum(iv * iv))
