"""Seeded Monte Carlo simulation of displaced photon counting.

Random numbers come from Philox streams keyed by
``SeedSequence(seed, spawn_key=(stream, chunk))``: ``stream`` identifies the
detector setting inside a Bell experiment, ``chunk`` a fixed block of
``CHUNK`` trials.  Chunks are reduced in index order, so results do not
depend on the number of worker threads.

Single-detector no-count frequencies are taken from the same sample stream
as the joint frequency.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .bell import BellSettings
from .errors import TruncationError
from .fock import DEFAULT_TOL, JointCountDistribution, cutoff_autoselect, displaced_joint_distribution

CHUNK = 1 << 18


class DetectorModel(enum.Enum):
    NUMBER_RESOLVING = "number"
    BINARY_NO_COUNT = "binary"

    def outcome(self, m, n):
        """Per-event record: parity ``(-1)^(m+n)`` or the indicator pair ``(m==0, n==0)``."""
        m = np.asarray(m)
        n = np.asarray(n)
        if self is DetectorModel.NUMBER_RESOLVING:
            return 1 - 2 * ((m + n) % 2)
        return (m == 0).astype(np.int8), (n == 0).astype(np.int8)


@dataclass(frozen=True)
class EstimateWithError:
    value: float
    std_error: float
    n_trials: int
    seed: int


def _check(dist: JointCountDistribution, n_trials: int, seed: int, tol: float):
    if n_trials <= 0:
        raise ValueError(f"n_trials must be positive, got {n_trials}")
    if seed < 0 or seed >= 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    if dist.deficit > tol:
        raise TruncationError(f"distribution mass deficit {dist.deficit:.3g} exceeds {tol:g}")


def _cdf(dist: JointCountDistribution) -> np.ndarray:
    cdf = np.cumsum(dist.p.ravel())
    cdf /= cdf[-1]
    return cdf


def _chunks(n_trials: int):
    return [(c, min(CHUNK, n_trials - c * CHUNK)) for c in range(-(-n_trials // CHUNK))]


def _uniforms(seed: int, stream: int, chunk: int, size: int) -> np.ndarray:
    ss = np.random.SeedSequence(seed, spawn_key=(stream, chunk))
    return np.random.Generator(np.random.Philox(ss)).random(size)


def _map_chunks(fn, n_trials, workers):
    chunks = _chunks(n_trials)
    if workers <= 1 or len(chunks) == 1:
        return [fn(c, size) for c, size in chunks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda cs: fn(*cs), chunks))


def sample_outcomes(dist, n_trials: int, seed: int, *, stream: int = 0, workers: int = 1, tol: float = DEFAULT_TOL):
    """Draw ``n_trials`` i.i.d. ``(m, n)`` outcomes by inverse CDF over row-major cells."""
    _check(dist, n_trials, seed, tol)
    cdf = _cdf(dist)
    parts = _map_chunks(lambda c, size: kernels.lookup_cells(cdf, _uniforms(seed, stream, c, size)), n_trials, workers)
    idx = np.concatenate(parts)
    return np.divmod(idx, dist.cutoff + 1)


def cell_counts(dist, n_trials: int, seed: int, *, stream: int = 0, workers: int = 1, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Histogram of :func:`sample_outcomes` without materialising the stream."""
    _check(dist, n_trials, seed, tol)
    cdf = _cdf(dist)
    parts = _map_chunks(lambda c, size: kernels.tally_cells(cdf, _uniforms(seed, stream, c, size)), n_trials, workers)
    total = np.zeros(cdf.shape[0], dtype=np.int64)
    for part in parts:
        total += part
    return total.reshape(dist.p.shape)


def _indicator_estimate(hits: int, n: int, seed: int) -> EstimateWithError:
    p = hits / n
    var = p * (1.0 - p) * n / (n - 1) if n > 1 else 0.0
    return EstimateWithError(p, math.sqrt(max(var, 0.0) / n), n, seed)


def estimate_parity_correlation(dist, n_trials: int, seed: int, *, stream: int = 0, workers: int = 1, tol: float = DEFAULT_TOL) -> EstimateWithError:
    """Mean of ``(-1)^(m+n)`` (number-resolving detectors) with its standard error."""
    counts = cell_counts(dist, n_trials, seed, stream=stream, workers=workers, tol=tol)
    n_idx = np.arange(counts.shape[0])
    odd = int(counts[(np.add.outer(n_idx, n_idx) % 2) == 1].sum())
    mean = (n_trials - 2 * odd) / n_trials
    var = (1.0 - mean * mean) * n_trials / (n_trials - 1) if n_trials > 1 else 0.0
    return EstimateWithError(mean, math.sqrt(max(var, 0.0) / n_trials), n_trials, seed)


def estimate_nocount(dist, n_trials: int, seed: int, *, stream: int = 0, workers: int = 1, tol: float = DEFAULT_TOL):
    """Frequencies of ``{m=0, n=0}``, ``{m=0}``, ``{n=0}`` (binary detectors)."""
    counts = cell_counts(dist, n_trials, seed, stream=stream, workers=workers, tol=tol)
    both = int(counts[0, 0])
    a = int(counts[0, :].sum())
    b = int(counts[:, 0].sum())
    return tuple(_indicator_estimate(h, n_trials, seed) for h in (both, a, b))


def _bell_terms(combination: str, s: BellSettings):
    # (sign, alpha, beta, observable)
    if combination == "chsh":
        return [
            (1.0, s.alpha_prime, s.beta_prime, "parity"),
            (1.0, s.alpha_prime, s.beta, "parity"),
            (1.0, s.alpha, s.beta_prime, "parity"),
            (-1.0, s.alpha, s.beta, "parity"),
        ]
    if combination == "ch":
        # the singles p_a(a'), p_b(b') are read off the (a', b') run itself
        return [
            (1.0, s.alpha_prime, s.beta_prime, "ch_corner"),
            (1.0, s.alpha_prime, s.beta, "both"),
            (1.0, s.alpha, s.beta_prime, "both"),
            (-1.0, s.alpha, s.beta, "both"),
        ]
    raise ValueError(f"unknown combination {combination!r}; expected 'chsh' or 'ch'")


def _corner_estimate(counts: np.ndarray, n: int, seed: int) -> EstimateWithError:
    """Per-trial ``1[m=0,n=0] - 1[m=0] - 1[n=0]``, which takes values in {-1, 0}."""
    # the score is -1 whenever at least one detector stays dark, else 0
    minus = int(counts[0, :].sum() + counts[1:, 0].sum())
    p = minus / n
    var = p * (1.0 - p) * n / (n - 1) if n > 1 else 0.0
    return EstimateWithError(-p, math.sqrt(max(var, 0.0) / n), n, seed)


def mc_bell(r, settings: BellSettings, combination: str, n_trials_per_setting: int, seed: int, *,
            cutoff: int | None = None, tol: float = DEFAULT_TOL, workers: int = 1) -> EstimateWithError:
    """Monte Carlo estimate of the CHSH or CH combination.

    Each setting pair is an independent run on sub-stream ``i`` (its index in
    the combination) and standard errors add in quadrature.  For CH the
    single-detector terms come from the same run as ``(alpha', beta')``, so
    that run contributes one per-trial score and its own sample variance.
    ``n_trials`` of the result is the per-setting count.
    """
    terms = _bell_terms(combination, settings)
    if cutoff is None:
        reach = max(abs(z) for _, a, b, _ in terms for z in (a, b))
        cutoff = cutoff_autoselect(r, reach, tol)
    value = 0.0
    var = 0.0
    for i, (sign, a, b, obs) in enumerate(terms):
        dist = displaced_joint_distribution(r, a, b, cutoff, tol)
        kw = dict(stream=i, workers=workers, tol=tol)
        if obs == "parity":
            est = estimate_parity_correlation(dist, n_trials_per_setting, seed, **kw)
        elif obs == "both":
            est = estimate_nocount(dist, n_trials_per_setting, seed, **kw)[0]
        else:
            counts = cell_counts(dist, n_trials_per_setting, seed, **kw)
            est = _corner_estimate(counts, n_trials_per_setting, seed)
        value += sign * est.value
        var += est.std_error ** 2
    return EstimateWithError(value, math.sqrt(var), n_trials_per_setting, seed)
