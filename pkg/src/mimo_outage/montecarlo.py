"""Monte Carlo outage and Mellin-moment estimates.

Trials are split into ``shards``; shard k of grid point j draws from a
Philox stream keyed by SeedSequence(seed, spawn_key=(j, k)), and shard
partials are combined in shard order.  Results therefore depend only on
(seed, shards), never on how many workers ran the shards.
"""
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .channel import capacity, sample_channel
from .errors import DomainError

WORKERS_ENV = "MIMO_OUTAGE_WORKERS"
BATCH = 1 << 16
WILSON_THRESHOLD = 30


@dataclass(frozen=True)
class TrialPlan:
    n_trials: int = 1_000_000
    seed: int = 2024
    shards: int = 16

    def __post_init__(self):
        if self.n_trials < 1 or self.shards < 1:
            raise DomainError("n_trials and shards must be positive")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")

    def shard_sizes(self):
        q, r = divmod(self.n_trials, self.shards)
        return [q + (k < r) for k in range(self.shards)]


@dataclass(frozen=True)
class OutageEstimate:
    p_hat: float
    stderr: float
    ci_low: float
    ci_high: float
    n_trials: int
    wilson: bool = False
    confidence: float = 0.95


def worker_count():
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _rng(seed, point, shard):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(point, shard))))


def _draws(config, rng, n):
    # complex Gaussian with unit variance per entry
    for start in range(0, n, BATCH):
        m = min(BATCH, n - start)
        g = rng.standard_normal((m, config.Nr, config.Nt, 2))
        hw = (g[..., 0] + 1j * g[..., 1]) * np.sqrt(0.5)
        yield sample_channel(config, hw)


def _run_shards(fn, sizes, workers):
    jobs = list(enumerate(sizes))
    if workers <= 1 or len(jobs) == 1:
        return [fn(k, n) for k, n in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


def interval(successes, n, confidence=0.95):
    """Normal interval, or Wilson when fewer than 30 expected events."""
    p = successes / n
    z = float(norm.ppf(0.5 + confidence / 2))
    se = float(np.sqrt(p * (1 - p) / n))
    if successes < WILSON_THRESHOLD or n - successes < WILSON_THRESHOLD:
        denom = 1 + z * z / n
        centre = (p + z * z / (2 * n)) / denom
        half = z * np.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
        lo, hi = max(0.0, float(centre - half)), min(1.0, float(centre + half))
        return OutageEstimate(p, se, min(lo, p), max(hi, p), n, True, confidence)
    return OutageEstimate(p, se, max(0.0, p - z * se), min(1.0, p + z * se), n, False, confidence)


def _count_outages(config, rho, R, plan, point, workers):
    def shard(k, n):
        rng = _rng(plan.seed, point, k)
        return sum(int(np.count_nonzero(capacity(H, rho) < R)) for H in _draws(config, rng, n))

    return sum(_run_shards(shard, plan.shard_sizes(), workers))


def estimate_outage(config, rho, R, plan, confidence=0.95, workers=None, point=0):
    """Empirical Pr(capacity < R) with a confidence interval."""
    if plan.n_trials < 100:
        raise DomainError("need at least 100 trials")
    workers = worker_count() if workers is None else workers
    k = _count_outages(config, rho, R, plan, point, workers)
    return interval(k, plan.n_trials, confidence)


def sweep(config, R, rho_grid_db, plan, confidence=0.95, workers=None):
    """One estimate per SNR point (dB); each point uses its own substreams."""
    if len(rho_grid_db) == 0:
        raise DomainError("empty SNR grid")
    return [
        (db, estimate_outage(config, 10 ** (db / 10), R, plan, confidence, workers, point=j))
        for j, db in enumerate(rho_grid_db)
    ]


def estimate_mellin(config, rho, s, plan, workers=None, point=0):
    """Sample mean of G^(s-1), G = 2^capacity, with componentwise standard errors.

    Returns (mean, stderr) where stderr.real / stderr.imag are the standard
    errors of the real / imaginary parts.
    """
    s = complex(s)
    if s.real > 1:
        warnings.warn("Re(s) > 1: the moment may have a heavy tail", RuntimeWarning)
    workers = worker_count() if workers is None else workers
    ln2 = np.log(2.0)

    def shard(k, n):
        rng = _rng(plan.seed, point, k)
        parts = []
        for H in _draws(config, rng, n):
            v = np.exp((s - 1) * ln2 * capacity(H, rho))
            re, im = v.real, v.imag
            parts.append((v.size, re.mean(), im.mean(),
                          ((re - re.mean()) ** 2).sum(), ((im - im.mean()) ** 2).sum()))
        return _merge(parts)

    n, mr, mi, m2r, m2i = _merge(_run_shards(shard, plan.shard_sizes(), workers))
    se = complex(np.sqrt(m2r / (n - 1) / n), np.sqrt(m2i / (n - 1) / n)) if n > 1 else 0j
    return complex(mr, mi), se


def _merge(parts):
    # pairwise mean / sum-of-squares combination in fixed order
    n, mr, mi, m2r, m2i = 0, 0.0, 0.0, 0.0, 0.0
    for nb, br, bi, b2r, b2i in parts:
        tot = n + nb
        dr, di = br - mr, bi - mi
        mr += dr * nb / tot
        mi += di * nb / tot
        m2r += b2r + dr * dr * n * nb / tot
        m2i += b2i + di * di * n * nb / tot
        n = tot
    return n, mr, mi, m2r, m2i
