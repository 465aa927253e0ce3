"""Monte Carlo record statistics for random walks and the equivalent renewal process.

Replicas are simulated in fixed blocks of ``BLOCK_SIZE`` rows.  Block ``b``
draws from ``SeedSequence(seed, spawn_key=(b,))``, so the numbers produced
for a replica depend only on (seed, replica index) and never on how blocks
are scheduled over threads.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .ages import AgeRecord, ages_from_records, check_beta
from .holding_time import build_law, sample_ages

STEP_LAWS = ("gaussian", "uniform", "cauchy", "renewal-exact")
BLOCK_SIZE = 1024
# continuation budget when a single replica's straddling interval is requested
_MAX_CONTINUATION = 1 << 24


@dataclass(frozen=True)
class WalkConfig:
    step_law: str = "gaussian"
    n: int = 500
    replicas: int = 10_000
    seed: int = 0
    k_max: int = 3

    def __post_init__(self):
        if self.step_law not in STEP_LAWS:
            raise ValueError(f"step_law must be one of {STEP_LAWS}, got {self.step_law!r}")
        if self.n < 0:
            raise ValueError("n must be nonnegative")
        if self.replicas < 1:
            raise ValueError("replicas must be >= 1")
        if self.k_max < 1:
            raise ValueError("k_max must be >= 1")

    @property
    def blocks(self) -> int:
        return -(-self.replicas // BLOCK_SIZE)

    def block_rows(self, block: int) -> int:
        return min(BLOCK_SIZE, self.replicas - block * BLOCK_SIZE)

    @property
    def horizon(self) -> int:
        # walk drivers look ahead n more steps for the straddling interval
        return 2 * self.n + 1


@dataclass(frozen=True)
class Estimate:
    mean: float
    std_error: float
    count: int
    statistic: str = "mean"


def block_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=tuple(key))))


def _open_uniform(rng: np.random.Generator, size) -> np.ndarray:
    u = rng.random(size)
    return np.where(u == 0.0, 0.5 * np.finfo(float).tiny, u)


def _steps(law: str, rng: np.random.Generator, shape) -> np.ndarray:
    if law == "gaussian":
        return rng.standard_normal(shape)
    if law == "uniform":
        return rng.uniform(-1.0, 1.0, shape)
    return rng.standard_cauchy(shape)


# ------------------------------------------------------------------ drivers

def _walk_block(cfg: WalkConfig, block: int) -> tuple[np.ndarray, np.ndarray]:
    """Positions ``X[:, 0..H]`` and record indicators for one block of walks."""
    rows, H = cfg.block_rows(block), cfg.horizon
    rng = block_rng(cfg.seed, block)
    x = np.zeros((rows, H + 1))
    np.cumsum(_steps(cfg.step_law, rng, (rows, H)), axis=1, out=x[:, 1:])
    rec = np.empty((rows, H + 1), dtype=bool)
    rec[:, 0] = True
    rec[:, 1:] = x[:, 1:] > np.maximum.accumulate(x, axis=1)[:, :-1]
    return x, rec


_LAW = build_law(4096)


def _renewal_block(cfg: WalkConfig, block: int) -> tuple[np.ndarray, np.ndarray]:
    """Record ages ``tau_1, tau_2, ...`` per row, drawn until every row passes n."""
    rows = cfg.block_rows(block)
    rng = block_rng(cfg.seed, block)
    chunks: list[np.ndarray] = []
    total = np.zeros(rows, dtype=np.int64)
    width = 64
    while True:
        taus = sample_ages(_open_uniform(rng, (rows, width)), _LAW)
        chunks.append(taus)
        total = total + taus.sum(axis=1)
        if np.all(total > cfg.n):
            break
    taus = np.concatenate(chunks, axis=1)
    times = np.cumsum(taus, axis=1)  # times[:, c] = t_{c+2}
    return taus, times


# ----------------------------------------------------------- per-replica stats

@dataclass
class _BlockStats:
    rank: np.ndarray  # (3, rows); 0 where undefined (beta=3 with m == 1)
    top: np.ndarray  # (3, rows, k_max); beta=2 entries may be inf (censored)
    m: np.ndarray
    censored: np.ndarray


def _top_k(values: np.ndarray, k: int) -> np.ndarray:
    rows, width = values.shape
    if width < k:
        values = np.concatenate((values, np.zeros((rows, k - width))), axis=1)
        width = k
    part = np.partition(values, width - k, axis=1)[:, width - k :]
    return -np.sort(-part, axis=1)


def _stats(G, A, tau_m, tau_prev, has_prev, m, k_max) -> _BlockStats:
    """Ranks and top ages from completed ages ``G`` (zero padded) and the closers."""
    G = G.astype(float)
    rows = G.shape[0]
    rank = np.zeros((3, rows), dtype=np.int64)
    rank[0] = 1 + (G > A[:, None]).sum(axis=1)
    rank[1] = 1 + (G > tau_m[:, None]).sum(axis=1)
    rank[2] = np.where(has_prev, 1 + (G > tau_prev[:, None]).sum(axis=1), 0)
    top = np.empty((3, rows, k_max))
    top[0] = _top_k(np.concatenate((G, A[:, None]), axis=1), k_max)
    top[1] = _top_k(np.concatenate((G, tau_m[:, None]), axis=1), k_max)
    top[2] = _top_k(G, k_max)
    return _BlockStats(rank, top, m, ~np.isfinite(tau_m))


def _walk_stats(cfg: WalkConfig, block: int) -> _BlockStats:
    n = cfg.n
    _, rec = _walk_block(cfg, block)
    rows, width = rec.shape
    idx = np.arange(width)
    lrt = np.maximum.accumulate(np.where(rec, idx, 0), axis=1)
    gap_at = np.where(rec[:, 1:], idx[1:] - lrt[:, :-1], 0)  # gap ending at time j sits in column j-1
    G = gap_at[:, :n]
    t_m = lrt[:, n]
    A = (n - t_m).astype(float)
    after = rec[:, n + 1 :]
    has_next = after.any(axis=1)
    nxt = n + 1 + np.argmax(after, axis=1)
    tau_m = np.where(has_next, nxt - t_m, np.inf)
    has_prev = t_m > 0
    tau_prev = np.where(has_prev, gap_at[np.arange(rows), np.maximum(t_m - 1, 0)], 0).astype(float)
    m = rec[:, : n + 1].sum(axis=1)
    return _stats(G, A, tau_m.astype(float), tau_prev, has_prev, m, cfg.k_max)


def _renewal_stats(cfg: WalkConfig, block: int) -> _BlockStats:
    n = cfg.n
    taus, times = _renewal_block(cfg, block)
    rows = taus.shape[0]
    r = np.arange(rows)
    done = times <= n
    m = 1 + done.sum(axis=1)
    G = np.where(done, taus, 0)
    has_prev = m > 1
    t_m = np.where(has_prev, times[r, np.maximum(m - 2, 0)], 0)
    A = (n - t_m).astype(float)
    tau_m = taus[r, m - 1].astype(float)
    tau_prev = np.where(has_prev, taus[r, np.maximum(m - 2, 0)], 0).astype(float)
    return _stats(G, A, tau_m, tau_prev, has_prev, m, cfg.k_max)


def _block_stats(cfg: WalkConfig, block: int) -> _BlockStats:
    if cfg.step_law == "renewal-exact":
        return _renewal_stats(cfg, block)
    return _walk_stats(cfg, block)


# ------------------------------------------------------------------ results

@dataclass
class SimulationResult:
    config: WalkConfig
    rank: np.ndarray  # (3, replicas)
    top: np.ndarray  # (3, replicas, k_max)
    m: np.ndarray
    censored: np.ndarray  # straddling interval not resolved within the horizon

    @property
    def empty_beta3(self) -> int:
        """Replicas with no completed age (m == 1), counted as event-false for p^(3)."""
        return int(np.sum(self.m == 1))

    def ranked_proportions(self, beta: int = 1) -> np.ndarray:
        check_beta(beta)
        if self.config.n == 0:
            raise ValueError("proportions need n >= 1")
        return self.top[beta - 1] / self.config.n

    def estimate(self, quantity: str, beta: int, k: int) -> Estimate:
        return estimate(self, quantity, beta, k)


def run_simulation(cfg: WalkConfig, threads: int = 1) -> SimulationResult:
    """Simulate every replica; output is identical for any ``threads``."""
    blocks = range(cfg.blocks)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda b: _block_stats(cfg, b), blocks))
    else:
        parts = [_block_stats(cfg, b) for b in blocks]
    return SimulationResult(
        cfg,
        np.concatenate([p.rank for p in parts], axis=1),
        np.concatenate([p.top for p in parts], axis=1),
        np.concatenate([p.m for p in parts]),
        np.concatenate([p.censored for p in parts]),
    )


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    mean = float(np.mean(x))
    se = float(np.std(x, ddof=1) / math.sqrt(len(x))) if len(x) > 1 else math.nan
    return mean, se


def estimate(result: SimulationResult, quantity: str, beta: int, k: int) -> Estimate:
    """Estimate ``p_k^(beta)(n)`` (quantity "p") or ``E L_k^(beta)(n)/n`` ("EL").

    The mean of ``L_1^(2)`` is infinite; asking for it warns and returns the
    median of ``L_1^(2)/n`` instead.
    """
    check_beta(beta)
    cfg = result.config
    if not 1 <= k <= cfg.k_max:
        raise ValueError(f"k must lie in 1..{cfg.k_max}")
    count = result.rank.shape[1]
    if quantity == "p":
        mean, se = _mean_se((result.rank[beta - 1] == k).astype(float))
        return Estimate(mean, se, count)
    if quantity != "EL":
        raise ValueError("quantity must be 'p' or 'EL'")
    values = result.ranked_proportions(beta)[:, k - 1]
    if beta == 2 and k == 1:
        warnings.warn("E L_1^(2) is infinite; reporting the median of L_1^(2)/n", RuntimeWarning, stacklevel=2)
        med = float(np.median(values))
        # censored values only exceed n, so the median is exact when it is at most 1
        return Estimate(med if med <= 1.0 else math.inf, math.nan, count, "median")
    mean, se = _mean_se(values)
    return Estimate(mean, se, count)


def default_statistics(k_max: int) -> list[tuple[str, int, int]]:
    stats = [("p", beta, k) for beta in (1, 2, 3) for k in range(1, k_max + 1)]
    stats += [("EL", beta, k) for beta in (1, 2, 3) for k in range(1, k_max + 1) if (beta, k) != (2, 1)]
    return stats


@dataclass(frozen=True)
class Comparison:
    quantity: str
    beta: int
    k: int
    law_a: str
    law_b: str
    mean_a: float
    mean_b: float
    z: float
    flagged: bool


def z_score(a: Estimate, b: Estimate) -> float:
    se = math.hypot(a.std_error, b.std_error)
    if se == 0:
        return 0.0 if a.mean == b.mean else math.copysign(math.inf, a.mean - b.mean)
    return (a.mean - b.mean) / se


def universality_check(
    results: Sequence[SimulationResult],
    statistics: Sequence[tuple[str, int, int]] | None = None,
    z_gate: float = 4.0,
) -> list[Comparison]:
    """Pairwise z-scores of the same statistics across step laws."""
    if len({(r.config.n, r.config.replicas) for r in results}) > 1:
        raise ValueError("all results need the same n and replica count")
    k_max = min(r.config.k_max for r in results)
    statistics = default_statistics(k_max) if statistics is None else statistics
    out = []
    for ra, rb in combinations(results, 2):
        for quantity, beta, k in statistics:
            ea, eb = estimate(ra, quantity, beta, k), estimate(rb, quantity, beta, k)
            z = z_score(ea, eb)
            out.append(
                Comparison(quantity, beta, k, ra.config.step_law, rb.config.step_law, ea.mean, eb.mean, z, abs(z) > z_gate)
            )
    return out


# ------------------------------------------------------------- single replica

def simulate_walk(cfg: WalkConfig, replica_index: int) -> dict[int, AgeRecord]:
    """Age lists of one replica for every beta, consistent with ``run_simulation``.

    The beta=2 entry is omitted if no record follows ``n`` within the
    continuation budget.
    """
    if not 0 <= replica_index < cfg.replicas:
        raise IndexError("replica index out of range")
    block, row = divmod(replica_index, BLOCK_SIZE)
    n = cfg.n
    if cfg.step_law == "renewal-exact":
        taus, times = _renewal_block(cfg, block)
        t = times[row]
        m = 1 + int(np.sum(t <= n))
        record_times = [0] + t[: m - 1].tolist()
        return ages_from_records(record_times, n, int(t[m - 1]))

    x, rec = _walk_block(cfg, block)
    record_times = np.flatnonzero(rec[row]).tolist()
    later = [t for t in record_times if t > n]
    nxt = later[0] if later else _continue_walk(cfg, block, row, x[row])
    return ages_from_records([t for t in record_times if t <= n], n, nxt)


def renewal_from_draws(draws: Sequence[float], n: int) -> dict[int, AgeRecord]:
    """Age lists of the renewal process driven by explicit uniforms.

    Draws are mapped to holding times by the inverse CDF in order; there
    must be enough of them to carry the record times past ``n``.
    """
    taus = sample_ages(np.asarray(draws, dtype=float), _LAW)
    times = [0]
    for tau in taus.tolist():
        nxt = times[-1] + tau
        if nxt > n:
            return ages_from_records(times, n, nxt)
        times.append(nxt)
    raise ValueError(f"draws end at time {times[-1]} before passing n={n}")


def _continue_walk(cfg: WalkConfig, block: int, row: int, path: np.ndarray) -> int | None:
    rng = block_rng(cfg.seed, block, 1, row)
    level, pos, start = float(path.max()), float(path[-1]), len(path) - 1
    chunk = max(len(path), 1024)
    while start < _MAX_CONTINUATION:
        xs = pos + np.cumsum(_steps(cfg.step_law, rng, chunk))
        hit = np.flatnonzero(xs > level)
        if hit.size:
            return start + 1 + int(hit[0])
        pos, start, chunk = float(xs[-1]), start + chunk, 2 * chunk
    return None

