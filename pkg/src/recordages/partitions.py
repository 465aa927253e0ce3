"""Chinese restaurant process and the Poisson-Dirichlet stick-breaking sampler."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real

import numpy as np

from .errors import ResourceLimitError

MAX_CRP_N = 10

PartitionDist = dict  # integer partition (descending tuple) -> probability


def total_variation(p: PartitionDist, q: PartitionDist) -> float:
    keys = set(p) | set(q)
    return 0.5 * math.fsum(abs(float(p.get(key, 0)) - float(q.get(key, 0))) for key in keys)


def _check_params(alpha, theta) -> None:
    if not 0 <= alpha <= 1:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    if not theta > -alpha:
        raise ValueError(f"theta must exceed -alpha, got theta={theta}")


@dataclass(frozen=True)
class CRPState:
    alpha: Real
    theta: Real
    table_sizes: tuple[int, ...] = ()

    def __post_init__(self):
        _check_params(self.alpha, self.theta)
        if any(s < 1 for s in self.table_sizes):
            raise ValueError("table sizes must be positive")

    @property
    def n(self) -> int:
        return sum(self.table_sizes)

    def choice_probabilities(self) -> list:
        """Probabilities of joining each existing table, then of opening a new one."""
        n, k = self.n, len(self.table_sizes)
        if n == 0:
            return [1]
        denom = n + self.theta
        return [(s - self.alpha) / denom for s in self.table_sizes] + [(self.theta + k * self.alpha) / denom]

    def partition(self) -> tuple[int, ...]:
        return tuple(sorted(self.table_sizes, reverse=True))


def crp_step(state: CRPState, uniform_draw: float) -> CRPState:
    """Seat one more customer by inverse CDF over (table 1, ..., table k, new table)."""
    if not 0.0 < uniform_draw < 1.0:
        raise ValueError("draw must lie strictly inside (0, 1)")
    probs = state.choice_probabilities()
    acc = 0.0
    choice = len(probs) - 1
    for i, p in enumerate(probs):
        acc += float(p)
        if uniform_draw < acc:
            choice = i
            break
    sizes = list(state.table_sizes)
    if choice == len(sizes):
        sizes.append(1)
    else:
        sizes[choice] += 1
    return CRPState(state.alpha, state.theta, tuple(sizes))


def crp_sample(alpha: float, theta: float, n: int, rng: np.random.Generator) -> CRPState:
    state = CRPState(alpha, theta)
    for _ in range(n):
        state = crp_step(state, _open_unit(rng))
    return state


def _open_unit(rng: np.random.Generator) -> float:
    u = rng.random()
    while u == 0.0:
        u = rng.random()
    return u


def crp_partition_law(alpha, theta, n: int, exact: bool = False) -> PartitionDist:
    """Exact law of the partition after ``n`` customers.

    Seating histories are aggregated by their partition after every step;
    transition probabilities only depend on the multiset of table sizes.
    Pass ``exact=True`` (with rational alpha, theta) for Fraction output.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n > MAX_CRP_N:
        raise ResourceLimitError(f"exact CRP law refused for n={n} > {MAX_CRP_N}")
    if exact:
        alpha, theta = Fraction(alpha), Fraction(theta)
    _check_params(alpha, theta)
    one = Fraction(1) if exact else 1.0
    law: dict[tuple[int, ...], object] = {(): one}
    for _ in range(n):
        nxt: dict[tuple[int, ...], object] = defaultdict(lambda: 0 * one)
        for parts, w in law.items():
            state = CRPState(alpha, theta, parts)
            probs = state.choice_probabilities()
            for i, p in enumerate(probs):
                sizes = list(parts)
                if i == len(parts):
                    sizes.append(1)
                else:
                    sizes[i] += 1
                nxt[tuple(sorted(sizes, reverse=True))] += w * p
        law = dict(nxt)
    return law


def size_biased_rank_probability(law: PartitionDist, k: int = 1):
    """P(a size-biased pick is the k-th largest part), ties going to the pick."""
    total = 0
    for parts, w in law.items():
        n = sum(parts)
        for size in set(parts):
            rank = 1 + sum(1 for s in parts if s > size)
            if rank == k:
                total += w * size * parts.count(size) / n
    return total


# ------------------------------------------------------------ Beta from uniforms

def _uniform_open(rng: np.random.Generator, size) -> np.ndarray:
    u = rng.random(size)
    # (0, 1) open interval; random() can return exactly 0.0
    return np.where(u == 0.0, 0.5 * np.finfo(float).tiny, u)


def _normals(rng: np.random.Generator, size: int) -> np.ndarray:
    """Box-Muller standard normals from uniforms only."""
    half = (size + 1) // 2
    u1 = _uniform_open(rng, half)
    u2 = rng.random(half)
    rad = np.sqrt(-2.0 * np.log(u1))
    z = np.concatenate((rad * np.cos(2 * np.pi * u2), rad * np.sin(2 * np.pi * u2)))
    return z[:size]


def gamma_variates(shape: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Marsaglia-Tsang gamma variates, with the ``U^(1/a)`` boost for ``a < 1``.

    Uses uniforms (and Box-Muller normals built from them) only.  Acceptance
    probability is above 0.95 for every shape >= 1, so the rejection loop
    touches ever fewer entries.
    """
    shape = np.asarray(shape, dtype=float)
    flat = shape.ravel()
    boosted = flat < 1.0
    a = np.where(boosted, flat + 1.0, flat)
    d = a - 1.0 / 3.0
    c = 1.0 / np.sqrt(9.0 * d)
    out = np.empty_like(a)
    todo = np.arange(a.size)
    while todo.size:
        z = _normals(rng, todo.size)
        v = (1.0 + c[todo] * z) ** 3
        u = _uniform_open(rng, todo.size)
        with np.errstate(invalid="ignore", divide="ignore"):
            ok = (v > 0) & (np.log(u) < 0.5 * z * z + d[todo] * (1.0 - v + np.log(v)))
        out[todo[ok]] = d[todo[ok]] * v[ok]
        todo = todo[~ok]
    if boosted.any():
        u = _uniform_open(rng, int(boosted.sum()))
        out[boosted] *= u ** (1.0 / flat[boosted])
    return out.reshape(shape.shape)


def beta_variates(a: np.ndarray, b: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    x = gamma_variates(a, rng)
    y = gamma_variates(b, rng)
    return x / (x + y)


# ------------------------------------------------------------ Poisson-Dirichlet

@dataclass
class StickBreak:
    """Stick-breaking draws; row ``s`` is one sample of depth ``D``.

    ``lengths[:, i] = (1 - U[:, i]) * prod_{j<i} U[:, j]`` and ``residual`` is
    the mass ``prod U`` not yet handed out.  ``ranked`` sorts the lengths in
    decreasing order; entries below ``residual`` could be displaced by pieces
    beyond the truncation depth.
    """

    alpha: float
    theta: float
    fractions: np.ndarray
    lengths: np.ndarray
    residual: np.ndarray
    ranked: np.ndarray = field(init=False)

    def __post_init__(self):
        self.ranked = -np.sort(-self.lengths, axis=1)

    @property
    def depth(self) -> int:
        return self.lengths.shape[1]

    def reliable(self, k: int) -> np.ndarray:
        """Rows whose top-k ranking cannot change by refining the residual."""
        return self.ranked[:, k - 1] >= self.residual


def pd_sample(
    depth: int,
    rng: np.random.Generator,
    size: int = 1,
    alpha: float = 0.5,
    theta: float = 0.0,
) -> StickBreak:
    """Draw ``size`` truncated stick-breaking samples of PD(alpha, theta)."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    _check_params(alpha, theta)
    if alpha >= 1:
        raise ValueError("stick-breaking needs alpha < 1")
    i = np.arange(1, depth + 1)
    a = np.broadcast_to(theta + i * alpha, (size, depth))
    b = np.broadcast_to(np.full(depth, 1.0 - alpha), (size, depth))
    u = beta_variates(a, b, rng)
    survive = np.cumprod(u, axis=1)
    before = np.concatenate((np.ones((size, 1)), survive[:, :-1]), axis=1)
    lengths = (1.0 - u) * before
    return StickBreak(alpha, theta, u, lengths, survive[:, -1].copy())


@dataclass(frozen=True)
class CoordinateComparison:
    k: int
    mean_a: float
    mean_b: float
    z: float
    ks_gap: float
    flagged: bool


def _ks_gap(a: np.ndarray, b: np.ndarray) -> float:
    grid = np.concatenate((a, b))
    fa = np.searchsorted(np.sort(a), grid, side="right") / len(a)
    fb = np.searchsorted(np.sort(b), grid, side="right") / len(b)
    return float(np.max(np.abs(fa - fb)))


def pd_convergence_check(mc_ranked: np.ndarray, pd_ranked: np.ndarray, z_gate: float = 4.0) -> list[CoordinateComparison]:
    """Per-coordinate two-sample comparison of ranked proportions."""
    mc_ranked = np.atleast_2d(mc_ranked)
    pd_ranked = np.atleast_2d(pd_ranked)
    if mc_ranked.shape[1] != pd_ranked.shape[1]:
        raise ValueError("both samples need the same number of ranked coordinates")
    report = []
    for j in range(mc_ranked.shape[1]):
        a, b = mc_ranked[:, j], pd_ranked[:, j]
        ma, mb = float(a.mean()), float(b.mean())
        se = math.sqrt(a.var(ddof=1) / len(a) + b.var(ddof=1) / len(b)) if len(a) > 1 and len(b) > 1 else 0.0
        if se > 0:
            z = (ma - mb) / se
        else:
            z = 0.0 if ma == mb else math.copysign(math.inf, ma - mb)
        report.append(CoordinateComparison(j + 1, ma, mb, z, _ks_gap(a, b), abs(z) > z_gate))
    return report


PD_BLOCK = 4096


@dataclass(frozen=True)
class PDSummary:
    """Ranked-coordinate samples pooled over blocks of stick-breaking draws."""

    depth: int
    ranked: np.ndarray  # (replicas, k_max)
    residual: np.ndarray  # (replicas,)

    def unreliable(self, k: int) -> int:
        """Samples whose k-th coordinate could move if the residual were split further."""
        return int(np.sum(self.ranked[:, k - 1] < self.residual))


def pd_ranked_samples(
    replicas: int,
    depth: int,
    seed: int,
    k_max: int = 3,
    threads: int = 1,
    alpha: float = 0.5,
    theta: float = 0.0,
) -> PDSummary:
    """Top ``k_max`` ranked lengths of ``replicas`` stick-breaking draws.

    Block ``b`` of ``PD_BLOCK`` samples uses ``SeedSequence(seed, spawn_key=(b,))``
    so the output does not depend on ``threads``.
    """
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    if not 1 <= k_max <= depth:
        raise ValueError("k_max must lie in 1..depth")

    def block(b: int):
        rows = min(PD_BLOCK, replicas - b * PD_BLOCK)
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(b,))))
        s = pd_sample(depth, rng, size=rows, alpha=alpha, theta=theta)
        return s.ranked[:, :k_max], s.residual

    blocks = range(-(-replicas // PD_BLOCK))
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(block, blocks))
    else:
        parts = [block(b) for b in blocks]
    return PDSummary(depth, np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts]))
