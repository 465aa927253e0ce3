"""Sparre Andersen law of record ages.

For a walk with continuous symmetric steps the age of a record is
distributed independently of the step law:

    q(k) = P(tau > k) = binom(2k, k) / 4**k
    f(k) = P(tau = k) = q(k-1) - q(k)
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

__all__ = ["HoldingLaw", "build_law", "gen_fn_q", "gen_fn_f", "sample_age", "sample_ages"]


def _q_table(max_k: int) -> np.ndarray:
    # q[k] = q[k-1] * (2k-1)/(2k); the cumulative product never overflows
    k = np.arange(1, max_k + 1, dtype=float)
    q = np.empty(max_k + 1)
    q[0] = 1.0
    q[1:] = np.cumprod((2.0 * k - 1.0) / (2.0 * k))
    return q


@dataclass
class HoldingLaw:
    """Tabulated record-age law up to ``max_k``.

    ``f[0]`` is stored as 0 so that ``f[k]`` indexes naturally.
    """

    max_k: int
    q: np.ndarray
    f: np.ndarray
    cum_f: np.ndarray
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def extend(self, min_k: int) -> None:
        """Grow the table (by doubling) until it covers ``min_k``."""
        with self._lock:
            if min_k <= self.max_k:
                return
            new_k = max(self.max_k, 1)
            while new_k < min_k:
                new_k *= 2
            fresh = build_law(new_k)
            self.max_k, self.q, self.f, self.cum_f = fresh.max_k, fresh.q, fresh.f, fresh.cum_f

    def tail(self, k: int) -> float:
        """P(tau > k), extending the table if needed."""
        if k > self.max_k:
            self.extend(k)
        return float(self.q[k])


def build_law(max_k: int) -> HoldingLaw:
    if max_k < 0:
        raise ValueError("max_k must be nonnegative")
    q = _q_table(max_k)
    f = np.zeros(max_k + 1)
    f[1:] = q[:-1] - q[1:]
    cum_f = np.cumsum(f)
    return HoldingLaw(max_k=max_k, q=q, f=f, cum_f=cum_f)


def _check_z(z: float) -> float:
    if not 0.0 <= z < 1.0:
        raise ValueError(f"generating function needs 0 <= z < 1, got {z!r}")
    return z


def gen_fn_q(z: float) -> float:
    """Sum of q(k) z**k, i.e. 1/sqrt(1-z)."""
    return 1.0 / np.sqrt(1.0 - _check_z(z))


def gen_fn_f(z: float) -> float:
    """Sum of f(k) z**k, i.e. 1 - sqrt(1-z)."""
    return 1.0 - np.sqrt(1.0 - _check_z(z))


TABLE_CEILING = 1 << 20
# ages are int64; draws below q(AGE_CAP) ~ 2.6e-10 are clipped to AGE_CAP
AGE_CAP = 1 << 62


def _log_q(k: np.ndarray) -> np.ndarray:
    """log q(k) for k > TABLE_CEILING from the large-k expansion of the gamma ratio."""
    inv = 1.0 / k
    corr = inv * (-1.0 / 8 + inv * (1.0 / 128 + inv * (5.0 / 1024 - inv * 21.0 / 32768)))
    return -0.5 * np.log(np.pi * k) + np.log1p(corr)


def _far_tail_ages(draws: np.ndarray, lo: int) -> np.ndarray:
    """Smallest ``k > lo`` with ``q(k) < u`` by bisection on log-gamma values of q."""
    log_u = np.log(draws)
    # q(k) > 1/sqrt(pi (k + 1/2)), so q(k) < u forces k < 1/(pi u^2)
    hi = np.minimum(np.ceil(1.0 / (np.pi * draws * draws)) + 1.0, float(AGE_CAP))
    lo_arr = np.full(draws.shape, float(lo))  # invariant: q(lo) >= u, q(hi) < u
    while True:
        open_ = hi - lo_arr > 1.0
        if not open_.any():
            return hi.astype(np.int64)
        mid = np.floor(0.5 * (lo_arr + hi))
        below = _log_q(mid) < log_u
        hi = np.where(open_ & below, mid, hi)
        lo_arr = np.where(open_ & ~below, mid, lo_arr)


def sample_ages(draws: np.ndarray, law: HoldingLaw) -> np.ndarray:
    """Inverse-CDF map of uniforms in (0, 1) to record ages.

    Each draw ``u`` maps to the smallest ``k >= 1`` with ``q(k) < u``.  The
    law table is doubled on demand up to ``TABLE_CEILING``; draws below
    ``q(TABLE_CEILING)`` are resolved by bisection on log-gamma values.
    """
    draws = np.asarray(draws, dtype=float)
    if draws.size and (draws.min() <= 0.0 or draws.max() >= 1.0):
        raise ValueError("draws must lie strictly inside (0, 1)")
    if draws.size:
        lowest = draws.min()
        while lowest <= law.q[law.max_k] and law.max_k < TABLE_CEILING:
            law.extend(min(2 * max(law.max_k, 1), TABLE_CEILING))
    q = law.q
    # -q is nondecreasing; 'right' skips entries with q == u
    out = np.searchsorted(-q, -draws, side="right").astype(np.int64)
    far = out > law.max_k
    if far.any():
        out[far] = _far_tail_ages(draws[far], law.max_k)
    return out


def sample_age(uniform_draw: float, law: HoldingLaw) -> int:
    return int(sample_ages(np.array([uniform_draw]), law)[0])
