"""Age sequences of a record process and the ranking conventions on them.

Records happen at times ``t_1 = 0 < t_2 < ...``; the walk has ``R_n = m``
records by time ``n`` when ``t_m <= n < t_{m+1}``.  The three age lists are

* ``beta=1``: completed ages ``tau_1..tau_{m-1}`` then the current age ``A_n = n - t_m``
* ``beta=2``: completed ages then the straddling interval ``tau_m``
* ``beta=3``: completed ages only (empty when ``m == 1``)
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Sequence

BETAS = (1, 2, 3)


def check_beta(beta: int) -> int:
    if beta not in BETAS:
        raise ValueError(f"beta must be one of {BETAS}, got {beta!r}")
    return int(beta)


@dataclass(frozen=True)
class AgeRecord:
    beta: int
    ages: tuple[int, ...]
    n: int
    m: int

    def __post_init__(self):
        check_beta(self.beta)
        if self.beta == 1 and (sum(self.ages) != self.n or len(self.ages) != self.m):
            raise ValueError("beta=1 ages must sum to n and have length m")
        if self.beta == 2:
            if len(self.ages) != self.m or not sum(self.ages[:-1]) <= self.n < sum(self.ages):
                raise ValueError("beta=2 ages must straddle n")
        if self.beta == 3 and len(self.ages) != self.m - 1:
            raise ValueError("beta=3 ages must have length m-1")

    @property
    def last(self) -> int | None:
        return self.ages[-1] if self.ages else None

    def rank_of_last(self) -> int | None:
        return rank_of_last(self.ages)

    def kth_largest(self, k: int) -> int:
        return kth_largest(self.ages, k)


def rank_of_last(ages: Sequence[int]) -> int | None:
    """1 + number of earlier entries strictly greater than the last one.

    Ties go to the last element.  Returns ``None`` for an empty list, which
    callers treat as "the last element has no rank".
    """
    if len(ages) == 0:
        return None
    last = ages[-1]
    return 1 + sum(1 for a in ages[:-1] if a > last)


def kth_largest(ages: Sequence[int], k: int) -> int:
    """k-th largest entry counted with multiplicity; 0 when the list is shorter."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if len(ages) < k:
        return 0
    return heapq.nlargest(k, ages)[-1]


def ages_from_records(record_times: Sequence[int], n: int, next_record: int | None = None) -> dict[int, AgeRecord]:
    """Build the three age lists from record times ``0 = t_1 < ... <= n``.

    ``next_record`` is the first record time after ``n``; without it the
    ``beta=2`` list is not formed.
    """
    times = [t for t in record_times if t <= n]
    if not times or times[0] != 0:
        raise ValueError("record times must start at 0")
    m = len(times)
    completed = tuple(b - a for a, b in zip(times, times[1:]))
    out = {
        1: AgeRecord(1, completed + (n - times[-1],), n, m),
        3: AgeRecord(3, completed, n, m),
    }
    if next_record is not None:
        if next_record <= n:
            raise ValueError("next record must come after n")
        out[2] = AgeRecord(2, completed + (next_record - times[-1],), n, m)
    return out
