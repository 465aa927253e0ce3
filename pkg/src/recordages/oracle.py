"""Brute-force ground truth by enumerating every age configuration up to n.

A configuration with completed ages ``l_1..l_{m-1}`` has weight
``f(l_1)...f(l_{m-1})`` times the probability of whatever closes the list:
``q(a)`` for the current age ``a`` (beta=1, 3) or ``f(r)`` for a
straddling interval of length ``r`` (beta=2).  Straddling lengths at or
beyond ``n`` dominate every completed age, so they are lumped into one tail
class of weight ``q(max(n - S, n - 1))`` represented by the value ``n``.

Both float and exact ``Fraction`` arithmetic are supported; every weight is
a dyadic rational, so the rational mode is exact.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator

from .ages import check_beta, kth_largest, rank_of_last
from .errors import DivergenceError, ResourceLimitError

MAX_N = 20
MAX_PARTITION_N = 12


@dataclass(frozen=True)
class Configuration:
    beta: int
    completed: tuple[int, ...]
    # beta=1: current age; beta=2: straddling length (n for the tail class); beta=3: None
    last: int | None
    weight: float | Fraction
    tail: bool = False

    @property
    def ages(self) -> tuple[int, ...]:
        if self.last is None:
            return self.completed
        return self.completed + (self.last,)


@lru_cache(maxsize=None)
def _law(n: int, exact: bool):
    if exact:
        q = [Fraction(math.comb(2 * k, k), 4**k) for k in range(n + 2)]
    else:
        q = [math.comb(2 * k, k) / 4**k for k in range(n + 2)]
    f = [q[0] * 0] + [q[k - 1] - q[k] for k in range(1, n + 2)]
    return q, f


def _compositions(total: int) -> Iterator[tuple[int, ...]]:
    """All compositions of every integer in ``0..total`` (empty one included)."""
    yield ()
    for first in range(1, total + 1):
        for rest in _compositions(total - first):
            yield (first,) + rest


def _check_n(n: int, ceiling: int = MAX_N) -> None:
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n > ceiling:
        raise ResourceLimitError(f"enumeration refused for n={n} > {ceiling}")


@lru_cache(maxsize=None)
def enumerate_configurations(beta: int, n: int, exact: bool = False) -> tuple[Configuration, ...]:
    check_beta(beta)
    _check_n(n)
    q, f = _law(n, exact)
    out = []
    for comp in _compositions(n):
        s = sum(comp)
        w = q[0]
        for l in comp:
            w = w * f[l]
        if beta == 1:
            out.append(Configuration(1, comp, n - s, w * q[n - s]))
        elif beta == 3:
            out.append(Configuration(3, comp, None, w * q[n - s]))
        else:
            lo = n - s + 1
            for r in range(lo, n):
                out.append(Configuration(2, comp, r, w * f[r]))
            cut = max(lo, n)
            out.append(Configuration(2, comp, n, w * q[cut - 1], tail=True))
    return tuple(out)


def enumerate(beta: int, n: int, exact: bool = False) -> list[Configuration]:  # noqa: A001
    return list(enumerate_configurations(beta, n, exact))


def oracle_p(beta: int, k: int, n: int, exact: bool = False):
    """P(the last element of the beta-list has rank k) by enumeration."""
    if k < 1:
        raise ValueError("k must be >= 1")
    total = Fraction(0) if exact else 0.0
    for c in enumerate_configurations(beta, n, exact):
        if rank_of_last(c.ages) == k:
            total += c.weight
    return total


def oracle_EL(beta: int, k: int, n: int, exact: bool = False):
    """E(k-th largest element of the beta-list) by enumeration."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if beta == 2 and k == 1:
        raise DivergenceError("the longest beta=2 age has infinite mean")
    total = Fraction(0) if exact else 0.0
    for c in enumerate_configurations(beta, n, exact):
        total += c.weight * kth_largest(c.ages, k)
    return total


def total_weight(beta: int, n: int, exact: bool = False):
    return sum((c.weight for c in enumerate_configurations(beta, n, exact)), Fraction(0) if exact else 0.0)


def partition_law_beta1(n: int, exact: bool = False) -> dict[tuple[int, ...], float | Fraction]:
    """Law of the integer partition of n formed by the beta=1 ages.

    A zero current age is not a part.
    """
    _check_n(n, MAX_PARTITION_N)
    law: dict[tuple[int, ...], float | Fraction] = defaultdict(lambda: Fraction(0) if exact else 0.0)
    for c in enumerate_configurations(1, n, exact):
        parts = tuple(sorted((a for a in c.ages if a > 0), reverse=True))
        law[parts] += c.weight
    return dict(law)


def oracle_p_covering(k: int, n: int, exact: bool = False):
    """P(the age interval covering time n has rank k among the beta=1 parts).

    The covering interval is the current age when it is positive and the
    last completed age otherwise.  Its law is that of a size-biased pick from
    the beta=1 partition, which is what a uniformly chosen customer of the
    Chinese restaurant process sees.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if n < 1:
        raise ValueError("n must be >= 1")
    total = Fraction(0) if exact else 0.0
    for c in enumerate_configurations(1, n, exact):
        parts = [a for a in c.ages if a > 0]
        cover = parts[-1]
        if 1 + sum(1 for a in parts if a > cover) == k:
            total += c.weight
    return total
