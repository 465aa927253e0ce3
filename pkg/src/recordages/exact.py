"""Exact finite-n record statistics by generating-function coefficient extraction.

Notation for a threshold ``j``: ``H_j = sum_{l<=j} f(l) z^l`` collects ages
not exceeding ``j`` and ``T_j = sum_{l>j} f(l) z^l`` the longer ones.  Summing
over the number of records with ``sum_m C(m-1, k-1) x^(m-k) = (1-x)^(-k)``
gives, for the probability that the last element has rank ``k``,

    beta=1:  sum_j q(j) z^j            T_j^(k-1) / (1-H_j)^k
    beta=2:  sum_j f(j) (1-z^j)/(1-z)  T_j^(k-1) / (1-H_j)^k
    beta=3:  Q(z) sum_j f(j) z^j       T_j^(k-1) / (1-H_j)^k,   Q(z) = sum q(n) z^n

and for the distribution function of the k-th largest age, with
``F_0 = 0``,

    beta=2:  F_k(t) = F_{k-1}(t) + A_t T_t^(k-1)/(1-H_t)^k + B_t T_t^(k-2)/(1-H_t)^(k-1)
    beta=3:  F_k(t) = F_{k-1}(t) + Q(z) T_t^(k-1)/(1-H_t)^k

where ``A_t[i] = q(i) - q(t)`` (``i < t``) and ``B_t[i] = q(max(i, t))``
are the straddling-interval weights split at ``t``.  Expectations follow
from ``E L = sum_{t<n} (1 - F(t, n))``; for beta=1 the increments of
``E L_k`` are exactly ``p_k``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .ages import AgeRecord, check_beta, kth_largest, rank_of_last
from .errors import DivergenceError, ResourceLimitError
from .holding_time import build_law
from .series import convolve_trunc, recip_one_minus_array

__all__ = [
    "ExactTable",
    "LaplaceDiagnostic",
    "p_exact",
    "EL_exact",
    "cdf_exact",
    "capped_EL_exact",
    "laplace_diag",
    "rank_of_last",
    "kth_largest",
    "AgeRecord",
    "DEFAULT_MAX_N",
]

DEFAULT_MAX_N = 2048


@dataclass(frozen=True)
class ExactTable:
    beta: int
    k: int
    quantity: str  # "p" or "EL"
    values: np.ndarray  # indexed by n = 0..N

    @property
    def n_max(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, n):
        return self.values[n]


def _check(beta: int, k: int, N: int, max_n: int | None) -> None:
    check_beta(beta)
    if k < 1:
        raise ValueError("k must be >= 1")
    if N < 0:
        raise ValueError("N must be nonnegative")
    ceiling = DEFAULT_MAX_N if max_n is None else max_n
    if N > ceiling:
        raise ResourceLimitError(f"N={N} exceeds the exact-engine ceiling {ceiling}")


def _tables(N: int):
    law = build_law(N + 1)
    return law.q, law.f


def _rank_term(f: np.ndarray, j: int, k: int, size: int) -> np.ndarray:
    """Coefficients ``0..size-1`` of ``T_j^(k-1) / (1-H_j)^k`` with the factor
    ``z^((k-1)(j+1))`` of ``T_j^(k-1)`` taken out."""
    head = f[: j + 1]
    out = recip_one_minus_array(head, size, times=k)
    if k > 1:
        tail = f[j + 1 : j + 1 + size]  # T_j / z^(j+1)
        tk = np.zeros(size)
        tk[0] = 1.0
        for _ in range(k - 1):
            tk = convolve_trunc(tk, tail, size)
        out = convolve_trunc(out, tk, size)
    return out


def p_exact(beta: int, k: int, N: int, *, max_n: int | None = None) -> ExactTable:
    """Probabilities ``p_k^(beta)(n)`` for ``n = 0..N``."""
    _check(beta, k, N, max_n)
    q, f = _tables(N)
    size = N + 1
    acc = np.zeros(size)

    if beta == 1:
        for j in range(size):
            offset = j + (k - 1) * (j + 1)
            if offset > N:
                break
            acc[offset:] += q[j] * _rank_term(f, j, k, size - offset)
    elif beta == 3:
        for j in range(1, size):
            offset = j + (k - 1) * (j + 1)
            if offset > N:
                break
            acc[offset:] += f[j] * _rank_term(f, j, k, size - offset)
        acc = convolve_trunc(acc, q[:size], size)
    else:
        for j in range(1, size):
            offset = (k - 1) * (j + 1)
            if offset > N:
                break
            body = _rank_term(f, j, k, size - offset)
            # f(j) (1 + z + ... + z^(j-1))
            window = np.zeros(size - offset)
            window[: min(j, size - offset)] = f[j]
            acc[offset:] += convolve_trunc(body, window, size - offset)
        if k == 1:
            # straddling lengths beyond N: only H_N and the all-ones window survive truncation
            body = recip_one_minus_array(f[: N + 1], size)
            acc += q[N] * np.cumsum(body)

    return ExactTable(beta, k, "p", acc)


def _cdf_rows(beta: int, k: int, N: int, q: np.ndarray, f: np.ndarray) -> np.ndarray:
    """``F_k(t, n)`` for ``t = 0..N-1`` (rows) and ``n = 0..N`` (columns)."""
    size = N + 1
    rows = np.zeros((max(N, 0), size))
    idx = np.arange(size)
    for t in range(N):
        inv = [None, recip_one_minus_array(f[: t + 1], size)]  # inv[i] = (1-H_t)^(-i)
        for _ in range(k - 1):
            inv.append(recip_one_minus_array(f[: t + 1], size, times=1, start=inv[-1]))
        tail = np.zeros(size)
        tail[t + 1 :] = f[t + 1 : size]
        tpow = [np.eye(1, size).ravel()]  # tpow[i] = T_t^i
        for _ in range(k - 1):
            tpow.append(convolve_trunc(tpow[-1], tail, size))

        total = np.zeros(size)
        if beta == 3:
            for i in range(k):
                total += convolve_trunc(tpow[i], inv[i + 1], size)
            total = convolve_trunc(total, q[:size], size)
        else:
            a_t = np.where(idx < t, q[:size] - q[t], 0.0)
            b_t = q[np.maximum(idx, t)]
            for i in range(k):
                total += convolve_trunc(a_t, convolve_trunc(tpow[i], inv[i + 1], size), size)
            for i in range(k - 1):
                total += convolve_trunc(b_t, convolve_trunc(tpow[i], inv[i + 1], size), size)
        rows[t] = total
    return rows


def cdf_exact(beta: int, k: int, N: int, *, max_n: int | None = None) -> np.ndarray:
    """Matrix ``F[t, n] = P(L_k^(beta)(n) <= t)`` for ``t, n = 0..N``.

    Rows with ``t >= n`` equal one (for beta=2 only when ``k >= 2``).
    """
    _check(beta, k, N, max_n)
    if beta == 1:
        raise ValueError("the distribution-function recursion covers beta=2 and beta=3")
    q, f = _tables(N)
    rows = _cdf_rows(beta, k, N, q, f)
    out = np.ones((N + 1, N + 1))
    out[:N] = rows
    return out


def EL_exact(beta: int, k: int, N: int, *, max_n: int | None = None) -> ExactTable:
    """Expectations ``E L_k^(beta)(n)`` for ``n = 0..N``."""
    _check(beta, k, N, max_n)
    if beta == 2 and k == 1:
        raise DivergenceError("the longest beta=2 age (straddling interval) has infinite mean")
    if beta == 1:
        p = p_exact(1, k, N, max_n=max_n).values
        values = np.concatenate(([0.0], np.cumsum(p[:-1])))
        return ExactTable(1, k, "EL", values)
    q, f = _tables(N)
    rows = _cdf_rows(beta, k, N, q, f)
    t = np.arange(N)[:, None]
    n = np.arange(N + 1)[None, :]
    values = np.where(t < n, 1.0 - rows, 0.0).sum(axis=0)
    return ExactTable(beta, k, "EL", values)


def capped_EL_exact(beta: int, k: int, N: int, cap: int, *, max_n: int | None = None) -> ExactTable:
    """``E min(L_k^(beta)(n), cap)`` for ``n = 0..N``; finite even for the longest beta=2 age."""
    _check(beta, k, N, max_n)
    if beta == 1:
        raise ValueError("use EL_exact for beta=1, whose ages never exceed n")
    if not 0 <= cap <= N:
        raise ValueError("cap must lie in 0..N")
    q, f = _tables(N)
    rows = _cdf_rows(beta, k, N, q, f)
    return ExactTable(beta, k, "EL", (1.0 - rows[:cap]).sum(axis=0))


@dataclass(frozen=True)
class LaplaceDiagnostic:
    beta: int
    k: int
    quantity: str
    s: float
    empirical_sum: float
    predicted: float
    truncated: bool

    @property
    def ratio(self) -> float:
        return self.empirical_sum / self.predicted if self.predicted else math.nan


def laplace_diag(
    beta: int,
    k: int,
    s: float,
    N: int,
    *,
    quantity: str = "p",
    constant: float | None = None,
    max_n: int | None = None,
) -> LaplaceDiagnostic:
    """Laplace sum ``sum_{n<=N} value(n) e^(-s n)`` next to its small-s prediction.

    Predictions: ``c/s`` for p (beta=1, 2), ``s^(-1/2) ln(1/sqrt(s))`` for
    p with beta=3, ``c/s^2`` for EL.  ``constant`` defaults to the quadrature
    value of the matching limit constant.
    """
    if s <= 0:
        raise ValueError("s must be positive")
    if quantity == "p":
        table = p_exact(beta, k, N, max_n=max_n)
    elif quantity == "EL":
        table = EL_exact(beta, k, N, max_n=max_n)
    else:
        raise ValueError("quantity must be 'p' or 'EL'")
    weights = np.exp(-s * np.arange(N + 1))
    total = float(np.dot(table.values, weights))
    truncated = bool(weights[-1] >= 1e-12 * max(total, np.finfo(float).tiny))
    if truncated:
        warnings.warn(
            f"Laplace sum truncated at N={N}: e^(-sN)={weights[-1]:.3g} is not below 1e-12 of the sum",
            RuntimeWarning,
            stacklevel=2,
        )

    if quantity == "p" and beta == 3:
        predicted = math.log(1.0 / math.sqrt(s)) / math.sqrt(s)
    else:
        if constant is None:
            from .gamma_quad import ConstantSpec, constant as quad_constant

            family = "p" if quantity == "p" else "C"
            constant = quad_constant(ConstantSpec(family, beta, k)).value
        predicted = constant / s if quantity == "p" else constant / s**2
    return LaplaceDiagnostic(beta, k, quantity, s, total, predicted, truncated)
