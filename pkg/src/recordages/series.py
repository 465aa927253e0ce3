"""Truncated formal power series with float coefficients.

Every series that shows up in the record-age generating functions has
nonnegative coefficients, so the schoolbook Cauchy product and the
renewal recursion for ``1/(1-h)`` never cancel and plain doubles suffice.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy.signal import lfilter

__all__ = ["TruncSeries"]


class TruncSeries:
    """Power series ``sum c[j] z**j`` kept for degrees ``0..N``.

    Mixed-degree operations zero-pad to the larger bound.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence[float] | np.ndarray, degree: int | None = None):
        c = np.array(coeffs, dtype=float).ravel()
        if degree is not None:
            if degree < 0:
                raise ValueError("degree bound must be nonnegative")
            out = np.zeros(degree + 1)
            m = min(len(c), degree + 1)
            out[:m] = c[:m]
            c = out
        elif len(c) == 0:
            c = np.zeros(1)
        c.flags.writeable = False
        self.coeffs = c

    @classmethod
    def zero(cls, degree: int) -> "TruncSeries":
        return cls(np.zeros(degree + 1))

    @classmethod
    def one(cls, degree: int) -> "TruncSeries":
        return cls.monomial(0, degree)

    @classmethod
    def monomial(cls, power: int, degree: int, coeff: float = 1.0) -> "TruncSeries":
        c = np.zeros(degree + 1)
        if power <= degree:
            c[power] = coeff
        return cls(c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __len__(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, j):
        return self.coeffs[j]

    def __repr__(self) -> str:
        return f"TruncSeries({self.coeffs.tolist()!r})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, TruncSeries):
            return NotImplemented
        a, b = _padded(self, other)
        return bool(np.array_equal(a, b))

    __hash__ = None  # type: ignore[assignment]

    def allclose(self, other: "TruncSeries", rtol: float = 1e-12, atol: float = 0.0) -> bool:
        a, b = _padded(self, other)
        return bool(np.allclose(a, b, rtol=rtol, atol=atol))

    def __add__(self, other: "TruncSeries") -> "TruncSeries":
        a, b = _padded(self, other)
        return TruncSeries(a + b)

    def __sub__(self, other: "TruncSeries") -> "TruncSeries":
        a, b = _padded(self, other)
        return TruncSeries(a - b)

    def __neg__(self) -> "TruncSeries":
        return TruncSeries(-self.coeffs)

    def scale(self, factor: float) -> "TruncSeries":
        return TruncSeries(self.coeffs * factor)

    def shift(self, amount: int) -> "TruncSeries":
        """Multiply by ``z**amount``; degrees beyond the bound are dropped."""
        if amount < 0:
            raise ValueError("shift amount must be nonnegative")
        n = len(self.coeffs)
        c = np.zeros(n)
        if amount < n:
            c[amount:] = self.coeffs[: n - amount]
        return TruncSeries(c)

    def __mul__(self, other):
        if isinstance(other, TruncSeries):
            return mul(self, other)
        return self.scale(float(other))

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "TruncSeries":
        return power(self, e)

    def recip_one_minus(self) -> "TruncSeries":
        return recip_one_minus(self)


def _padded(a: TruncSeries, b: TruncSeries) -> tuple[np.ndarray, np.ndarray]:
    n = max(len(a), len(b))
    return _pad(a.coeffs, n), _pad(b.coeffs, n)


def _pad(c: np.ndarray, n: int) -> np.ndarray:
    if len(c) == n:
        return c
    out = np.zeros(n)
    out[: len(c)] = c
    return out


def convolve_trunc(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    """First ``n`` coefficients of the Cauchy product of two arrays."""
    a = a[:n]
    b = b[:n]
    if len(a) == 0 or len(b) == 0:
        return np.zeros(n)
    return _pad(np.convolve(a, b)[:n], n)


def recip_one_minus_array(
    h: np.ndarray, n: int, times: int = 1, start: np.ndarray | None = None
) -> np.ndarray:
    """First ``n`` coefficients of ``start * (1 - h)**(-times)``; requires ``h[0] == 0``.

    Runs the renewal recursion ``b[n] = sum_j h[j] b[n-j]`` as an IIR filter.
    ``start`` defaults to the constant series 1.
    """
    if len(h) and h[0] != 0.0:
        raise ValueError("recip_one_minus needs a series with zero constant term")
    den = np.zeros(max(min(len(h), n), 1))
    den[0] = 1.0
    den[1:] = -np.asarray(h[1:n], dtype=float)
    out = np.zeros(n)
    if n == 0:
        return out
    if start is None:
        out[0] = 1.0
    else:
        out[: min(n, len(start))] = start[:n]
    for _ in range(times):
        out = lfilter([1.0], den, out)
    return out


def mul(a: TruncSeries, b: TruncSeries) -> TruncSeries:
    n = max(len(a), len(b))
    return TruncSeries(convolve_trunc(a.coeffs, b.coeffs, n))


def power(a: TruncSeries, e: int) -> TruncSeries:
    if e < 0:
        raise ValueError("exponent must be nonnegative")
    result = TruncSeries.one(a.degree)
    base = a
    while e:
        if e & 1:
            result = mul(result, base)
        e >>= 1
        if e:
            base = mul(base, base)
    return result


def recip_one_minus(h: TruncSeries) -> TruncSeries:
    """``1/(1-h)`` as a truncated series, i.e. the sum of ``h**m`` over ``m >= 0``."""
    return TruncSeries(recip_one_minus_array(h.coeffs, len(h)))
