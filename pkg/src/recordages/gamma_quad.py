"""Incomplete gamma functions of order +-1/2 and the limit constants.

The five constant families are integrals over ``(0, inf)`` built from
``Gamma(-1/2, x)`` and ``D(x) = x^(-1/2) e^(-x) + gamma(1/2, x)``.
Everything is evaluated through the rescaled quantities

    Dh(x) = sqrt(x) D(x)               = e^(-x) + sqrt(pi x) erf(sqrt x)
    Gh(x) = sqrt(x) Gamma(-1/2, x)     = 2 e^(-x) - 2 sqrt(pi x) erfc(sqrt x)
    r(x)  = Gamma(-1/2, x) / (2 D(x))  = Gh / (2 Dh),   0 < r < 1

which are bounded near zero, so with ``x = u^2`` every integrand is smooth
on ``[0, U]``.  In these terms

    p_k^(1) = C_k^(1) = int e^(-x)/Dh r^(k-1)
    p_k^(2)           = int (1-e^(-x))/(2 x Dh) r^(k-1)
    C_k^(2)           = int r^(k-1)/Dh          (k >= 2; divergent for k = 1)
    C_k^(3)           = int r^k
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .ages import check_beta
from .errors import DivergenceError, QuadratureError

SQRT_PI = math.sqrt(math.pi)
_ERF_SWITCH = 2.5  # erf: series below, 1 - erfc above
_ERFC_SWITCH = 1.0  # erfc: 1 - erf below, continued fraction above
_SERIES_TERMS = 90
_CF_DEPTH = 200


# ---------------------------------------------------------------- erf / erfc

def _erf_series(x: np.ndarray) -> np.ndarray:
    # erf(x) = 2/sqrt(pi) e^(-x^2) sum_n 2^n x^(2n+1) / (2n+1)!!, all terms positive
    x2 = 2.0 * x * x
    term = x.copy()
    total = x.copy()
    for n in range(1, _SERIES_TERMS):
        term = term * x2 / (2 * n + 1)
        total = total + term
    return 2.0 / SQRT_PI * np.exp(-x * x) * total


def _erfc_cf(x: np.ndarray) -> np.ndarray:
    """``sqrt(pi) e^(x^2) erfc(x)`` by backward evaluation of the Laplace continued fraction."""
    # 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    tail = np.zeros_like(x)
    for n in range(_CF_DEPTH, 0, -1):
        tail = (0.5 * n) / (x + tail)
    return 1.0 / (x + tail)


def erf(x):
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    ax = np.abs(x)
    small = ax < _ERF_SWITCH
    out[small] = _erf_series(ax[small])
    big = ~small
    out[big] = 1.0 - np.exp(-ax[big] ** 2) * _erfc_cf(ax[big]) / SQRT_PI
    out = np.copysign(out, x)
    return out if out.ndim else float(out)


def erfc(x):
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = x < _ERFC_SWITCH
    out[small] = 1.0 - erf(x[small])
    big = ~small
    out[big] = np.exp(-x[big] ** 2) * _erfc_cf(x[big]) / SQRT_PI
    return out if out.ndim else float(out)


# ------------------------------------------------------- incomplete gammas

def _check_positive(x: np.ndarray) -> None:
    if np.any(~(x > 0)):
        raise ValueError("incomplete gamma is only evaluated for x > 0")


def _scaled_upper_minus_half(x: np.ndarray) -> np.ndarray:
    """``sqrt(x) Gamma(-1/2, x)`` from the integration-by-parts identity."""
    y = np.sqrt(x)
    out = np.empty_like(x)
    small = y < _ERFC_SWITCH
    out[small] = 2.0 * np.exp(-x[small]) - 2.0 * SQRT_PI * y[small] * erfc(y[small])
    big = ~small
    out[big] = 2.0 * np.exp(-x[big]) * (1.0 - y[big] * _erfc_cf(y[big]))
    return out


def inc_gamma(nu: float, x, kind: str = "upper"):
    """Upper ``Gamma(nu, x)`` or lower ``gamma(nu, x)`` for ``nu`` in {-1/2, 1/2}.

    ``gamma(-1/2, x)`` diverges and is rejected.
    """
    arr = np.asarray(x, dtype=float)
    _check_positive(arr)
    if kind not in ("upper", "lower"):
        raise ValueError("kind must be 'upper' or 'lower'")
    if nu == 0.5:
        out = SQRT_PI * (erfc(np.sqrt(arr)) if kind == "upper" else erf(np.sqrt(arr)))
    elif nu == -0.5:
        if kind == "lower":
            raise ValueError("the lower incomplete gamma of order -1/2 diverges")
        out = _scaled_upper_minus_half(np.atleast_1d(arr)).reshape(arr.shape) / np.sqrt(arr)
    else:
        raise ValueError("only nu = 1/2 and nu = -1/2 are supported")
    out = np.asarray(out, dtype=float)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class GammaPair:
    """Evaluators for the order-1/2 pair and the derived order -1/2 function."""

    def upper(self, nu: float, x):
        return inc_gamma(nu, x, "upper")

    def lower(self, nu: float, x):
        return inc_gamma(nu, x, "lower")


def _rescaled(x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``Dh``, ``Gh`` and ``r`` on an array of positive x."""
    sx = np.sqrt(x)
    dh = np.exp(-x) + SQRT_PI * sx * erf(sx)
    gh = _scaled_upper_minus_half(x)
    return dh, gh, gh / (2.0 * dh)


# ----------------------------------------------------------------- quadrature

# Gauss-Kronrod 7/15 nodes on [-1, 1] (QUADPACK qk15)
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate((-_XGK[:-1], _XGK[::-1]))
_KRONROD = np.concatenate((_WGK[:-1], _WGK[::-1]))
_GAUSS = np.zeros(15)
_GAUSS[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate((_WG[:-1], _WG[::-1]))


def _gk15(fn: Callable[[np.ndarray], np.ndarray], a: float, b: float) -> tuple[float, float]:
    half = 0.5 * (b - a)
    vals = fn(0.5 * (a + b) + half * _NODES)
    k = half * float(np.dot(_KRONROD, vals))
    g = half * float(np.dot(_GAUSS, vals))
    return k, abs(k - g)


def adaptive_integrate(
    fn: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    abs_tol: float = 1e-12,
    max_panels: int = 2000,
) -> tuple[float, float]:
    """Globally adaptive G7/K15 bisection; returns (value, error estimate).

    ``fn`` must accept an array of abscissae.  Raises QuadratureError when the
    panel budget runs out before the summed error estimate drops below
    ``abs_tol``.
    """
    val, err = _gk15(fn, a, b)
    heap = [(-err, a, b, val)]
    total, total_err = val, err
    panels = 1
    while total_err > abs_tol:
        if panels >= max_panels:
            raise QuadratureError(
                f"no convergence on [{a}, {b}] after {panels} panels (error {total_err:.3g})"
            )
        neg_err, lo, hi, v = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        v1, e1 = _gk15(fn, lo, mid)
        v2, e2 = _gk15(fn, mid, hi)
        total += v1 + v2 - v
        total_err += e1 + e2 + neg_err
        heapq.heappush(heap, (-e1, lo, mid, v1))
        heapq.heappush(heap, (-e2, mid, hi, v2))
        panels += 1
    # resum to shed the drift of the running total
    total = math.fsum(item[3] for item in heap)
    total_err = math.fsum(-item[0] for item in heap)
    return total, total_err


# ------------------------------------------------------------------ constants

@dataclass(frozen=True)
class ConstantSpec:
    family: str  # "p" or "C"
    beta: int
    k: int
    abs_tol: float = 1e-10

    def __post_init__(self):
        if self.family not in ("p", "C"):
            raise ValueError("family must be 'p' or 'C'")
        check_beta(self.beta)
        if self.family == "p" and self.beta == 3:
            raise ValueError("p_k^(3) has no finite limit constant (it decays like ln n / sqrt n)")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")

    @property
    def divergent(self) -> bool:
        return self.family == "C" and self.beta == 2 and self.k == 1

    @property
    def label(self) -> str:
        return f"{self.family}_{self.k}^({self.beta})"


@dataclass(frozen=True)
class ConstantValue:
    spec: ConstantSpec
    value: float
    abs_err: float


def _integrand(spec: ConstantSpec) -> Callable[[np.ndarray], np.ndarray]:
    k = spec.k
    fam = "p" if spec.family == "C" and spec.beta == 1 else spec.family

    def in_x(x: np.ndarray) -> np.ndarray:
        dh, _, r = _rescaled(x)
        if fam == "p" and spec.beta == 1:
            return np.exp(-x) / dh * r ** (k - 1)
        if fam == "p" and spec.beta == 2:
            return -np.expm1(-x) / (2.0 * x * dh) * r ** (k - 1)
        if spec.beta == 2:
            return r ** (k - 1) / dh
        return r**k

    return _in_u(in_x)


def _in_u(in_x: Callable[[np.ndarray], np.ndarray]) -> Callable[[np.ndarray], np.ndarray]:
    def fn(u: np.ndarray) -> np.ndarray:
        out = np.zeros_like(u)
        pos = u > 0
        x = u[pos] ** 2
        out[pos] = 2.0 * u[pos] * in_x(x)
        return out

    return fn


def _cutoff(abs_tol: float) -> float:
    # every integrand here except p_1^(2) is below e^(-x) once x >= 1
    return max(1.0, math.log(10.0 / abs_tol)) + 1.0


def constant(spec: ConstantSpec) -> ConstantValue:
    """Evaluate one limit constant to absolute accuracy ``spec.abs_tol``.

    Raises DivergenceError for ``C_1^(2)`` and QuadratureError if the
    adaptive rule runs out of panels.
    """
    if spec.divergent:
        raise DivergenceError("C_1^(2) is infinite: the straddling interval has infinite mean")
    x_max = _cutoff(spec.abs_tol)
    fn = _integrand(spec)
    value, err = adaptive_integrate(fn, 0.0, math.sqrt(x_max), abs_tol=spec.abs_tol / 10)
    tail_bound = math.exp(-x_max)
    if spec.family == "p" and spec.beta == 2 and spec.k == 1:
        # integrand ~ x^(-3/2) / (2 sqrt(pi)) up to O(e^(-x))
        value += 1.0 / math.sqrt(math.pi * x_max)
    return ConstantValue(spec, value, err + tail_bound)


def table1(k_max: int = 6, abs_tol: float = 1e-10) -> dict[tuple[str, int, int], float]:
    """The p^(1), p^(2), C^(2), C^(3) columns for ``k = 1..k_max`` (C_1^(2) -> inf)."""
    out: dict[tuple[str, int, int], float] = {}
    for family, beta in (("p", 1), ("p", 2), ("C", 2), ("C", 3)):
        for k in range(1, k_max + 1):
            spec = ConstantSpec(family, beta, k, abs_tol)
            out[(family, beta, k)] = math.inf if spec.divergent else constant(spec).value
    return out


@dataclass(frozen=True)
class SumIdentities:
    p1_partial_sums: tuple[float, ...]  # sum_{k<=K} p_k^(1), K = 1..len
    c2_sum: float  # sum_{k>=2} C_k^(2)
    c3_sum: float  # sum_{k>=1} C_k^(3)
    c2_sum_err: float
    c3_sum_err: float


def sum_identities(k_max: int = 40, abs_tol: float = 1e-11) -> SumIdentities:
    """Partial sums of p_k^(1) and the geometric-series integrals for C^(2), C^(3).

    Summing ``r^(k-1)`` under the integral sign gives

        sum_{k>=2} C_k^(2) = int r/sqrt(pi x) dx
        sum_{k>=1} C_k^(3) = int Gh/(2 sqrt(pi x)) dx    (= Gamma(1/2)/(2 sqrt pi) = 1/2)
    """
    partial, running = [], 0.0
    for k in range(1, k_max + 1):
        running += constant(ConstantSpec("p", 1, k, abs_tol)).value
        partial.append(running)

    x_max = _cutoff(abs_tol)

    def c2(x):
        _, _, r = _rescaled(x)
        return r / np.sqrt(math.pi * x)

    def c3(x):
        _, gh, _ = _rescaled(x)
        return gh / (2.0 * np.sqrt(math.pi * x))

    c2_val, c2_err = adaptive_integrate(_in_u(c2), 0.0, math.sqrt(x_max), abs_tol=abs_tol / 10)
    c3_val, c3_err = adaptive_integrate(_in_u(c3), 0.0, math.sqrt(x_max), abs_tol=abs_tol / 10)
    tail = math.exp(-x_max)
    return SumIdentities(tuple(partial), c2_val, c3_val, c2_err + tail, c3_err + tail)
