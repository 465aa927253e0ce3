import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import TABLE1
from recordages.errors import DivergenceError, QuadratureError
from recordages.gamma_quad import (
    ConstantSpec,
    _integrand,
    adaptive_integrate,
    constant,
    erf,
    erfc,
    inc_gamma,
    sum_identities,
    table1,
)

mpmath = pytest.importorskip("mpmath")
mpmath.mp.dps = 40
SQRT_PI = math.sqrt(math.pi)


@given(st.floats(-6.0, 6.0))
def test_erf_against_mpmath(x):
    ref = float(mpmath.erf(x))
    assert erf(x) == pytest.approx(ref, rel=1e-13, abs=1e-300)


@given(st.floats(0.0, 26.0))
def test_erfc_against_mpmath(x):
    ref = float(mpmath.erfc(x))
    assert erfc(x) == pytest.approx(ref, rel=1e-13)


def test_erf_is_vectorised_and_odd():
    xs = np.linspace(-4, 4, 33)
    np.testing.assert_allclose(erf(xs), -erf(-xs), rtol=0, atol=0)
    np.testing.assert_allclose(erf(xs) + erfc(xs), 1.0, atol=1e-15)


def test_incomplete_gamma_identities():
    assert inc_gamma(0.5, 1.0, "lower") + inc_gamma(0.5, 1.0) == pytest.approx(SQRT_PI, abs=1e-15)
    by_parts = 2 * math.exp(-1) + 2 * inc_gamma(0.5, 1.0, "lower") - 2 * SQRT_PI
    assert abs(inc_gamma(-0.5, 1.0) - by_parts) < 1e-13
    assert abs(inc_gamma(0.5, 50.0, "lower") - SQRT_PI) < 1e-13


@pytest.mark.parametrize("x", [1e-8, 0.03, 0.7, 1.0, 2.2, 9.0, 40.0])
def test_upper_minus_half_against_mpmath(x):
    ref = float(mpmath.gammainc(-0.5, x))
    assert inc_gamma(-0.5, x) == pytest.approx(ref, rel=1e-12)


def test_incomplete_gamma_rejects():
    with pytest.raises(ValueError):
        inc_gamma(0.5, 0.0)
    with pytest.raises(ValueError):
        inc_gamma(-0.5, 1.0, "lower")
    with pytest.raises(ValueError):
        inc_gamma(1.5, 1.0)


def test_quadrature_rule():
    val, err = adaptive_integrate(np.cos, 0.0, math.pi / 2)
    assert val == pytest.approx(1.0, abs=1e-14) and err < 1e-12
    val, _ = adaptive_integrate(lambda u: 2 * np.exp(-u * u), 0.0, 8.0)
    assert val == pytest.approx(SQRT_PI, abs=1e-13)
    with pytest.raises(QuadratureError):
        adaptive_integrate(lambda u: np.sign(u - 0.3) / np.abs(u - 0.3) ** 0.9, 0.0, 1.0, max_panels=20)


def test_reference_constants():
    got = table1(6)
    assert set(got) == set(TABLE1)
    for key, ref in TABLE1.items():
        if math.isinf(ref):
            assert math.isinf(got[key])
        else:
            assert abs(got[key] - ref) < 2e-5, key


def test_named_examples():
    assert abs(constant(ConstantSpec("p", 1, 1)).value - 0.62651) < 2e-5
    assert abs(constant(ConstantSpec("C", 3, 1)).value - 0.24174) < 2e-5
    with pytest.raises(DivergenceError):
        constant(ConstantSpec("C", 2, 1))
    with pytest.raises(ValueError):
        ConstantSpec("p", 3, 1)


def test_against_scipy_quad():
    integrate = pytest.importorskip("scipy.integrate")
    for spec in (ConstantSpec("p", 1, 2), ConstantSpec("C", 2, 3), ConstantSpec("C", 3, 4)):
        fn = _integrand(spec)
        ref, _ = integrate.quad(lambda u: float(fn(np.array([u]))[0]), 0, 6, epsabs=1e-13, limit=200)
        assert constant(spec).value == pytest.approx(ref, abs=1e-10)


def test_integrands_finite_at_origin():
    for key in TABLE1:
        spec = ConstantSpec(*key)
        if not spec.divergent:
            vals = _integrand(spec)(np.array([1e-6, 1e-3]))
            assert np.all(np.isfinite(vals))


def test_shape_properties():
    got = table1(6)
    for family, beta in (("p", 1), ("C", 3)):
        col = [got[(family, beta, k)] for k in range(1, 7)]
        assert all(a > b for a, b in zip(col, col[1:]))
    for k in range(2, 7):
        assert got[("C", 2, k)] <= 1 / (k - 1)
        assert got[("C", 3, k)] <= 1 / (k - 1)


def test_sum_identities():
    s = sum_identities(40)
    assert abs(s.c2_sum - 0.43067) < 2e-5
    assert abs(s.c3_sum - 0.5) < 1e-8
    sums = s.p1_partial_sums
    assert 0.97 <= sums[-1] <= 1.0
    assert all(a < b for a, b in zip(sums, sums[1:]))


def test_c2_partial_sums_approach_integral():
    """Positive terms: partial sums increase toward the integral form from below."""
    total = sum_identities(5).c2_sum
    terms = [constant(ConstantSpec("C", 2, k, 1e-12)).value for k in range(2, 81)]
    partial = np.cumsum(terms)
    assert np.all(np.diff(partial) > 0)
    assert partial[-1] < total
    assert total - partial[-1] < 0.5 * (total - partial[20])
