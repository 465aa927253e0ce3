import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from recordages.holding_time import build_law
from recordages.series import TruncSeries, recip_one_minus_array

N = 12
coeffs = st.lists(st.floats(0.0, 10.0), min_size=N + 1, max_size=N + 1).map(TruncSeries)


def test_basic_operations():
    assert TruncSeries([1, 0, 0]).shift(1) == TruncSeries([0, 1, 0])
    a = TruncSeries([1.5, -2, 3])
    assert a + (-a) == TruncSeries.zero(2)
    assert TruncSeries([1, 1, 1]).scale(0.5) == TruncSeries([0.5, 0.5, 0.5])


def test_mixed_degrees_pad():
    s = TruncSeries([1, 2]) + TruncSeries([1, 1, 1, 1])
    assert s.degree == 3 and s.coeffs.tolist() == [2, 3, 1, 1]


def test_products():
    geom = TruncSeries(np.ones(6))
    assert geom * TruncSeries([1, -1, 0, 0, 0, 0]) == TruncSeries.one(5)
    f = TruncSeries(build_law(8).f)
    assert (f * f)[2] == 0.25
    assert geom * TruncSeries.zero(5) == TruncSeries.zero(5)


def test_reciprocal():
    r = TruncSeries([0, 0.5, 0, 0, 0]).recip_one_minus()
    assert r.coeffs.tolist() == [1, 0.5, 0.25, 0.125, 0.0625]
    assert TruncSeries.zero(3).recip_one_minus() == TruncSeries.one(3)
    f = TruncSeries(build_law(10).f)
    assert f.recip_one_minus()[1] == 0.5
    with pytest.raises(ValueError):
        TruncSeries([1, 0.5]).recip_one_minus()


def test_powers():
    a = TruncSeries([0.3, 0.2, 0.1])
    assert a**0 == TruncSeries.one(2)
    assert a**1 == a
    assert TruncSeries([0, 1, 0]) ** 2 == TruncSeries([0, 0, 1])
    assert (a**5).allclose(a * a * a * a * a)


@settings(max_examples=60)
@given(coeffs, coeffs, coeffs)
def test_ring_axioms(a, b, c):
    assert ((a * b) * c).allclose(a * (b * c), rtol=1e-12, atol=1e-300)
    assert (a * (b + c)).allclose(a * b + a * c, rtol=1e-12, atol=1e-300)


@settings(max_examples=60)
@given(coeffs, coeffs)
def test_truncation_is_causal(a, b):
    """Coefficient j of a product only sees inputs 0..j."""
    prod = a * b
    cut = 5
    head = TruncSeries(a.coeffs[: cut + 1]) * TruncSeries(b.coeffs[: cut + 1])
    np.testing.assert_allclose(prod.coeffs[: cut + 1], head.coeffs, rtol=1e-14)


@settings(max_examples=60)
@given(st.lists(st.floats(0.0, 0.2), min_size=N, max_size=N))
def test_reciprocal_inverts(tail):
    h = TruncSeries([0.0] + tail)
    r = h.recip_one_minus()
    assert np.all(r.coeffs >= 0)
    np.testing.assert_allclose((r * (TruncSeries.one(N) - h)).coeffs, TruncSeries.one(N).coeffs, atol=1e-12)


def test_renewal_identity():
    """(1 - z) Q(z) = 1 - F(z), hence (1 - z) Q(z) / (1 - F(z)) = 1."""
    M = 300
    law = build_law(M)
    q, f = TruncSeries(law.q), TruncSeries(law.f)
    one_minus_z = TruncSeries([1, -1], degree=M)
    assert (one_minus_z * q).allclose(TruncSeries.one(M) - f, rtol=1e-12, atol=1e-15)
    renewal = f.recip_one_minus()
    assert (renewal * one_minus_z * q).allclose(TruncSeries.one(M), rtol=0, atol=1e-12)


def test_recip_with_start_and_power():
    h = np.array([0, 0.25, 0.25, 0, 0, 0])
    start = np.array([1.0, 2.0, 0, 0, 0, 0])
    got = recip_one_minus_array(h, 6, times=2, start=start)
    r = TruncSeries(h).recip_one_minus()
    np.testing.assert_allclose(got, (TruncSeries(start) * r * r).coeffs, rtol=1e-14)
