import math
import warnings

import numpy as np
import pytest

from recordages import oracle
from recordages.errors import DivergenceError, ResourceLimitError
from recordages.exact import EL_exact, capped_EL_exact, cdf_exact, laplace_diag, p_exact

N = 256


@pytest.fixture(scope="module")
def tables():
    p = {(b, k): p_exact(b, k, N).values for b in (1, 2, 3) for k in range(1, 6)}
    el = {(b, k): EL_exact(b, k, N).values for b in (1, 2, 3) for k in range(1, 6) if (b, k) != (2, 1)}
    return p, el


def test_small_examples():
    assert p_exact(1, 1, 0).values[0] == 1.0
    assert p_exact(1, 1, 1)[1] == 0.5 and p_exact(1, 2, 1)[1] == 0.5
    assert p_exact(2, 1, 1)[1] == 1.0
    assert EL_exact(3, 1, 1)[1] == 0.5
    assert EL_exact(1, 1, 1)[1] == 1.0
    assert sum(EL_exact(3, k, 16)[16] for k in range(1, 17)) == pytest.approx(8.0, abs=1e-12)


@pytest.mark.parametrize("beta", [1, 2, 3])
def test_matches_oracle(beta):
    for k in range(1, 5):
        p = p_exact(beta, k, 14).values
        el = None if (beta, k) == (2, 1) else EL_exact(beta, k, 14).values
        for n in range(15):
            assert abs(p[n] - oracle.oracle_p(beta, k, n)) < 1e-10
            if el is not None:
                assert abs(el[n] - oracle.oracle_EL(beta, k, n)) < 1e-10


def test_normalization():
    for beta in (1, 2):
        tot = sum(p_exact(beta, k, 40).values for k in range(1, 42))
        np.testing.assert_allclose(tot, 1.0, atol=1e-10)


def test_cesaro(tables):
    p, el = tables
    for k in range(1, 6):
        np.testing.assert_allclose(np.diff(el[(1, k)]), p[(1, k)][:-1], atol=1e-10)


def test_subadditivity():
    """Capped at T, the top-k sums of beta=2 ages are subadditive in n.

    E L_1^(2) is infinite, so the uncapped inequality is vacuous; the
    path-by-path argument works for min(L_j, T) just as well.
    """
    M = 128
    for k in range(1, 5):
        for cap in (16, M):
            s = sum(capped_EL_exact(2, j, M, cap).values for j in range(1, k + 1))
            grid = np.add.outer(np.arange(M + 1), np.arange(M + 1))
            mask = grid <= M
            lhs = s[np.minimum(grid, M)]
            rhs = s[:, None] + s[None, :]
            assert np.all(lhs[mask] <= rhs[mask] + 1e-9)


def test_capped_matches_oracle():
    for n in range(1, 13):
        direct = sum(c.weight * min(max(c.ages), n) for c in oracle.enumerate(2, n))
        assert capped_EL_exact(2, 1, 14, n)[n] == pytest.approx(direct, abs=1e-12)
    np.testing.assert_allclose(capped_EL_exact(2, 3, 40, 40).values, EL_exact(2, 3, 40).values, atol=1e-12)


def test_bounds_and_signs(tables):
    p, el = tables
    n = np.arange(N + 1)
    for (beta, k), v in p.items():
        assert np.all(v >= 0)
    for (beta, k), v in el.items():
        assert np.all(v >= -1e-12)
        if k >= 2:
            assert np.all(v <= n / (k - 1) + 1e-9)


def test_cdf_is_monotone():
    F = cdf_exact(2, 2, 64)
    assert np.all(np.diff(F, axis=0)[:, 1:] >= -1e-12)
    assert np.all((F >= -1e-12) & (F <= 1 + 1e-12))


def test_convergence_of_p11():
    from recordages.gamma_quad import ConstantSpec, constant

    limit = constant(ConstantSpec("p", 1, 1)).value
    p = p_exact(1, 1, 2048).values
    gaps = [p[n] - limit for n in (128, 256, 512, 1024, 2048)]
    assert all(g > 0 for g in gaps)
    # the approach is O(1/n): each doubling cuts the gap by about four
    for a, b in zip(gaps, gaps[1:]):
        assert 3.5 < a / b < 4.5
    assert abs(p[1024] - 0.62651) < 0.05


def test_log_law_trend():
    p = p_exact(3, 1, 4096, max_n=4096).values
    ratio = {n: p[n] * 2 * math.sqrt(math.pi * n) / math.log(n) for n in (64, 256, 1024, 2048, 4096)}
    assert all(0 < r < 2 for r in ratio.values())
    dist = [abs(ratio[n] - 1) for n in (64, 256, 1024, 4096)]
    assert dist == sorted(dist, reverse=True)


def test_laplace():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        big = laplace_diag(1, 1, 20.0, 64)
    assert big.empirical_sum == pytest.approx(1.0, abs=1e-8)
    with pytest.warns(RuntimeWarning):
        small = laplace_diag(1, 1, 0.01, 2048)
    assert small.truncated
    assert abs(0.01 * small.empirical_sum / 0.62651 - 1) < 0.15
    with pytest.warns(RuntimeWarning):
        d3 = laplace_diag(3, 1, 0.01, 2048)
    assert math.isfinite(d3.ratio) and d3.ratio > 0


def test_errors():
    with pytest.raises(DivergenceError):
        EL_exact(2, 1, 10)
    with pytest.raises(ResourceLimitError):
        p_exact(1, 1, 5000)
    with pytest.raises(ValueError):
        p_exact(1, 0, 10)
    with pytest.raises(ValueError):
        laplace_diag(1, 1, 0.0, 10)
