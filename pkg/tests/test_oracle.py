from fractions import Fraction

import pytest

from recordages import oracle
from recordages.errors import DivergenceError, ResourceLimitError


def test_n1_configurations():
    confs = oracle.enumerate(1, 1, exact=True)
    got = {(c.completed, c.last): c.weight for c in confs}
    assert got == {((), 1): Fraction(1, 2), ((1,), 0): Fraction(1, 2)}


def test_n2_weights():
    weights = sorted(c.weight for c in oracle.enumerate(1, 2, exact=True))
    assert weights == sorted(map(Fraction, ["3/8", "1/4", "1/8", "1/4"]))


@pytest.mark.parametrize("beta", [1, 2, 3])
def test_total_weight_is_one(beta):
    for n in range(0, 13):
        assert oracle.total_weight(beta, n, exact=True) == 1


def test_partition_law():
    assert oracle.partition_law_beta1(1, exact=True) == {(1,): 1}
    assert oracle.partition_law_beta1(2, exact=True) == {(2,): Fraction(1, 2), (1, 1): Fraction(1, 2)}
    for n in range(1, 9):
        law = oracle.partition_law_beta1(n, exact=True)
        assert all(sum(parts) == n for parts in law)
        assert sum(law.values()) == 1


def test_rank_masses():
    for n in range(0, 11):
        for beta in (1, 2):
            assert sum(oracle.oracle_p(beta, k, n, exact=True) for k in range(1, n + 3)) == 1
        empty = sum(c.weight for c in oracle.enumerate(3, n, exact=True) if not c.completed)
        assert sum(oracle.oracle_p(3, k, n, exact=True) for k in range(1, n + 2)) == 1 - empty


def test_rational_and_double_agree():
    for beta in (1, 2, 3):
        for n in range(0, 15):
            for k in range(1, 5):
                exact = oracle.oracle_p(beta, k, n, exact=True)
                assert abs(float(exact) - oracle.oracle_p(beta, k, n)) < 1e-14
                if (beta, k) != (2, 1):
                    exact = oracle.oracle_EL(beta, k, n, exact=True)
                    assert abs(float(exact) - oracle.oracle_EL(beta, k, n)) < 1e-14 * max(1, n)


def test_last_record_time_half():
    """sum_k E L_k^(3)(n) is the expected time of the last record, n/2."""
    for n in range(0, 15):
        assert sum(oracle.oracle_EL(3, k, n, exact=True) for k in range(1, n + 1)) == Fraction(n, 2)


def test_kth_largest_bound():
    for beta in (1, 2, 3):
        for n in range(1, 13):
            for c in oracle.enumerate(beta, n):
                top = sorted(c.ages, reverse=True)
                for k in range(2, len(top) + 1):
                    assert top[k - 1] * (k - 1) <= n


def test_covering_interval_rank():
    # n=1: the covering interval is the whole partition {1}
    assert oracle.oracle_p_covering(1, 1, exact=True) == 1
    assert sum(oracle.oracle_p_covering(k, 6, exact=True) for k in range(1, 8)) == 1


def test_errors():
    with pytest.raises(DivergenceError):
        oracle.oracle_EL(2, 1, 3)
    with pytest.raises(ResourceLimitError):
        oracle.enumerate(1, oracle.MAX_N + 1)
    with pytest.raises(ValueError):
        oracle.enumerate(4, 2)
