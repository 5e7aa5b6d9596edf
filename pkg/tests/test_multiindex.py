import itertools
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gradseries.errors import DimensionMismatchError, EnumerationCapError, UsageError
from gradseries import multiindex as mi


def brute_force_order_set(d, k):
    """Independent stars-and-bars oracle: filter the full product grid."""
    return {
        idx for idx in itertools.product(range(k + 1), repeat=d) if sum(idx) == k
    }


def test_order_examples():
    assert mi.order((1, 2, 0)) == 3
    assert mi.order((0, 0, 0)) == 0
    assert mi.order((5,)) == 5


def test_factorial_examples():
    assert mi.factorial((2, 3, 0)) == 12
    assert mi.factorial((0, 0)) == 1
    assert mi.factorial((4,)) == 24


def test_factorial_is_exact_int():
    value = mi.factorial((25, 30))
    assert isinstance(value, int)
    assert value == math.factorial(25) * math.factorial(30)


def test_monomial_examples():
    assert mi.monomial((2.0, 3.0), (1, 2)) == 18.0
    assert mi.monomial((0.0, 7.0), (0, 1)) == 7.0  # 0**0 == 1
    assert mi.monomial((-2.0,), (3,)) == -8.0


def test_monomial_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        mi.monomial((1.0, 2.0), (1,))


def test_enumerate_examples():
    assert set(mi.enumerate_order(3, 2)) == brute_force_order_set(3, 2)
    assert mi.enumerate_order(1, 0) == [(0,)]
    assert len(mi.enumerate_order(2, 3)) == 4
    assert set(mi.enumerate_order(2, 3)) == brute_force_order_set(2, 3)


def test_enumerate_counts_and_uniqueness():
    for d in range(1, 6):
        for k in range(0, 11):
            out = mi.enumerate_order(d, k)
            assert len(out) == math.comb(k + d - 1, d - 1)
            assert len(set(out)) == len(out)
            assert all(mi.order(a) == k for a in out)
            assert all(len(a) == d for a in out)


def test_enumerate_deterministic_order():
    out = mi.enumerate_order(3, 4)
    # first coordinate descending, recursively: reverse-lexicographic
    assert out == sorted(out, key=lambda a: tuple(-c for c in a))
    assert out == mi.enumerate_order(3, 4)


def test_enumerate_cap():
    with pytest.raises(EnumerationCapError):
        mi.enumerate_order(30, 30)
    with pytest.raises(EnumerationCapError):
        mi.enumerate_order(3, 4, cap=10)
    with pytest.raises(EnumerationCapError):
        mi.enumerate_up_to(30, 30)


def test_enumerate_up_to_groups_by_order():
    out = mi.enumerate_up_to(2, 3)
    orders = [mi.order(a) for a in out]
    assert orders == sorted(orders)
    assert len(out) == sum(math.comb(k + 1, 1) for k in range(4))


def test_parity_flags():
    assert mi.all_even((2, 0, 4))
    assert not mi.all_even((1, 2))
    assert not mi.any_odd((0, 0))
    assert mi.any_odd((1, 2))


def test_validate():
    assert mi.validate([1, 2]) == (1, 2)
    with pytest.raises(UsageError):
        mi.validate([])
    with pytest.raises(UsageError):
        mi.validate([1, -1])
    with pytest.raises(UsageError):
        mi.validate([1.0, 2])
    with pytest.raises(UsageError):
        mi.validate([True])


def test_helpers():
    assert mi.add((1, 2), (0, 3)) == (1, 5)
    assert mi.shift((1, 0), 1) == (1, 1)
    assert mi.half((2, 4)) == (1, 2)
    with pytest.raises(UsageError):
        mi.half((1, 2))
    assert mi.unit(3, 1) == (0, 1, 0)
    assert mi.zero(2) == (0, 0)
    with pytest.raises(DimensionMismatchError):
        mi.add((1,), (1, 2))


index_strategy = st.lists(st.integers(min_value=0, max_value=6), min_size=1, max_size=4).map(tuple)


@given(index_strategy, index_strategy)
def test_factorial_divisibility(alpha, beta):
    # alpha! * beta! divides (alpha + beta)! componentwise (binomials are integers)
    if len(alpha) != len(beta):
        return
    combined = mi.factorial(mi.add(alpha, beta))
    assert combined % (mi.factorial(alpha) * mi.factorial(beta)) == 0


@given(
    st.lists(st.floats(min_value=-3, max_value=3), min_size=1, max_size=4),
    st.data(),
)
def test_monomial_additivity(x, data):
    d = len(x)
    alpha = tuple(data.draw(st.integers(min_value=0, max_value=4)) for _ in range(d))
    beta = tuple(data.draw(st.integers(min_value=0, max_value=4)) for _ in range(d))
    lhs = mi.monomial(x, alpha) * mi.monomial(x, beta)
    rhs = mi.monomial(x, mi.add(alpha, beta))
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)
