import pytest
from hypothesis import given
from hypothesis import strategies as st

from dforge.errors import BaseMismatchError, DforgeError
from dforge.qadic import (
    DigitVec, check_base, digit_add, digit_list, digits_of, digitwise_add, first_nonzero_index,
    from_digits, is_strongly_dependent, length_of, scalar_mul, valuation, valuation_at_least,
    valuation_at_most,
)

primes = st.sampled_from([2, 3, 5, 7])


@pytest.mark.parametrize("q", [2, 3, 5, 7, 257])
def test_primes_accepted(q):
    assert check_base(q) == q


@pytest.mark.parametrize("q", [0, 1, 4, 9, 259, -3])
def test_non_primes_rejected(q):
    with pytest.raises(DforgeError):
        check_base(q)


def test_length_examples():
    assert length_of(5, 2) == 2
    assert length_of(9, 3) == 2
    for q in (2, 3):
        for a in range(1, 13):
            assert length_of(q**a, q) == a
            assert length_of(q**a - 1, q) == a - 1
    with pytest.raises(DforgeError):
        length_of(0, 2)


def test_digits_little_endian():
    assert digit_list(6, 2) == [0, 1, 1]
    assert digit_list(6, 2, 5) == [0, 1, 1, 0, 0]
    assert digits_of(11, 3).digits == (2, 0, 1)


@given(st.integers(0, 10**9), primes)
def test_digit_roundtrip(n, q):
    assert from_digits(digit_list(n, q), q) == n
    assert DigitVec.of(n, q).value == n


@given(st.integers(0, 10**6), st.integers(0, 10**6), primes)
def test_digit_add_is_digitwise(a, b, q):
    s = digit_add(digits_of(a, q), digits_of(b, q))
    width = max(len(digit_list(a, q)), len(digit_list(b, q)))
    expect = [(x + y) % q for x, y in zip(digit_list(a, q, width), digit_list(b, q, width))]
    assert s.padded(width) == expect
    assert digitwise_add(a, b, q) == s.value


@given(st.integers(0, 10**6), st.integers(0, 10**6))
def test_binary_digit_add_is_xor(a, b):
    assert digitwise_add(a, b, 2) == a ^ b


@given(st.integers(0, 10**6), primes, st.integers(1, 6))
def test_scalar_mul(a, q, c):
    c = 1 + c % (q - 1)
    v = scalar_mul(c, digits_of(a, q))
    assert v.padded(20) == [(c * d) % q for d in digits_of(a, q).padded(20)]


def test_base_mismatch():
    with pytest.raises(BaseMismatchError):
        digit_add(digits_of(1, 2), digits_of(1, 3))


def test_valuation_conventions():
    assert first_nonzero_index([0, 0, 1]) == 2
    assert valuation([0, 0, 1]) == -3
    assert valuation([1]) == -1
    assert valuation([0, 0]) is None
    assert first_nonzero_index([0, 0]) is None
    # the zero vector has valuation -infinity
    assert valuation_at_most([0, 0, 0], -10)
    assert not valuation_at_least([0, 0, 0], -10)
    assert valuation_at_most([0, 0, 1], -3) and not valuation_at_most([0, 0, 1], -4)


def test_trailing_zeros_are_canonical():
    assert DigitVec(3, (1, 2, 0, 0)) == DigitVec(3, (1, 2))
    assert DigitVec(3, (1, 2, 0))[7] == 0


def test_strong_dependence():
    q = 3
    k = [digits_of(5, q)]
    assert is_strongly_dependent(k, [digits_of(7, q)])
    assert not is_strongly_dependent(k, [digits_of(4, q)])
    # the scalar must be nonzero, so a zero coordinate only matches a zero coordinate
    assert not is_strongly_dependent([digits_of(0, q)], [digits_of(7, q)])


@given(st.lists(st.integers(0, 500), min_size=1, max_size=3), st.sampled_from([2, 3, 5]),
       st.integers(1, 4))
def test_strong_dependence_properties(ks, q, c):
    c = 1 + c % (q - 1)
    k = [digits_of(v, q) for v in ks]
    l = [scalar_mul(c, v) for v in k]
    assert is_strongly_dependent(k, k)
    assert is_strongly_dependent(k, l) and is_strongly_dependent(l, k)
