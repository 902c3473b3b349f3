import itertools
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dforge.errors import DforgeError
from dforge.metric.measure import (
    joint_measure, measure_mm, pair_measure, paired_case, paired_integral, paired_matrix_oracle,
    strongly_dependent_ints, valuation_event_probability, walsh_matrix_integral,
    walsh_matrix_oracle,
)
from dforge.qadic import digitwise_add

from oracles import brute_valuation_measure


def test_measure_examples():
    assert measure_mm(1, 2, 3, [1]).estimate == Fraction(1, 4)
    assert measure_mm(2, 3, 5, [4, 7]).estimate == Fraction(1, 81)
    assert measure_mm(1, 5, 1, [3]).estimate == 1


@pytest.mark.parametrize("q,s,m,k", [(2, 1, 3, (3,)), (2, 2, 3, (1, 2)), (3, 1, 3, (5,)),
                                     (2, 2, 2, (3, 0))])
def test_measure_matches_brute_enumeration(q, s, m, k):
    assert measure_mm(s, q, m, k).estimate == brute_valuation_measure(q, [k], [m])


@given(st.sampled_from([2, 3, 5]), st.integers(1, 3), st.integers(2, 6), st.data())
def test_measure_is_q_power(q, s, m, data):
    k = tuple(data.draw(st.integers(0, q**3)) for _ in range(s))
    if not any(k):
        k = (1,) + k[1:]
    assert measure_mm(s, q, m, k).estimate == Fraction(1, q ** (m - 1))


def test_zero_tuple_rejected():
    with pytest.raises(DforgeError):
        measure_mm(2, 2, 3, (0, 0))


def test_monte_carlo_is_seeded():
    a = measure_mm(2, 2, 4, (1, 1), "montecarlo", 20000, seed=3)
    b = measure_mm(2, 2, 4, (1, 1), "montecarlo", 20000, seed=3)
    assert a.estimate == b.estimate and a.successes == b.successes
    assert abs(a.estimate - 1 / 8) < 4 * a.stderr
    with pytest.raises(DforgeError):
        measure_mm(2, 2, 4, (1, 1), "montecarlo", 100)


@pytest.mark.parametrize("q", [2, 3])
def test_walsh_matrix_integral_rule(q):
    for i in range(q**2):
        for k in range(q**2):
            assert walsh_matrix_integral(i, (k,), q) == (1 if i == 0 or k == 0 else 0)
            if q == 2:
                assert abs(walsh_matrix_oracle(i, (k,), q) - walsh_matrix_integral(i, (k,), q)) < 1e-12


def test_paired_integral_agrees_with_oracle_binary():
    q = 2
    for i, j, k, l in itertools.product(range(4), repeat=4):
        assert abs(paired_matrix_oracle(i, j, (k,), (l,), q) - paired_integral(i, j, (k,), (l,), q)) < 1e-12


def test_paired_cases():
    q = 2
    assert paired_case(0, 0, (1,), (1,), q) == 1
    assert paired_integral(0, 0, (1,), (1,), q) == 1
    # equal nonzero indices on both sides pair up
    assert paired_integral(1, 1, (1,), (1,), q) == 1
    assert paired_integral(1, 0, (1,), (0,), q) == 0


def test_joint_measure_examples():
    # k = (2, 3) has summed length 2; u = 1 shift of the first index
    assert joint_measure(2, 2, (2, 3), (4, 0)).estimate == Fraction(1, 2)
    r = joint_measure(2, 2, (4, 4), (8, 0))
    assert r.estimate == Fraction(1, 2 ** (4 + 2 - 2))


def test_joint_measure_matches_brute():
    q, k, shifts = 2, (4,), (8,)
    shifted = (digitwise_add(4, 8, q),)
    assert joint_measure(1, q, k, shifts).estimate == brute_valuation_measure(q, [k, shifted], [2, 1])


def test_joint_measure_rejects_bad_shifts():
    with pytest.raises(DforgeError):
        joint_measure(1, 2, (4,), (0,))
    with pytest.raises(DforgeError):
        joint_measure(1, 2, (4,), (1,))


def test_independence_of_non_dependent_tuples():
    q = 3
    k, l = (4, 3), (3, 5)
    assert not strongly_dependent_ints(k, l, q)
    assert pair_measure(q, k, l, 3) == measure_mm(2, q, 3, k).estimate * measure_mm(2, q, 3, l).estimate
    # dependent tuples have identical events
    assert pair_measure(q, (4,), (8,), 3) == measure_mm(1, q, 3, (4,)).estimate


def test_valuation_event_probability_matches_brute():
    q = 3
    tuples = [(1, 4), (5, 1)]
    assert valuation_event_probability(q, tuples, [3, 2]) == brute_valuation_measure(q, tuples, [3, 2])
