from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dforge.errors import DforgeError
from dforge.qadic import DigitVec
from dforge.walsh import (
    GridCoordinate, indicator_expansion, integral_oracle, interval_coeff, interval_coeffs,
    omega, orthonormality_avg, walsh, walsh_grid, walsh_matrix, walsh_of_digitvec,
)


def test_omega_exact_for_binary():
    assert omega(2, 1) == -1
    assert omega(2, 0) == 1
    assert abs(omega(3, 1) ** 3 - 1) < 1e-15


def test_walsh_examples():
    assert walsh(1, GridCoordinate(1, 1, 2)) == -1
    assert walsh(0, GridCoordinate(5, 3, 2)) == 1
    # wal_2 looks at the second digit
    assert walsh(2, GridCoordinate(1, 2, 2)) == -1
    assert walsh(2, GridCoordinate(2, 2, 2)) == 1


def test_grid_coordinate_refine():
    x = GridCoordinate(1, 1, 3)
    assert x.refine(3).value == Fraction(1, 3)
    assert x.refine(3).digits() == [1, 0, 0]
    with pytest.raises(DforgeError):
        GridCoordinate(9, 2, 3)


@pytest.mark.parametrize("q,m", [(2, 3), (3, 2), (5, 1)])
def test_walsh_matrix_rows_are_characters(q, m):
    W = walsh_matrix(m, q)
    G = W @ W.conj().T / q**m
    assert np.allclose(G, np.eye(q**m), atol=1e-12)
    for j in range(q**m):
        assert np.allclose(W[j], walsh_grid(j, m, q))


@given(st.integers(0, 80), st.integers(0, 80), st.integers(0, 80), st.sampled_from([2, 3]))
def test_product_rule(j, a, b, q):
    v, w = DigitVec.of(a, q), DigitVec.of(b, q)
    assert abs(walsh_of_digitvec(j, v + w) - walsh_of_digitvec(j, v) * walsh_of_digitvec(j, w)) < 1e-12


def test_orthonormality_truncates():
    # k and l agree on the first 2 digits but not the third
    assert orthonormality_avg(1, 5, 2, 2) == pytest.approx(1)
    assert orthonormality_avg(1, 5, 3, 2) == pytest.approx(0)


@pytest.mark.parametrize("q,m", [(2, 3), (3, 2)])
def test_interval_coeffs_match_oracle(q, m):
    for r in range(q**m + 1):
        x = GridCoordinate(r, m, q) if r < q**m else None
        if x is None:
            assert integral_oracle(0, Fraction(1), q) == 1
            continue
        vec = interval_coeffs(x, m)
        for k in range(q**m):
            want = integral_oracle(k, x)
            assert abs(interval_coeff(k, x, m) - want) < 1e-12
            assert abs(vec[k] - want) < 1e-12


def test_interval_zero_coefficient_is_x():
    x = GridCoordinate(5, 3, 2)
    assert interval_coeff(0, x) == pytest.approx(5 / 8)


@pytest.mark.parametrize("q,m", [(2, 3), (3, 2)])
def test_indicator_expansion_reconstructs(q, m):
    W = walsh_matrix(m, q)
    for t in range(1, m + 1):
        coeffs = indicator_expansion(t, m, q)
        assert coeffs[0] == pytest.approx(q**-t)
        # wal_i for i < q^t only depends on the first t digits
        values = coeffs @ W[: q**t]
        expect = (np.arange(q**m) < q ** (m - t)).astype(float)
        assert np.allclose(values, expect, atol=1e-12)


@given(st.integers(1, 3**5 - 1), st.integers(0, 3**5 - 1), st.sampled_from([2, 3]))
def test_interval_coeff_decay(k, r, q):
    m = 5
    k %= q**m
    if k == 0:
        k = 1
    x = GridCoordinate(r % q**m, m, q)
    a = len(np.base_repr(k, q))
    assert abs(interval_coeff(k, x, m)) <= 2 / q**a + 1e-15
