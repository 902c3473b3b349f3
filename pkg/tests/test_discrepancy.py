import itertools
import os
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dforge.digitalseq import GridPoint, PointSet, named_tuple, point_set, sample_tuple
from dforge.discrepancy import (
    DEFAULT_COST_GUARD, character_sum, check_cost, cost_guard, g_factor, g_table, local_direct,
    local_grid, local_spectral, log_predictors, star_grid,
)
from dforge.errors import CostGuardError, DforgeError
from dforge.qadic import DigitVec
from dforge.walsh import omega

from oracles import brute_star, direct_count


def test_single_point_at_origin():
    ps = PointSet(2, 3, np.array([[0]]))
    assert star_grid(ps, 1, exact=True) == 1


def test_two_points_zero_and_half():
    ps = PointSet(2, 1, np.array([[0], [1]]))
    d = star_grid(ps, 2, exact=True)
    assert d == 1
    assert d / 2 == Fraction(1, 2)


def test_empty_prefix():
    ps = PointSet(2, 2, np.array([[1]]))
    assert star_grid(ps, 0) == 0.0


def test_resolution_refinement_is_invariant():
    T = sample_tuple(2, 3, 4, 4, seed=2)
    ps = point_set(T, 9, 2)
    assert star_grid(ps, 9, exact=True) == star_grid(ps, 9, m=3, exact=True)
    with pytest.raises(DforgeError):
        star_grid(ps, 9, m=1)


@pytest.mark.parametrize("q,s,N,seed", [(2, 1, 8, 0), (2, 2, 6, 1), (3, 1, 9, 2), (3, 2, 5, 3)])
def test_star_grid_matches_refined_scan(q, s, N, seed):
    T = sample_tuple(s, q, 3, 3, seed=seed)
    m = 2 if q == 3 else 3
    ps = point_set(T, N, m)
    assert star_grid(ps, N, exact=True) == brute_star(ps, N)


def test_local_direct_counts_open_boxes():
    ps = PointSet(2, 2, np.array([[1, 2], [2, 2], [3, 0]]))
    x = GridPoint((2, 3), 2, 2)
    ld = local_direct(ps, x, 3)
    assert ld.count == 1
    assert ld.exact == 1 - 3 * Fraction(2, 4) * Fraction(3, 4)


@given(st.integers(0, 2**16), st.sampled_from([2, 3]), st.integers(1, 2))
def test_local_grid_dominance_and_integrality(seed, q, s):
    m = 2
    T = sample_tuple(s, q, m, m, seed=seed)
    N = q**m - 1
    ps = point_set(T, N, m)
    grid = local_grid(ps, N)
    D = star_grid(ps, N, exact=True)
    Q = q**m
    for coords in itertools.product(range(Q), repeat=s):
        x = GridPoint(coords, m, q)
        ld = local_direct(ps, x, N)
        assert ld.exact == Fraction(int(grid[coords]), Q**s)
        assert ld.count == direct_count(ps, x, N)
        assert abs(ld.exact) <= D
        frac = ld.value + N * float(x.volume())
        assert abs(frac - round(frac)) < 1e-9


def test_g_factor_zero_vector_is_N():
    assert g_factor(5, DigitVec(2, ()), 4) == 5


@given(st.integers(0, 3**6 - 1), st.lists(st.integers(0, 2), min_size=1, max_size=6))
def test_g_factor_matches_direct_sum(N, digits):
    q, m = 3, 6
    b = DigitVec(q, tuple(digits))
    direct = 0
    for n in range(N):
        nd = [int(c) for c in np.base_repr(n, q)[::-1]] + [0] * m
        direct += omega(q, sum(bi * ni for bi, ni in zip(b.padded(m), nd)) % q)
    g = g_factor(N, b, m)
    assert abs(g - direct) < 1e-9
    assert abs(g) <= q * N + 1e-9


def test_g_table_matches_g_factor():
    q, m, N = 3, 3, 17
    table = g_table(N, m, q)
    for idx in range(q**m):
        b = DigitVec.of(idx, q)
        assert abs(table[idx] - g_factor(N, b, m)) < 1e-12


@given(st.integers(0, 2**16), st.sampled_from([2, 3]), st.integers(1, 3), st.data())
def test_character_sum_closed_form(seed, q, s, data):
    T = sample_tuple(s, q, 10, 10, seed=seed)
    k = tuple(data.draw(st.integers(0, q**4)) for _ in range(s))
    N = data.draw(st.integers(0, min(q**10 - 1, 3000)))
    cs = character_sum(T, k, N)
    assert abs(cs.value - cs.direct) < 1e-9


def test_character_sum_zero_index():
    T = sample_tuple(2, 2, 6, 6, seed=1)
    assert character_sum(T, (0, 0), 13).value == 13


def test_spectral_matches_direct_exhaustive_binary():
    T = sample_tuple(1, 2, 4, 4, seed=7)
    ps = point_set(T, 15, 4)
    for N in range(16):
        for r in range(16):
            x = GridPoint((r,), 4, 2)
            assert abs(local_spectral(T, x, N, 4) - local_direct(ps, x, N).value) < 1e-7


@pytest.mark.parametrize("q,seed", [(2, 0), (3, 1)])
def test_spectral_matches_direct_two_dims(q, seed):
    m = 3 if q == 2 else 2
    T = sample_tuple(2, q, m, m, seed=seed)
    rng = np.random.default_rng(seed)
    ps = point_set(T, q**m - 1, m)
    for _ in range(30):
        x = GridPoint(tuple(int(v) for v in rng.integers(0, q**m, 2)), m, q)
        N = int(rng.integers(0, q**m))
        assert abs(local_spectral(T, x, N, m) - local_direct(ps, x, N).value) < 1e-7


def test_spectral_rejects_N_at_q_power():
    T = sample_tuple(1, 2, 3, 3, seed=0)
    with pytest.raises(DforgeError):
        local_spectral(T, GridPoint((1,), 3, 2), 8, 3)


def test_cost_guard_env(monkeypatch):
    monkeypatch.delenv("DFORGE_COST_GUARD", raising=False)
    assert cost_guard() == DEFAULT_COST_GUARD == 2**22
    monkeypatch.setenv("DFORGE_COST_GUARD", "100")
    assert cost_guard() == 100
    with pytest.raises(CostGuardError) as exc:
        check_cost(101)
    assert "100" in str(exc.value)
    T = sample_tuple(2, 2, 4, 4, seed=0)
    with pytest.raises(CostGuardError):
        local_spectral(T, GridPoint((1, 1), 4, 2), 3, 4)


def test_log_predictors():
    base, ll = log_predictors(2, 2)
    assert ll is None and base == pytest.approx(np.log(2) ** 2)
    base, ll = log_predictors(100, 1)
    assert ll == pytest.approx(np.log(100) * np.log(np.log(100)))
    with pytest.raises(DforgeError):
        log_predictors(0, 1)


def test_identity_tuple_discrepancy_is_small():
    # the first q^m van der Corput points form a perfect grid
    T = named_tuple(["identity"], 2, 5)
    ps = point_set(T, 32, 5)
    assert star_grid(ps, 32, exact=True) == 1
