"""Measure experiments over random generating matrices.

The probability space is the product of independent uniform entries in Z_q.
For a fixed index tuple, component c of the combined image sum_j C_j^T k_j
depends only on column c of each matrix, so distinct components are
independent; the exact routines below enumerate the entries of one column
by convolution and multiply over columns.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from ..digitalseq import GeneratorMatrix, apply_transpose, digit_rng
from ..errors import DforgeError, InternalConsistencyError
from ..qadic import DigitVec, check_base, digit_list, digits_of, digitwise_add, is_strongly_dependent
from ..walsh import omega_table, walsh_of_digitvec

MC_BLOCK = 4096


@dataclass(frozen=True)
class MeasureResult:
    """Outcome of a measure experiment.

    ``estimate`` is an exact ``Fraction`` in exhaustive mode and a float for
    Monte Carlo, where ``trials`` and ``successes`` are also filled in.
    """

    estimate: Fraction | float
    stderr: float
    mode: str
    trials: int | None = None
    successes: int | None = None
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        est = self.estimate
        return {
            "mode": self.mode,
            "estimate": float(est),
            "estimate_exact": str(est) if isinstance(est, Fraction) else None,
            "stderr": self.stderr,
            "trials": self.trials,
            "successes": self.successes,
            **self.params,
        }


def _index_digits(ks: Sequence[int], q: int) -> list[list[int]]:
    return [digit_list(int(k), q) for k in ks]


def _column_zero_probability(coeffs: list[tuple[int, ...]], q: int) -> Fraction:
    """P(sum_e x_e * coeff_e == 0 in Z_q^d) for independent uniform x_e."""
    d = len(coeffs[0]) if coeffs else 1
    dist: dict[tuple[int, ...], Fraction] = {(0,) * d: Fraction(1)}
    for vec in coeffs:
        if not any(vec):
            continue
        new: dict[tuple[int, ...], Fraction] = {}
        for state, p in dist.items():
            for x in range(q):
                nxt = tuple((s + x * v) % q for s, v in zip(state, vec))
                new[nxt] = new.get(nxt, Fraction(0)) + p / q
        dist = new
    return dist.get((0,) * d, Fraction(0))


def valuation_event_probability(q: int, tuples: Sequence[Sequence[int]], depths: Sequence[int]) -> Fraction:
    """Exact P(for each i: components 0..depths[i]-2 of b(tuples[i]) all vanish).

    Each event is "valuation of the combined image <= -depth". All tuples
    share the same random matrices.
    """
    check_base(q)
    if len(tuples) != len(depths):
        raise DforgeError("one depth per tuple is required")
    s = len(tuples[0])
    digits = [_index_digits(t, q) for t in tuples]
    rows = max((len(d) for dig in digits for d in dig), default=0)
    # one coefficient vector per matrix entry (j, a) of a column
    entries = [
        tuple(dig[j][a] if a < len(dig[j]) else 0 for dig in digits)
        for j in range(s)
        for a in range(rows)
    ]
    total = Fraction(1)
    for c in range(max(depths) - 1):
        active = [i for i, depth in enumerate(depths) if c < depth - 1]
        coeffs = [tuple(vec[i] for i in active) for vec in entries]
        total *= _column_zero_probability(coeffs, q)
    return total


def _monte_carlo(q: int, tuples: Sequence[Sequence[int]], depths: Sequence[int],
                 trials: int, seed: int) -> tuple[int, int]:
    """Count trials where every valuation event holds; returns (successes, trials).

    Trials are drawn in fixed blocks; block i uses stream i of ``seed`` so the
    result does not depend on how blocks are scheduled.
    """
    if trials < 1:
        raise DforgeError("trials must be positive")
    s = len(tuples[0])
    cols = max(depths) - 1
    if cols <= 0:
        return trials, trials
    rows = max(1, max(len(digit_list(int(v), q)) for t in tuples for v in t))
    kd = np.array([[digit_list(int(v), q, rows) for v in t] for t in tuples], dtype=np.int64)
    hits = 0
    for block, start in enumerate(range(0, trials, MC_BLOCK)):
        size = min(MC_BLOCK, trials - start)
        rng = digit_rng(seed, block)
        E = rng.integers(0, q, size=(size, s, rows, cols), dtype=np.int64)
        ok = np.ones(size, dtype=bool)
        for ev, depth in enumerate(depths):
            if depth <= 1:
                continue
            b = np.einsum("tjac,ja->tc", E[..., : depth - 1], kd[ev]) % q
            ok &= ~b.any(axis=1)
        hits += int(ok.sum())
    return hits, trials


def _mc_result(hits: int, trials: int, params: dict) -> MeasureResult:
    p = hits / trials
    return MeasureResult(p, math.sqrt(p * (1 - p) / trials), "montecarlo", trials, hits, params)


def measure_mm(s: int, q: int, m: int, k: Sequence[int], mode: str = "exhaustive",
               trials: int = 100_000, seed: int | None = None) -> MeasureResult:
    """Probability that the combined image of ``k`` has valuation <= -m.

    The target value is q^-(m-1).
    """
    check_base(q)
    k = tuple(int(v) for v in k)
    if len(k) != s:
        raise DforgeError(f"expected {s} indices, got {len(k)}")
    if m < 1:
        raise DforgeError(f"m must be positive, got {m}")
    if not any(k):
        raise DforgeError("at least one index must be nonzero")
    params = {"q": q, "s": s, "m": m, "k": list(k), "expected": float(Fraction(1, q ** (m - 1)))}
    if mode == "exhaustive":
        value = valuation_event_probability(q, [k], [m])
        return MeasureResult(value, 0.0, "exhaustive", params=params)
    if mode == "montecarlo":
        if seed is None:
            raise DforgeError("Monte Carlo mode requires a seed")
        return _mc_result(*_monte_carlo(q, [k], [m], trials, seed), {**params, "seed": seed})
    raise DforgeError(f"unknown mode {mode!r}")


def _root_average(e: int, q: int) -> int:
    """(1/q) * sum_c omega^(c e), which is 1 when e = 0 mod q and 0 otherwise."""
    total = omega_table(q)[(np.arange(q) * e) % q].sum() / q
    value = round(total.real)
    if abs(total - value) > 1e-9:
        raise InternalConsistencyError(f"root average {total} is not 0 or 1")
    return value


def walsh_matrix_integral(i: int, k: Sequence[int], q: int) -> int:
    """Average of prod_j wal_i(C_j^T k_j) over independent uniform matrices.

    Each coordinate factor is the product over digit pairs (a, b) of the
    averaged root-of-unity sum for exponent i_a * k_b.
    """
    check_base(q)
    i_d = digit_list(i, q)
    result = 1
    for kj in k:
        k_d = digit_list(int(kj), q)
        for ia in i_d:
            for kb in k_d:
                result *= _root_average(ia * kb, q)
    return result


def _all_matrices(rows: int, cols: int, q: int):
    if rows == 0 or cols == 0:
        yield GeneratorMatrix(q, np.zeros((1, 1), dtype=np.int64))
        return
    for flat in itertools.product(range(q), repeat=rows * cols):
        yield GeneratorMatrix(q, np.array(flat, dtype=np.int64).reshape(rows, cols))


def walsh_matrix_oracle(i: int, k: Sequence[int], q: int) -> complex:
    """Brute-force average of wal_i(C^T k_j) over every matrix block, multiplied over j."""
    cols = max(1, len(digit_list(i, q)))
    result = 1 + 0j
    for kj in k:
        rows = max(1, len(digit_list(int(kj), q)))
        mats = list(_all_matrices(rows, cols, q))
        result *= sum(walsh_of_digitvec(i, apply_transpose(C, int(kj))) for C in mats) / len(mats)
    return result


def _digit_condition(i: int, j: int, k: Sequence[int], l: Sequence[int], q: int) -> int:
    i_d, j_d = digit_list(i, q), digit_list(j, q)
    width = max(len(i_d), len(j_d))
    i_d += [0] * (width - len(i_d))
    j_d += [0] * (width - len(j_d))
    for ku, lu in zip(k, l):
        k_d, l_d = digit_list(int(ku), q), digit_list(int(lu), q)
        for a in range(max(len(k_d), len(l_d))):
            ka = k_d[a] if a < len(k_d) else 0
            la = l_d[a] if a < len(l_d) else 0
            for b in range(width):
                if (ka * i_d[b] + la * j_d[b]) % q:
                    return 0
    return 1


def paired_case(i: int, j: int, k: Sequence[int], l: Sequence[int], q: int) -> int | None:
    """Which of the five cases giving a unit paired integral applies, or None.

    Case 5 is "j = -c i and k_u = c l_u for all u" for some nonzero c.
    """
    if i == 0 and j == 0:
        return 1
    if all(v == 0 for v in k) and all(v == 0 for v in l):
        return 2
    if j == 0 and all(v == 0 for v in k):
        return 3
    if i == 0 and all(v == 0 for v in l):
        return 4
    iv, jv = digits_of(i, q), digits_of(j, q)
    kv = [digits_of(int(v), q) for v in k]
    lv = [digits_of(int(v), q) for v in l]
    for c in range(1, q):
        neg_c = (-c) % q
        if jv == DigitVec(q, tuple((neg_c * d) % q for d in iv.digits)) and all(
            a == DigitVec(q, tuple((c * d) % q for d in b.digits)) for a, b in zip(kv, lv)
        ):
            return 5
    return None


def paired_integral(i: int, j: int, k: Sequence[int], l: Sequence[int], q: int) -> int:
    """prod_u of the average of wal_i(C_u^T k_u) wal_j(C_u^T l_u); always 0 or 1.

    Decided by the digit condition k_{u,a} i_b + l_{u,a} j_b = 0 for all
    u, a, b, and cross-checked against the five-case classification.
    """
    check_base(q)
    if len(k) != len(l):
        raise DforgeError("k and l must have the same arity")
    by_digits = _digit_condition(i, j, k, l, q)
    by_case = int(paired_case(i, j, k, l, q) is not None)
    if by_digits != by_case:
        raise InternalConsistencyError(
            f"paired integral paths disagree at i={i}, j={j}, k={tuple(k)}, l={tuple(l)}"
        )
    return by_digits


def paired_matrix_oracle(i: int, j: int, k: Sequence[int], l: Sequence[int], q: int) -> complex:
    """Brute-force matrix average for :func:`paired_integral` (tiny sizes only)."""
    cols = max(1, len(digit_list(i, q)), len(digit_list(j, q)))
    result = 1 + 0j
    for ku, lu in zip(k, l):
        rows = max(1, len(digit_list(int(ku), q)), len(digit_list(int(lu), q)))
        mats = list(_all_matrices(rows, cols, q))
        acc = 0j
        for C in mats:
            acc += walsh_of_digitvec(i, apply_transpose(C, int(ku))) * walsh_of_digitvec(
                j, apply_transpose(C, int(lu))
            )
        result *= acc / len(mats)
    return result


def check_shifts(k: Sequence[int], shifts: Sequence[int], q: int) -> None:
    """Each shift is 0 or longer than its index, and not all shifts are 0."""
    if len(k) != len(shifts):
        raise DforgeError("one shift per coordinate is required")
    if not any(shifts):
        raise DforgeError("shifts must not all be zero")
    for kj, bj in zip(k, shifts):
        if bj and len(digit_list(int(bj), q)) <= len(digit_list(int(kj), q)):
            raise DforgeError(f"shift {bj} is not longer than index {kj}")


def joint_measure(s: int, q: int, k: Sequence[int], shifts: Sequence[int],
                  mode: str = "exhaustive", trials: int = 100_000,
                  seed: int | None = None) -> MeasureResult:
    """P(valuation of b(k) <= -m and valuation of b(k (+) shift) <= -floor(m/2)).

    Here m = sum_j len(k_j), which must be at least 2. The target value is
    q^-(m + floor(m/2) - 2).
    """
    check_base(q)
    k = tuple(int(v) for v in k)
    shifts = tuple(int(v) for v in shifts)
    if len(k) != s:
        raise DforgeError(f"expected {s} indices, got {len(k)}")
    if any(v < 1 for v in k):
        raise DforgeError("indices must be positive")
    check_shifts(k, shifts, q)
    m = sum(len(digit_list(v, q)) - 1 for v in k)
    if m < 2:
        raise DforgeError(f"the summed index length must be at least 2, got {m}")
    shifted = tuple(digitwise_add(a, b, q) for a, b in zip(k, shifts))
    depths = [m, m // 2]
    params = {"q": q, "s": s, "k": list(k), "shifts": list(shifts), "m": m,
              "expected": float(Fraction(1, q ** (m + m // 2 - 2)))}
    if mode == "exhaustive":
        value = valuation_event_probability(q, [k, shifted], depths)
        return MeasureResult(value, 0.0, "exhaustive", params=params)
    if mode == "montecarlo":
        if seed is None:
            raise DforgeError("Monte Carlo mode requires a seed")
        return _mc_result(*_monte_carlo(q, [k, shifted], depths, trials, seed),
                          {**params, "seed": seed})
    raise DforgeError(f"unknown mode {mode!r}")


def pair_measure(q: int, k: Sequence[int], l: Sequence[int], depth: int) -> Fraction:
    """Exact P(both combined images have valuation <= -depth)."""
    return valuation_event_probability(q, [tuple(k), tuple(l)], [depth, depth])


def strongly_dependent_ints(k: Sequence[int], l: Sequence[int], q: int) -> bool:
    return is_strongly_dependent([digits_of(int(v), q) for v in k], [digits_of(int(v), q) for v in l])
