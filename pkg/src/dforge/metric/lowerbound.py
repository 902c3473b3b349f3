"""Lower-bound machinery: test characters, the Lambda functional and witness search.

Lambda(k*) is the grid average of D(x, N) * wal_{k*}(x) over Q^s(q^m). Its
absolute value is therefore a certified lower bound on max_x |D(x, N)|.
Spectrally it collapses to a sum over a small lattice of shifts u, because
the projection theta(k) of J_k onto wal_{k*} vanishes except in three
structured cases.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Any, Iterator, Sequence

import numpy as np

from ..digitalseq import GeneratorTuple, GridPoint, image_table, point_set
from ..discrepancy import check_cost, g_factor, local_grid, log_predictors
from ..errors import DforgeError, InternalConsistencyError
from ..qadic import DigitVec, check_base, digit_list, digitwise_add, valuation
from ..walsh import GridCoordinate, interval_coeff, interval_coeffs, omega_table, walsh_grid

# Measured bound |theta(k~ + beta(u))| <= THETA_DECAY * q^-(a* + u/q) for q in {2, 3}.
# An implementation constant, checked by the test suite.
THETA_DECAY = 2.0
LAMBDA_TOL = 1e-7


def f_exponent(r: Sequence[int], q: int) -> float:
    """F(r) with q^F = q^R R^s ln R, where R = sum(r)."""
    check_base(q)
    R, s = sum(r), len(r)
    if R < 2:
        raise DforgeError(f"sum of lengths must be at least 2, got {R}")
    return R + s * math.log(R, q) + math.log(math.log(R), q)


def floor_f(r: Sequence[int], q: int) -> int:
    """floor(F(r)) decided by comparing q^m with q^R R^s ln R in 60-digit decimals."""
    check_base(q)
    R, s = sum(r), len(r)
    if R < 2:
        raise DforgeError(f"sum of lengths must be at least 2, got {R}")
    with localcontext() as ctx:
        ctx.prec = 60
        target = Decimal(q) ** R * Decimal(R) ** s * Decimal(R).ln()
        m = R
        while Decimal(q) ** (m + 1) <= target:
            m += 1
        while Decimal(q) ** m > target:
            m -= 1
    return m


@dataclass(frozen=True)
class PTuple:
    """Indices k_i = q^(a_i - 1) + l_i with leading digit 1; not all equal to 1."""

    q: int
    a: tuple[int, ...]
    ell: tuple[int, ...]

    def __post_init__(self):
        check_base(self.q)
        if len(self.a) != len(self.ell) or not self.a:
            raise DforgeError("a and ell must be nonempty and of equal length")
        for ai, li in zip(self.a, self.ell):
            if ai < 1 or not 0 <= li < self.q ** (ai - 1):
                raise DforgeError(f"invalid component a={ai}, ell={li}")
        if all(ai == 1 for ai in self.a):
            raise DforgeError("the all-ones tuple is excluded")

    @property
    def k(self) -> tuple[int, ...]:
        return tuple(self.q ** (ai - 1) + li for ai, li in zip(self.a, self.ell))

    @property
    def r(self) -> tuple[int, ...]:
        return tuple(ai - 1 for ai in self.a)

    @property
    def total_r(self) -> int:
        return sum(self.a) - len(self.a)


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Nonnegative compositions of ``total`` in lexicographic order."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def enumerate_p(s: int, q: int, r_max: int, r_min: int = 0) -> Iterator[PTuple]:
    """Every P-tuple with r_min <= sum of lengths <= r_max.

    Ordered by the summed length, then lexicographically on (a, ell).
    """
    check_base(q)
    for R in range(r_min, r_max + 1):
        for r in _compositions(R, s):
            a = tuple(ri + 1 for ri in r)
            if all(ai == 1 for ai in a):
                continue
            for ell in itertools.product(*(range(q**ri) for ri in r)):
                yield PTuple(q, a, ell)


@dataclass(frozen=True)
class StarIndex:
    """Test indices k*_j = q^(a*_j - 1) + q^(a*_j - 2) + l*_j with a*_j >= 3."""

    q: int
    a_star: tuple[int, ...]
    ell_star: tuple[int, ...]

    def __post_init__(self):
        check_base(self.q)
        if len(self.a_star) != len(self.ell_star) or not self.a_star:
            raise DforgeError("a_star and ell_star must be nonempty and of equal length")
        for a, l in zip(self.a_star, self.ell_star):
            if a < 3 or not 0 <= l < self.q ** (a - 2):
                raise DforgeError(f"invalid star component a*={a}, l*={l}")

    @classmethod
    def from_tilde(cls, p: PTuple) -> StarIndex:
        """The unique star index whose top-digit-stripped form is ``p.k``."""
        return cls(p.q, tuple(a + 1 for a in p.a), p.ell)

    @property
    def s(self) -> int:
        return len(self.a_star)

    @property
    def k_star(self) -> tuple[int, ...]:
        q = self.q
        return tuple(q ** (a - 1) + q ** (a - 2) + l for a, l in zip(self.a_star, self.ell_star))

    @property
    def k_tilde(self) -> tuple[int, ...]:
        q = self.q
        return tuple(q ** (a - 2) + l for a, l in zip(self.a_star, self.ell_star))


def beta_shift(a_star: int, u: int, q: int) -> int:
    """Shift added to k~ so that k~ + beta runs through the indices with nonzero theta.

    u = 0 gives 0, u = 1 gives q^(a*-1), and u >= 2 gives
    q^(a*-1) + kappa q^(a*+t) with t = (u-2) // (q-1), kappa = u - (tq - t + 1).
    """
    check_base(q)
    if u < 0:
        raise DforgeError(f"u must be nonnegative, got {u}")
    if u == 0:
        return 0
    if u == 1:
        return q ** (a_star - 1)
    t = (u - 2) // (q - 1)
    kappa = u - (t * q - t + 1)
    return q ** (a_star - 1) + kappa * q ** (a_star + t)


def _star_parts(k_star: int, q: int) -> tuple[int, int]:
    """(a*, k*') for a valid star index; k*' strips the top digit."""
    d = digit_list(k_star, q)
    a_star = len(d)
    if a_star < 3 or d[-1] != 1 or d[-2] != 1:
        raise DforgeError(f"{k_star} is not a star index in base {q}")
    return a_star, k_star - q ** (a_star - 1)


def theta(k: int, k_star: int, m: int, q: int) -> complex:
    """Grid average of J_k(x) wal_{k*}(x) over Q(q^m), from its case analysis.

    Nonzero only when k = k*, when k = k* with its top digit removed, or when
    k is k* with one extra higher digit kappa at position a* + c - 1.
    """
    check_base(q)
    a_star, k_rest = _star_parts(k_star, q)
    if a_star > m:
        raise DforgeError(f"k* = {k_star} needs a* = {a_star} <= m = {m}")
    if not 0 <= k < q**m:
        raise DforgeError(f"k = {k} outside [0, q^m)")
    w = omega_table(q)
    if k == k_star:
        return complex((0.5 + 1 / (w[q - 1] - 1)) / q**a_star - 1 / (2 * q**m))
    if k == k_rest:
        return complex(1 / (q**a_star * (w[1] - 1)))
    if k > k_star:
        d = digit_list(k, q)
        a = len(d)
        kappa = d[-1]
        if k - kappa * q ** (a - 1) == k_star:
            return complex(1 / (q**a * (1 - w[(-kappa) % q])))
    return 0j


def theta_projection(k: int, k_star: int, m: int, q: int) -> complex:
    """Oracle for :func:`theta`: the grid average computed term by term."""
    wal = walsh_grid(k_star, m, q)
    total = sum(interval_coeff(k, GridCoordinate(r, m, q)) * wal[r] for r in range(q**m))
    return complex(total / q**m)


def theta_projection_all(k_star: int, m: int, q: int) -> np.ndarray:
    """Oracle values for every k in [0, q^m) at once."""
    J = np.array([interval_coeffs(GridCoordinate(r, m, q)) for r in range(q**m)])
    return (J.T @ walsh_grid(k_star, m, q)) / q**m


def _check_lambda_args(T: GeneratorTuple, star: StarIndex, N: int, m: int) -> None:
    if star.q != T.q or star.s != T.s:
        raise DforgeError("star index must share base and dimension with the tuple")
    if not 0 <= N < T.q**m:
        raise DforgeError(f"N = {N} must satisfy N < q^m")
    if max(star.a_star) > m:
        raise DforgeError(f"a* = {max(star.a_star)} exceeds m = {m}")
    if m > min(T.m_r, T.m_c):
        raise DforgeError(f"m = {m} exceeds the matrix block {T.m_r}x{T.m_c}")


def _star_character(star: StarIndex, m: int) -> np.ndarray:
    """prod_j wal_{k*_j}(x_j) over the grid, shape (q^m,)*s."""
    out = np.ones(())
    for ks in star.k_star:
        out = np.multiply.outer(out, walsh_grid(ks, m, star.q))
    return out


def _lambda_from_grid(numer: np.ndarray, star: StarIndex, m: int) -> complex:
    scale = star.q ** (m * star.s)
    return complex((numer.astype(float) * _star_character(star, m)).sum() / scale**2)


def lambda_direct(T: GeneratorTuple, star: StarIndex, N: int, m: int) -> complex:
    """Grid average of D(x, N) wal_{k*}(x), with D from direct counting."""
    _check_lambda_args(T, star, N, m)
    check_cost(T.q ** (m * T.s))
    numer = local_grid(point_set(T, N, m), N)
    return _lambda_from_grid(numer, star, m)


@dataclass(frozen=True)
class LambdaTerms:
    """Spectral Lambda split into the u = 0 term, the 0 < u <= J block and the rest."""

    value: complex
    main: complex
    mid: complex
    tail: complex
    tail_bound: float
    lattice_size: int

    @property
    def residual(self) -> float:
        return abs(self.value - self.main - self.mid - self.tail)


def shift_lattice(star: StarIndex, m: int) -> list[list[tuple[int, int, complex]]]:
    """Per coordinate, every admissible (u, k~ + beta(u), theta) with index below q^m."""
    q = star.q
    out = []
    for a_star, k_tilde, k_star in zip(star.a_star, star.k_tilde, star.k_star):
        # beta(u) increases with u, and u = 0, 1 are admissible whenever a* <= m
        entries = []
        for u in itertools.count():
            idx = digitwise_add(k_tilde, beta_shift(a_star, u, q), q)
            if idx >= q**m:
                break
            entries.append((u, idx, theta(idx, k_star, m, q)))
        out.append(entries)
    return out


def lambda_spectral(T: GeneratorTuple, star: StarIndex, N: int, m: int, J: int) -> LambdaTerms:
    """Lambda as a sum over shift tuples u of prod_j theta(k~_j + beta_j(u_j)) G(N, b).

    The tail (some u_j > J) is finite at this scale and is summed exactly;
    ``tail_bound`` is the analytic majorant THETA_DECAY^s q N q^-sum(a*)
    times the sum of q^-(u_1 + ... + u_s)/q over the same tail.
    """
    _check_lambda_args(T, star, N, m)
    if J < 0:
        raise DforgeError("J must be nonnegative")
    q, s = T.q, T.s
    lattice = shift_lattice(star, m)
    size = math.prod(len(e) for e in lattice)
    check_cost(size)
    images = [
        image_table(C, np.array([idx for _, idx, _ in entries], dtype=np.int64), m)
        for C, entries in zip(T.matrices, lattice)
    ]
    main = mid = tail = 0j
    decay = 0.0
    for combo in itertools.product(*(range(len(e)) for e in lattice)):
        us = [lattice[j][c][0] for j, c in enumerate(combo)]
        th = math.prod((lattice[j][c][2] for j, c in enumerate(combo)), start=1 + 0j)
        b = sum(images[j][c] for j, c in enumerate(combo)) % q
        term = th * g_factor(N, DigitVec(q, tuple(b.tolist())), m) if th else 0j
        if not any(us):
            main += term
        elif max(us) <= J:
            mid += term
        else:
            tail += term
            decay += q ** (-sum(us) / q)
    bound = THETA_DECAY**s * q * N / q ** sum(star.a_star) * decay
    return LambdaTerms(main + mid + tail, main, mid, tail, bound, size)


@dataclass
class WitnessReport:
    """A P-tuple meeting both valuation conditions, with its Lambda certificate."""

    generator: dict[str, Any]
    q: int
    s: int
    a: list[int]
    ell: list[int]
    k_tilde: list[int]
    r: list[int]
    valuation: int | None
    min_shift_valuation: int | None
    F: float
    m: int
    N: int
    J: int
    k_star: list[int]
    a_star: list[int]
    lambda_value: list[float]
    main: list[float]
    mid: list[float]
    tail: list[float]
    tail_bound: float
    lambda_direct: list[float]
    decomposition_residual: float
    dual_path_gap: float
    certified_bound: float
    predictor: float | None
    ratio: float | None
    log_base: str = "e"
    max_abs_D: float | None = None
    argmax: list[int] | None = None
    candidates_examined: int = 0
    extra: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def _cpair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _shift_tuples(s: int, J: int) -> list[tuple[int, ...]]:
    return [u for u in itertools.product(range(J + 1), repeat=s) if any(u)]


def _shift_valuations(T: GeneratorTuple, p: PTuple, J: int) -> list[int | None]:
    q = T.q
    star = StarIndex.from_tilde(p)
    out = []
    for us in _shift_tuples(T.s, J):
        idx = [digitwise_add(kt, beta_shift(a, u, q), q)
               for kt, a, u in zip(p.k, star.a_star, us)]
        b = sum(image_table(C, np.array([i]), T.m_c)[0] for C, i in zip(T.matrices, idx)) % q
        out.append(valuation(b.tolist()))
    return out


def witness_search(T: GeneratorTuple, r_min: int, r_max: int, J: int,
                   scan: bool = False) -> WitnessReport | None:
    """First P-tuple (by summed length, then (a, ell)) certifying a large Lambda.

    Accepts k~ when valuation(b(k~)) <= -floor(F) and every shift tuple
    0 <= u <= J, u != 0, has valuation(b(k~ + beta(u))) >= -(sum r) / 2.
    Tuples with some a_i = 1, or whose star index needs more than m digits,
    cannot carry a test character and are skipped. Returns None when no
    tuple in range qualifies.
    """
    q, s = T.q, T.s
    if r_max < 2 or r_min > r_max:
        raise DforgeError(f"need 2 <= r_max and r_min <= r_max, got {r_min}..{r_max}")
    if J < 1:
        raise DforgeError("J must be at least 1")
    m_top = floor_f([r_max] + [0] * (s - 1), q)
    if m_top > min(T.m_r, T.m_c):
        raise DforgeError(f"r_max = {r_max} needs m = {m_top} digits, above the matrix block")
    check_cost(q ** (m_top * s))
    t_max = (J - 2) // (q - 1) if J >= 2 else -1
    examined = 0
    for R in range(max(r_min, 2, s), r_max + 1):
        m = floor_f([R] + [0] * (s - 1), q)
        for r in _compositions(R, s):
            if min(r) < 1:
                continue
            a = tuple(ri + 1 for ri in r)
            if max(a) + 1 > m or max(a) + 2 + t_max > T.m_r:
                continue
            # condition 1, vectorised over all ell in lexicographic order
            grids = [np.arange(q**ri, dtype=np.int64) + q**ri for ri in r]
            mesh = np.meshgrid(*grids, indexing="ij")
            ks = [g.ravel() for g in mesh]
            b = sum(image_table(C, kk, m - 1) for C, kk in zip(T.matrices, ks)) % q
            hits = np.nonzero(~b.any(axis=1))[0] if m > 1 else np.arange(len(ks[0]))
            examined += len(ks[0])
            for h in hits:
                ell = tuple(int(kk[h]) - q**ri for kk, ri in zip(ks, r))
                p = PTuple(q, a, ell)
                vals = _shift_valuations(T, p, J)
                if all(v is not None and v >= -R / 2 for v in vals):
                    return _build_report(T, p, m, J, scan, vals, examined)
    return None


def _build_report(T: GeneratorTuple, p: PTuple, m: int, J: int, scan: bool,
                  shift_vals: list[int | None], examined: int) -> WitnessReport:
    q, s = T.q, T.s
    N = q ** (m - 1)
    star = StarIndex.from_tilde(p)
    terms = lambda_spectral(T, star, N, m, J)
    check_cost(q ** (m * s))
    numer = local_grid(point_set(T, N, m), N)
    direct = _lambda_from_grid(numer, star, m)
    gap = abs(direct - terms.value)
    if gap > LAMBDA_TOL:
        raise InternalConsistencyError(f"Lambda paths disagree by {gap:.3e}")
    b = sum(image_table(C, np.array([k]), T.m_c)[0] for C, k in zip(T.matrices, p.k)) % q
    _, predictor = log_predictors(N, s)
    certified = abs(terms.value)
    report = WitnessReport(
        generator=dict(T.provenance),
        q=q, s=s, a=list(p.a), ell=list(p.ell), k_tilde=list(p.k), r=list(p.r),
        valuation=valuation(b.tolist()),
        min_shift_valuation=min(shift_vals),
        F=f_exponent(p.r, q), m=m, N=N, J=J,
        k_star=list(star.k_star), a_star=list(star.a_star),
        lambda_value=_cpair(terms.value), main=_cpair(terms.main), mid=_cpair(terms.mid),
        tail=_cpair(terms.tail), tail_bound=terms.tail_bound,
        lambda_direct=_cpair(direct), decomposition_residual=terms.residual,
        dual_path_gap=gap, certified_bound=certified, predictor=predictor,
        ratio=None if not predictor else certified / predictor,
        candidates_examined=examined,
    )
    if scan:
        flat = int(np.argmax(np.abs(numer)))
        report.max_abs_D = float(Fraction(int(abs(numer.flat[flat])), q ** (m * s)))
        report.argmax = [int(v) for v in np.unravel_index(flat, numer.shape)]
    return report


def _naive_image(T: GeneratorTuple, ks: Sequence[int]) -> list[int]:
    """sum_j C_j^T k_j by explicit loops over matrix entries."""
    q = T.q
    out = [0] * T.m_c
    for C, k in zip(T.matrices, ks):
        d = digit_list(int(k), q)
        for a, ka in enumerate(d):
            row = C.entries[a]
            for col in range(T.m_c):
                out[col] = (out[col] + ka * int(row[col])) % q
    return out


def reverify_report(T: GeneratorTuple, report: WitnessReport) -> list[str]:
    """Recheck a report from scratch; returns a list of violations (empty when sound)."""
    q, s = T.q, T.s
    problems = []
    R = sum(report.r)
    if floor_f(report.r, q) != report.m:
        problems.append(f"m = {report.m} but floor(F) = {floor_f(report.r, q)}")
    with localcontext() as ctx:
        ctx.prec = 60
        rhs = Decimal(q) ** R * Decimal(R) ** s * Decimal(R).ln()
        if not Decimal(q) ** report.m <= rhs < Decimal(q) ** (report.m + 1):
            problems.append("q^m does not bracket q^R R^s ln R")
    main_img = _naive_image(T, report.k_tilde)
    w = next((i for i, d in enumerate(main_img) if d), None)
    if w is not None and -(w + 1) > -report.m:
        problems.append(f"main image valuation {-(w + 1)} is above -m = {-report.m}")
    for us in _shift_tuples(s, report.J):
        idx = [kt + beta_shift(a, u, q) for kt, a, u in zip(report.k_tilde, report.a_star, us)]
        img = _naive_image(T, idx)
        w = next((i for i, d in enumerate(img) if d), None)
        if w is None or -(w + 1) < -R / 2:
            problems.append(f"shift {us}: valuation {'-inf' if w is None else -(w + 1)} "
                            f"is below -{R}/2")
    if report.max_abs_D is not None and report.max_abs_D + 1e-12 < report.certified_bound:
        problems.append(f"max|D| = {report.max_abs_D} is below |Lambda| = {report.certified_bound}")
    if report.decomposition_residual > 1e-9:
        problems.append(f"decomposition residual {report.decomposition_residual:.3e}")
    if report.dual_path_gap > LAMBDA_TOL:
        problems.append(f"Lambda dual-path gap {report.dual_path_gap:.3e}")
    return problems
