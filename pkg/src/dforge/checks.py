"""Verification suites driven by ``dforge verify``.

Each suite returns a list of :class:`Check` records: one per property, with
the number of cases examined, the worst observed error and the tolerance.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .digitalseq import GridPoint, digit_rng, point_set, sample_tuple
from .discrepancy import character_sum, local_grid, local_spectral
from .errors import InternalConsistencyError
from .metric import lowerbound as lb
from .metric import measure as ms
from .qadic import DigitVec, check_base, digit_list, digits_of
from .walsh import orthonormality_avg, walsh_of_digitvec

SUITES = ("lemma1", "lemma2", "lemma3a", "lemma3b", "lemma6", "theta")


@dataclass
class Check:
    name: str
    expected: str
    observed: float | str
    tolerance: float
    cases: int = 0
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "expected": self.expected,
            "observed": self.observed,
            "tolerance": self.tolerance,
            "cases": self.cases,
            "ok": self.ok,
            "violations": self.violations[:10],
        }


class _Worst:
    """Track the largest error and record violations above a tolerance."""

    def __init__(self, check: Check):
        self.check = check
        self.worst = 0.0

    def add(self, err: float, label: str) -> None:
        self.check.cases += 1
        self.worst = max(self.worst, err)
        if not err <= self.check.tolerance:
            self.check.violations.append(f"{label}: error {err:.3e}")

    def done(self) -> Check:
        self.check.observed = self.worst
        return self.check


def suite_lemma1(q: int, m: int = 3, seed: int = 0, cases: int = 1000) -> list[Check]:
    check_base(q)
    rng = digit_rng(seed, 0)
    out = []

    w = _Worst(Check("product rule wal_j(v + w) = wal_j(v) wal_j(w)", "0", 0.0, 1e-12))
    for _ in range(cases):
        j = int(rng.integers(0, q**m))
        v = DigitVec(q, tuple(rng.integers(0, q, m).tolist()))
        u = DigitVec(q, tuple(rng.integers(0, q, m).tolist()))
        err = abs(walsh_of_digitvec(j, v + u) - walsh_of_digitvec(j, v) * walsh_of_digitvec(j, u))
        w.add(err, f"j={j}, v={v.digits}, w={u.digits}")
    out.append(w.done())

    w = _Worst(Check("product rule on matrix images C1 k1 + C2 k2", "0", 0.0, 1e-12))
    for _ in range(cases):
        C1, C2 = rng.integers(0, q, (2, m, m))
        k1, k2 = rng.integers(0, q, (2, m))
        j = int(rng.integers(0, q**m))
        x1 = DigitVec(q, tuple(((C1 @ k1) % q).tolist()))
        x2 = DigitVec(q, tuple(((C2 @ k2) % q).tolist()))
        err = abs(walsh_of_digitvec(j, x1 + x2) - walsh_of_digitvec(j, x1) * walsh_of_digitvec(j, x2))
        w.add(err, f"j={j}")
    out.append(w.done())

    w = _Worst(Check(f"orthonormality averages, k, l < {q}^{m}", "1 iff first m digits agree",
                     0.0, 1e-12))
    for k in range(q**m):
        kd = digit_list(k, q, m)
        for l in range(q**m):
            expected = 1.0 if kd == digit_list(l, q, m) else 0.0
            w.add(abs(orthonormality_avg(k, l, m, q) - expected), f"k={k}, l={l}")
    out.append(w.done())

    w = _Worst(Check("matrix integral of wal_i(C^T k) vs exhaustive matrix average",
                     "1 iff i = 0 or k = 0", 0.0, 1e-12))
    for i in range(q**2):
        for k in range(q**2):
            rule = 1 if i == 0 or k == 0 else 0
            value = ms.walsh_matrix_integral(i, (k,), q)
            err = abs(value - rule)
            if q ** (len(digit_list(i, q)) * len(digit_list(k, q))) <= 4096:
                err = max(err, abs(ms.walsh_matrix_oracle(i, (k,), q) - value))
            w.add(err, f"i={i}, k={k}")
    out.append(w.done())
    return out


def _nonzero_tuples(q: int, s: int, bound: int, limit: int, seed: int) -> list[tuple[int, ...]]:
    tuples = [t for t in itertools.product(range(bound), repeat=s) if any(t)]
    if len(tuples) <= limit:
        return tuples
    rng = digit_rng(seed, 1)
    picks = rng.choice(len(tuples), size=limit, replace=False)
    return [tuples[i] for i in sorted(picks)]


def _three_sigma(result: ms.MeasureResult, expected: Fraction, name: str) -> Check:
    p = float(expected)
    sigma = math.sqrt(p * (1 - p) / result.trials)
    err = abs(float(result.estimate) - p)
    c = Check(name, str(expected), float(result.estimate), 3 * sigma, cases=1)
    if err > 3 * sigma:
        c.violations.append(f"estimate {result.estimate} is {err / sigma:.2f} sigma from {p}")
    return c


def suite_lemma2(q: int, s: int = 1, m: int = 3, mode: str = "exhaustive",
                 trials: int = 100_000, seed: int | None = None,
                 k: tuple[int, ...] | None = None) -> list[Check]:
    expected = Fraction(1, q ** (m - 1))
    if mode == "montecarlo":
        k = k or (1,) * s
        res = ms.measure_mm(s, q, m, k, "montecarlo", trials, seed)
        return [_three_sigma(res, expected, f"Monte Carlo measure of M_{m}{k}")]
    c = Check(f"exact measure of M_{m}(k), q={q}, s={s}", str(expected), "", 0.0)
    observed = set()
    for kt in ([k] if k else _nonzero_tuples(q, s, q**2, 200, seed or 0)):
        value = ms.measure_mm(s, q, m, kt).estimate
        observed.add(str(value))
        c.cases += 1
        if value != expected:
            c.violations.append(f"k={kt}: {value}")
    c.observed = ", ".join(sorted(observed))
    return [c]


def suite_lemma3a(q: int, s: int = 1) -> list[Check]:
    check_base(q)
    idx = range(q**2)
    c = Check(f"paired integral: digit condition vs five cases, q={q}, s={s}", "agreement",
              "agreement", 0.0)
    for i, j in itertools.product(idx, repeat=2):
        for k in itertools.product(idx, repeat=s):
            for l in itertools.product(idx, repeat=s):
                c.cases += 1
                try:
                    ms.paired_integral(i, j, k, l, q)
                except InternalConsistencyError as exc:
                    c.violations.append(str(exc))
    if c.violations:
        c.observed = f"{len(c.violations)} disagreements"
    out = [c]
    if q == 2:
        w = _Worst(Check(f"paired integral vs exhaustive matrix average, q=2, s={s}", "0", 0.0, 1e-12))
        for i, j in itertools.product(idx, repeat=2):
            for k in itertools.product(idx, repeat=s):
                for l in itertools.product(idx, repeat=s):
                    err = abs(ms.paired_matrix_oracle(i, j, k, l, q) - ms.paired_integral(i, j, k, l, q))
                    w.add(err, f"i={i}, j={j}, k={k}, l={l}")
        out.append(w.done())
    return out


def lemma3b_cases(q: int, s: int, r_max: int = 5) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """P-tuples with all a_i >= 2 paired with beta shifts from u in {0, 1, 2}^s."""
    cases = []
    for p in lb.enumerate_p(s, q, r_max, r_min=2):
        if min(p.a) < 2:
            continue
        star = lb.StarIndex.from_tilde(p)
        for us in itertools.product(range(3), repeat=s):
            if any(us):
                shifts = tuple(lb.beta_shift(a, u, q) for a, u in zip(star.a_star, us))
                cases.append((p.k, shifts))
    return cases


def suite_lemma3b(q: int, s: int = 1, mode: str = "exhaustive", trials: int = 100_000,
                  seed: int | None = None, limit: int = 60) -> list[Check]:
    cases = lemma3b_cases(q, s)
    if mode == "montecarlo":
        k, shifts = cases[-1]
        m = sum(len(digit_list(v, q)) - 1 for v in k)
        res = ms.joint_measure(s, q, k, shifts, "montecarlo", trials, seed)
        return [_three_sigma(res, Fraction(1, q ** (m + m // 2 - 2)),
                             f"Monte Carlo joint measure k={k}, shifts={shifts}")]
    c = Check(f"exact joint measure, q={q}, s={s}", "q^-(m + floor(m/2) - 2)", "exact", 0.0)
    step = max(1, len(cases) // limit)
    for k, shifts in cases[::step]:
        m = sum(len(digit_list(v, q)) - 1 for v in k)
        value = ms.joint_measure(s, q, k, shifts).estimate
        c.cases += 1
        if value != Fraction(1, q ** (m + m // 2 - 2)):
            c.violations.append(f"k={k}, shifts={shifts}: {value}")
    ind = Check(f"independence for non-dependent P-tuples, q={q}, s={s}",
                "joint = product of marginals", "exact", 0.0)
    ps = [p.k for p in lb.enumerate_p(s, q, 3)][:20]
    for k, l in itertools.combinations(ps, 2):
        if ms.strongly_dependent_ints(k, l, q):
            ind.violations.append(f"{k} and {l} are strongly dependent")
            continue
        depth = 3
        joint = ms.pair_measure(q, k, l, depth)
        ind.cases += 1
        if joint != ms.measure_mm(s, q, depth, k).estimate * ms.measure_mm(s, q, depth, l).estimate:
            ind.violations.append(f"k={k}, l={l}: {joint}")
    return [c, ind]


def suite_lemma6(q: int, s: int = 1, m: int = 3, seed: int = 0, samples: int = 200) -> list[Check]:
    T = sample_tuple(s, q, m, m, seed=seed, stream=0)
    size = q ** (m * s)
    out = []
    w = _Worst(Check(f"spectral vs direct local discrepancy, q={q}, s={s}, m={m}", "0", 0.0, 1e-7))
    rng = digit_rng(seed, 2)
    points = point_set(T, q**m - 1, m)
    if size * q**m <= 5000:
        pairs = [(x, N) for N in range(q**m) for x in range(size)]
    else:
        pairs = [(int(rng.integers(0, size)), int(rng.integers(0, q**m))) for _ in range(samples)]
    grids = {}
    for flat, N in pairs:
        if N not in grids:
            grids[N] = local_grid(points, N)
        coords = np.unravel_index(flat, (q**m,) * s)
        direct = Fraction(int(grids[N][coords]), size)
        x = GridPoint(tuple(int(c) for c in coords), m, q)
        w.add(abs(local_spectral(T, x, N, m) - float(direct)), f"x={x.coords}, N={N}")
    out.append(w.done())

    T2 = sample_tuple(s, q, 12, 12, seed=seed, stream=1)
    w = _Worst(Check(f"character sum closed form vs direct, q={q}, s={s}", "0", 0.0, 1e-9))
    for _ in range(samples):
        k = tuple(int(v) for v in rng.integers(0, q**4, s))
        N = int(rng.integers(0, min(q**12, 4096)))
        try:
            cs = character_sum(T2, k, N)
            w.add(abs(cs.value - cs.direct), f"k={k}, N={N}")
        except InternalConsistencyError as exc:
            w.add(float("inf"), str(exc))
    out.append(w.done())
    return out


def suite_theta(q: int, m: int = 4) -> list[Check]:
    w = _Worst(Check(f"theta cases vs grid projection, q={q}, m={m}", "0", 0.0, 1e-10))
    decay = _Worst(Check(f"|theta(k~ + beta(u))| <= {lb.THETA_DECAY} q^-(a* + u/q)",
                         "ratio <= 1", 0.0, 1.0))
    for a_star in range(3, m + 1):
        for l_star in range(q ** (a_star - 2)):
            k_star = q ** (a_star - 1) + q ** (a_star - 2) + l_star
            proj = lb.theta_projection_all(k_star, m, q)
            for k in range(q**m):
                w.add(abs(lb.theta(k, k_star, m, q) - proj[k]), f"k={k}, k*={k_star}")
            star = lb.StarIndex(q, (a_star,), (l_star,))
            for u, _, th in lb.shift_lattice(star, m)[0]:
                decay.add(abs(th) / (lb.THETA_DECAY * q ** (-a_star - u / q)), f"k*={k_star}, u={u}")
    return [w.done(), decay.done()]


def run_suite(name: str, q: int, s: int = 1, m: int | None = None, mode: str = "exhaustive",
              trials: int = 100_000, seed: int | None = None,
              k: tuple[int, ...] | None = None) -> list[Check]:
    if name == "lemma1":
        return suite_lemma1(q, m or 3, seed or 0)
    if name == "lemma2":
        return suite_lemma2(q, s, m or 3, mode, trials, seed, k)
    if name == "lemma3a":
        return suite_lemma3a(q, s)
    if name == "lemma3b":
        return suite_lemma3b(q, s, mode, trials, seed)
    if name == "lemma6":
        return suite_lemma6(q, s, m or 3, seed or 0)
    if name == "theta":
        return suite_theta(q, m or 4)
    raise ValueError(f"unknown suite {name!r}; expected one of {', '.join(SUITES)}")
