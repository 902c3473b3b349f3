"""q-adic Walsh characters and Walsh coefficients of interval indicators.

Character values are formed by accumulating the integer exponent modulo q
and reading one entry of a precomputed table of q-th roots of unity, so a
value never carries rounding from more than one complex exponential.
All projections here are averages over the grid (divided by q^m), which is
the normalisation under which Walsh functions are orthonormal.
"""

from __future__ import annotations

import cmath
import functools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DforgeError
from .qadic import DigitVec, check_base, digit_list


@functools.lru_cache(maxsize=None)
def omega_table(q: int) -> np.ndarray:
    """Powers omega_q^e for e = 0..q-1, snapped to exact values on the axes."""
    check_base(q)
    table = np.array([cmath.exp(2j * cmath.pi * e / q) for e in range(q)])
    if q == 2:
        table = np.array([1.0 + 0j, -1.0 + 0j])
    table.flags.writeable = False
    return table


def omega(q: int, e: int) -> complex:
    return complex(omega_table(q)[e % q])


@dataclass(frozen=True)
class GridCoordinate:
    """The point r / q^m of the grid Q(q^m)."""

    r: int
    m: int
    q: int

    def __post_init__(self):
        check_base(self.q)
        if self.m < 0:
            raise DforgeError(f"resolution must be nonnegative, got {self.m}")
        if not 0 <= self.r < self.q**self.m:
            raise DforgeError(f"numerator {self.r} outside [0, {self.q}^{self.m})")

    @property
    def value(self) -> Fraction:
        return Fraction(self.r, self.q**self.m)

    def digits(self) -> list[int]:
        """Digits xi_1..xi_m after the radix point, in reading order."""
        return digit_list(self.r, self.q, self.m)[::-1]

    def refine(self, m: int) -> GridCoordinate:
        if m < self.m:
            raise DforgeError(f"cannot coarsen resolution {self.m} to {m}")
        return GridCoordinate(self.r * self.q ** (m - self.m), m, self.q)


def walsh_exponent(j: int, xi: list[int], q: int) -> int:
    """Sum of j_a * xi_{a+1} over digit positions, reduced mod q."""
    e = 0
    for a, ja in enumerate(digit_list(j, q)):
        if a >= len(xi):
            break
        e += ja * xi[a]
    return e % q


def walsh(j: int, x: GridCoordinate) -> complex:
    """wal_j evaluated at a grid point."""
    return omega(x.q, walsh_exponent(j, x.digits(), x.q))


def walsh_of_digitvec(j: int, v: DigitVec) -> complex:
    """wal_j of the real whose digit vector (xi_1, xi_2, ...) is ``v``."""
    return omega(v.q, walsh_exponent(j, list(v.digits), v.q))


def grid_digit_matrix(m: int, q: int) -> np.ndarray:
    """Row r holds xi_1..xi_m of r / q^m, shape (q^m, m)."""
    r = np.arange(q**m, dtype=np.int64)
    powers = q ** np.arange(m - 1, -1, -1, dtype=np.int64)
    return (r[:, None] // powers[None, :]) % q


def index_digit_matrix(indices: np.ndarray, width: int, q: int) -> np.ndarray:
    """Little-endian digits of each index, shape (len(indices), width)."""
    indices = np.asarray(indices, dtype=np.int64)
    powers = q ** np.arange(width, dtype=np.int64)
    return (indices[:, None] // powers[None, :]) % q


def walsh_grid(j: int, m: int, q: int) -> np.ndarray:
    """wal_j(r / q^m) for every r in [0, q^m)."""
    jd = digit_list(j, q)[:m]
    exps = np.zeros(q**m, dtype=np.int64)
    if jd:
        exps = grid_digit_matrix(m, q)[:, : len(jd)] @ np.array(jd, dtype=np.int64)
    return omega_table(q)[exps % q]


def walsh_matrix(m: int, q: int) -> np.ndarray:
    """W[k, r] = wal_k(r / q^m) for all k, r in [0, q^m)."""
    kd = index_digit_matrix(np.arange(q**m), m, q)
    xi = grid_digit_matrix(m, q)
    return omega_table(q)[(kd @ xi.T) % q]


def orthonormality_avg(k: int, l: int, m: int, q: int) -> complex:
    """Grid average of wal_k * conj(wal_l) over Q(q^m)."""
    check_base(q)
    total = np.sum(walsh_grid(k, m, q) * np.conj(walsh_grid(l, m, q)))
    return complex(total / q**m)


def _split_index(k: int, q: int) -> tuple[int, int, int]:
    """Write k = kappa * q^(a-1) + k' with 1 <= kappa < q; return (a, kappa, k')."""
    d = digit_list(k, q)
    a = len(d)
    kappa = d[-1]
    return a, kappa, k - kappa * q ** (a - 1)


def interval_coeff(k: int, x: GridCoordinate, m: int | None = None) -> complex:
    """Walsh coefficient of the indicator of [0, x), in closed form.

    Equals the integral of conj(wal_k) over [0, x). ``m`` defaults to the
    resolution of ``x`` and may exceed it; ``k`` must be below q^m.
    """
    q = x.q
    m = x.m if m is None else m
    if m < x.m:
        raise DforgeError(f"resolution {m} is coarser than the grid point's {x.m}")
    if not 0 <= k < q**m:
        raise DforgeError(f"index {k} outside [0, {q}^{m})")
    x = x.refine(m)
    w = omega_table(q)

    def cwal(j: int) -> complex:
        return walsh(j, x).conjugate()

    if k == 0:
        total = 0.5 - 1 / (2 * q**m)
        for c in range(1, m + 1):
            for l in range(1, q):
                total += cwal(l * q ** (c - 1)) / (q**c * (w[l] - 1))
        return complex(total)

    a, kappa, k_rest = _split_index(k, q)
    w_neg = w[(-kappa) % q]
    total = cwal(k_rest) / (1 - w_neg) + (0.5 + 1 / (w_neg - 1)) * cwal(k)
    for c in range(1, m - a + 1):
        for l in range(1, q):
            total += cwal(l * q ** (a + c - 1) + k) / (q**c * (w[l] - 1))
    total -= cwal(k) / (2 * q ** (m - a))
    return complex(total / q**a)


def interval_coeffs(x: GridCoordinate, m: int | None = None) -> np.ndarray:
    """``interval_coeff(k, x, m)`` for every k in [0, q^m), vectorised.

    Uses wal_{l q^(a+c-1) + k}(x) = wal_k(x) * omega^(l * xi_{a+c}), valid
    because k has no digits at positions >= a.
    """
    q = x.q
    m = x.m if m is None else m
    x = x.refine(m)
    w = omega_table(q)
    xi = x.digits()
    size = q**m
    ks = np.arange(size, dtype=np.int64)
    kd = index_digit_matrix(ks, m, q)
    cwal_all = np.conj(w[(kd @ np.array(xi, dtype=np.int64)) % q]) if m else np.ones(1, complex)

    # tail[a] = sum_{c=1}^{m-a} q^-c sum_l conj(omega^(l xi_{a+c})) / (omega^l - 1)
    inner = np.array(
        [sum(np.conj(w[(l * xi[p]) % q]) / (w[l] - 1) for l in range(1, q)) for p in range(m)],
        dtype=complex,
    )
    tail = np.zeros(m + 1, dtype=complex)
    for a in range(m + 1):
        tail[a] = sum(inner[a + c - 1] / q**c for c in range(1, m - a + 1))

    out = np.empty(size, dtype=complex)
    out[0] = 0.5 - 1 / (2 * q**m) + tail[0]
    if size == 1:
        return out
    nz = ks[1:]
    a_vals = np.count_nonzero(np.cumsum(kd[1:, ::-1], axis=1), axis=1)  # len(k) + 1
    top = q ** (a_vals - 1)
    kappa = nz // top
    k_rest = nz - kappa * top
    w_neg = w[(-kappa) % q]
    cw_k = cwal_all[1:]
    cw_rest = cwal_all[k_rest]
    val = cw_rest / (1 - w_neg) + (0.5 + 1 / (w_neg - 1)) * cw_k
    val += cw_k * tail[a_vals]
    val -= cw_k / (2.0 * q ** (m - a_vals))
    out[1:] = val / q**a_vals
    return out


def integral_oracle(k: int, x: GridCoordinate | Fraction | int, q: int | None = None) -> complex:
    """Integral of conj(wal_k) over [0, x) by summing over grid cells.

    Test oracle for :func:`interval_coeff`. Unlike :class:`GridCoordinate`,
    it accepts the closed endpoint x = 1, passed as a ``Fraction`` or int
    together with ``q``.
    """
    if isinstance(x, GridCoordinate):
        q, value, m = x.q, x.value, x.m
    else:
        if q is None:
            raise DforgeError("q is required when x is not a GridCoordinate")
        value = Fraction(x)
        m = 0
        while (value * q**m).denominator != 1:
            m += 1
    if not 0 <= value <= 1:
        raise DforgeError(f"x must lie in [0, 1], got {value}")
    kd = digit_list(k, q)
    fine = max(m, len(kd))
    cells = int(value * q**fine)
    if cells == 0:
        return 0j
    vals = np.conj(walsh_grid(k, fine, q)[:cells])
    return complex(vals.sum() / q**fine)


def indicator_expansion(t: int, m: int, q: int) -> np.ndarray:
    """Walsh coefficients a_0..a_{q^t - 1} of the indicator of [0, q^-t).

    Obtained by the inverse transform over Q(q^m); a_0 equals q^-t.
    """
    check_base(q)
    if t < 1 or t > m:
        raise DforgeError(f"need 1 <= t <= m, got t={t}, m={m}")
    inside = np.zeros(q**m)
    inside[: q ** (m - t)] = 1.0
    coeffs = np.empty(q**t, dtype=complex)
    for i in range(q**t):
        coeffs[i] = np.sum(inside * np.conj(walsh_grid(i, m, q))) / q**m
    return coeffs
