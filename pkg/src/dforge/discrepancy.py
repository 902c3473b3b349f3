"""Local and star discrepancy by counting, and by the Walsh-spectral identity.

Discrepancy values are unnormalised: the count of points in the anchored box
minus N times its volume. Volumes are exact rationals with denominator
q^(m s); the subtraction happens on integers before any float conversion.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .digitalseq import GeneratorTuple, GridPoint, PointSet, image_table, point_digits
from .errors import CostGuardError, DforgeError, InternalConsistencyError
from .qadic import DigitVec, digit_list, first_nonzero_index
from .walsh import GridCoordinate, interval_coeffs, omega_table

DEFAULT_COST_GUARD = 2**22
CHARACTER_SUM_TOL = 1e-9
SPECTRAL_IMAG_TOL = 1e-7


def cost_guard() -> int:
    """Term budget for spectral sums and grid scans (env ``DFORGE_COST_GUARD``)."""
    raw = os.environ.get("DFORGE_COST_GUARD")
    if not raw:
        return DEFAULT_COST_GUARD
    try:
        value = int(raw)
    except ValueError:
        raise DforgeError(f"DFORGE_COST_GUARD must be an integer, got {raw!r}") from None
    if value < 1:
        raise DforgeError("DFORGE_COST_GUARD must be positive")
    return value


def check_cost(terms: int) -> None:
    guard = cost_guard()
    if terms > guard:
        raise CostGuardError(terms, guard)


def _as_pointset(points: PointSet | Sequence[GridPoint]) -> PointSet:
    if isinstance(points, PointSet):
        return points
    return PointSet.from_points(list(points))


@dataclass(frozen=True)
class LocalDiscrepancy:
    x: GridPoint
    N: int
    count: int
    exact: Fraction

    @property
    def value(self) -> float:
        return float(self.exact)


def local_direct(points: PointSet | Sequence[GridPoint], x: GridPoint, N: int) -> LocalDiscrepancy:
    """D(x, N): points n < N inside the half-open box [0, x), minus N vol(x)."""
    ps = _as_pointset(points)
    if N < 0 or N > len(ps):
        raise DforgeError(f"N = {N} outside [0, {len(ps)}]")
    if ps.q != x.q or ps.s != x.s:
        raise DforgeError("point set and x must share base and dimension")
    # y / q^mp < c / q^mx  <=>  y * q^mx < c * q^mp
    lhs = ps.numerators[:N] * (x.q**x.m)
    rhs = np.array(x.coords, dtype=np.int64) * (ps.q**ps.m)
    count = int(np.all(lhs < rhs[None, :], axis=1).sum()) if N else 0
    return LocalDiscrepancy(x, N, count, count - N * x.volume())


def box_counts(points: PointSet, N: int) -> np.ndarray:
    """H[c] = #{n < N : y_n < c / q^m coordinatewise}, for c in {0..q^m}^s."""
    Q = points.q**points.m
    s = points.s
    check_cost((Q + 1) ** s)
    hist = np.zeros((Q,) * s, dtype=np.int64)
    if N:
        np.add.at(hist, tuple(points.numerators[:N].T), 1)
    H = np.zeros((Q + 1,) * s, dtype=np.int64)
    H[(slice(1, None),) * s] = hist
    for axis in range(s):
        np.cumsum(H, axis=axis, out=H)
    return H


def _volume_numerators(Q: int, s: int, upper: int) -> np.ndarray:
    """prod_j c_j for c in {0..upper-1}^s, as an int array."""
    r = np.arange(upper, dtype=object if Q**s > 2**40 else np.int64)
    vol = r
    for _ in range(s - 1):
        vol = np.multiply.outer(vol, r)
    return vol


def local_grid(points: PointSet, N: int) -> np.ndarray:
    """Q^s * D(x, N) as exact integers for every x in Q^s(q^m), shape (Q,)*s."""
    Q = points.q**points.m
    s = points.s
    H = box_counts(points, N)[(slice(0, Q),) * s]
    dtype = object if N * Q**s >= 2**62 else np.int64
    return H.astype(dtype) * Q**s - N * _volume_numerators(Q, s, Q).astype(dtype)


def star_grid(points: PointSet | Sequence[GridPoint], N: int, m: int | None = None,
              exact: bool = False) -> float | Fraction:
    """Exact star discrepancy sup_x |D(x, N)| over [0, 1]^s.

    Counts are constant as a coordinate moves within (r/q^m, (r+1)/q^m], and
    the volume is monotone, so the supremum is the larger of
    N vol(c) - count_open(c) over corners c in {0..q^m}^s and the right-hand
    limit count_closed(c) - N vol(c) over lower corners c in {0..q^m - 1}^s.
    """
    if N == 0:
        return Fraction(0) if exact else 0.0
    ps = _as_pointset(points)
    if N > len(ps):
        raise DforgeError(f"N = {N} exceeds the {len(ps)} available points")
    if m is not None and m != ps.m:
        if m < ps.m:
            raise DforgeError(f"points have resolution {ps.m}, finer than m = {m}")
        ps = PointSet(ps.q, m, ps.numerators * ps.q ** (m - ps.m))
    Q = ps.q**ps.m
    s = ps.s
    H = box_counts(ps, N)
    dtype = object if N * (Q + 1) ** s >= 2**62 else np.int64
    scale = Q**s
    vol_all = _volume_numerators(Q, s, Q + 1).astype(dtype)
    below = (N * vol_all - H.astype(dtype) * scale).max()
    closed = H[(slice(1, None),) * s].astype(dtype) * scale
    above = (closed - N * vol_all[(slice(0, Q),) * s]).max()
    value = Fraction(int(max(below, above)), scale)
    return value if exact else float(value)


def g_factor(N: int, b: DigitVec, m: int) -> complex:
    """Closed form of sum_{n<N} omega^(<b, n>) through the first nonzero digit of b."""
    q = b.q
    if not 0 <= N < q**m:
        raise DforgeError(f"N = {N} must satisfy 0 <= N < {q}^{m}")
    w = first_nonzero_index(b)
    if w is None or w >= m:
        return complex(N)
    omega = omega_table(q)
    Nd = digit_list(N, q, m)
    phase = omega[sum(b[i] * Nd[i] for i in range(w + 1, m)) % q]
    bw, Nw = b[w], Nd[w]
    geo = (omega[(bw * Nw) % q] - 1) / (omega[bw] - 1)
    frac = Fraction(N % q**w, q**w)
    value = complex(phase * q**w * (geo + omega[(bw * Nw) % q] * float(frac)))
    assert abs(value) <= q * N + 1e-9, "|G| exceeded qN"
    return value


def g_table(N: int, m: int, q: int) -> np.ndarray:
    """``g_factor(N, b, m)`` for every b with m digits, indexed by b's integer value."""
    if not 0 <= N < q**m:
        raise DforgeError(f"N = {N} must satisfy 0 <= N < {q}^{m}")
    omega = omega_table(q)
    size = q**m
    bd = (np.arange(size, dtype=np.int64)[:, None] // (q ** np.arange(m, dtype=np.int64))) % q
    Nd = np.array(digit_list(N, q, m), dtype=np.int64)
    out = np.full(size, complex(N))
    nz = bd.any(axis=1)
    w = np.argmax(bd != 0, axis=1)
    idx = np.nonzero(nz)[0]
    w = w[idx]
    bw = bd[idx, w]
    Nw = Nd[w]
    pos = np.arange(m)
    higher = (bd[idx] * Nd[None, :] * (pos[None, :] > w[:, None])).sum(axis=1)
    qw = q ** w.astype(np.int64)
    frac = (N % qw) / qw
    top = omega[(bw * Nw) % q]
    out[idx] = omega[higher % q] * qw * ((top - 1) / (omega[bw] - 1) + top * frac)
    return out


@dataclass(frozen=True)
class CharacterSum:
    k: tuple[int, ...]
    b: DigitVec
    N: int
    value: complex
    direct: complex


def character_sum(T: GeneratorTuple, k: Sequence[int], N: int, check: bool = True) -> CharacterSum:
    """sum_{n<N} prod_j wal_{k_j}(x_{n,j}), in closed form and by direct summation."""
    from .digitalseq import combined_image

    q = T.q
    k = tuple(int(v) for v in k)
    if len(k) != T.s:
        raise DforgeError(f"expected {T.s} indices, got {len(k)}")
    m = T.m_c
    if not 0 <= N < q**m:
        raise DforgeError(f"N = {N} must be below q^m_c")
    b = combined_image(T, k)
    closed = g_factor(N, b, m)
    direct = closed
    if check:
        width = max(len(digit_list(v, q)) for v in k)
        if width > T.m_r:
            raise DforgeError(f"indices need {width} digits; matrices have {T.m_r} rows")
        if width == 0 or N == 0:
            direct = complex(N)
        else:
            x = point_digits(T, np.arange(N), width)  # (N, s, width)
            kd = np.array([digit_list(v, q, width) for v in k], dtype=np.int64)  # (s, width)
            exps = np.einsum("njw,jw->n", x, kd) % q
            direct = complex(omega_table(q)[exps].sum())
        if abs(direct - closed) > CHARACTER_SUM_TOL:
            raise InternalConsistencyError(
                f"character sum mismatch for k={k}, N={N}: closed {closed}, direct {direct}"
            )
    return CharacterSum(k, b, N, closed, direct)


def digitwise_add_arrays(a: np.ndarray, b: np.ndarray, q: int, m: int) -> np.ndarray:
    if q == 2:
        return np.bitwise_xor(a, b)
    out = np.zeros(np.broadcast(a, b).shape, dtype=np.int64)
    for i in range(m):
        p = q**i
        out += (((a // p) % q + (b // p) % q) % q) * p
    return out


def encoded_images(C, m: int) -> np.ndarray:
    """Integer encoding sum_i b_i q^i of the first m components of C^T k, all k < q^m."""
    q = C.q
    table = image_table(C, np.arange(q**m, dtype=np.int64), m)
    return table @ (q ** np.arange(m, dtype=np.int64))


def local_spectral(T: GeneratorTuple, x: GridPoint, N: int, m: int | None = None) -> float:
    """D(x, N) from the Walsh expansion: sum over k != 0 of prod_j J_{k_j}(x_j) G(N, b(k))."""
    q, s = T.q, T.s
    m = x.m if m is None else m
    if x.q != q or x.s != s:
        raise DforgeError("x must share base and dimension with the generator tuple")
    if m < x.m:
        raise DforgeError(f"m = {m} is coarser than the resolution of x")
    if not 0 <= N < q**m:
        raise DforgeError(f"N = {N} must satisfy N < q^m = {q}^{m}")
    if m > T.m_r or m > T.m_c:
        raise DforgeError(f"m = {m} exceeds the matrix block {T.m_r}x{T.m_c}")
    check_cost(q ** (m * s))
    G = g_table(N, m, q)
    prod_j = np.ones(1, dtype=complex)
    bval = np.zeros(1, dtype=np.int64)
    for C, xr in zip(T.matrices, x.coords):
        J = interval_coeffs(GridCoordinate(xr, x.m, q), m)
        img = encoded_images(C, m)
        prod_j = np.multiply.outer(prod_j, J).ravel()
        bval = digitwise_add_arrays(bval[:, None], img[None, :], q, m).ravel()
    terms = prod_j * G[bval]
    terms[0] = 0  # the all-zero index tuple is excluded
    total = terms.sum()
    if abs(total.imag) > SPECTRAL_IMAG_TOL:
        raise InternalConsistencyError(f"spectral sum has imaginary part {total.imag:.3e}")
    return float(total.real)


def log_predictors(N: int, s: int) -> tuple[float, float | None]:
    """(log N)^s and (log N)^s log log N with natural logs; the second is None for N <= 2."""
    if N < 1:
        raise DforgeError(f"N must be positive, got {N}")
    base = math.log(N) ** s
    return base, (base * math.log(math.log(N)) if N > 2 else None)
