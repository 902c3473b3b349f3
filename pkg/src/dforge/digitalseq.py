"""Generating matrices, digital-sequence points and random matrix tuples.

An infinite generating matrix is represented by its upper-left block of
``m_r`` rows and ``m_c`` columns. That block is exact for indices n < q^m_c
and output precision m <= m_r, since digit i of a point only involves row i
and the first m_c columns.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterator, Sequence

import numpy as np

from .errors import BaseMismatchError, DforgeError
from .qadic import DigitVec, check_base, digit_list, digits_of

DEFAULT_DIGITS = 32


@dataclass(frozen=True, eq=False)
class GeneratorMatrix:
    """An ``rows x cols`` block over Z_q; row i produces output digit i + 1."""

    q: int
    entries: np.ndarray

    def __post_init__(self):
        check_base(self.q)
        a = np.array(self.entries, dtype=np.int64)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise DforgeError(f"matrix must be a nonempty 2-d array, got shape {a.shape}")
        if a.min() < 0 or a.max() >= self.q:
            raise DforgeError(f"matrix entries must lie in [0, {self.q})")
        a.flags.writeable = False
        object.__setattr__(self, "entries", a)

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    def __eq__(self, other):
        if not isinstance(other, GeneratorMatrix):
            return NotImplemented
        return self.q == other.q and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash((self.q, self.entries.tobytes(), self.entries.shape))


@dataclass(frozen=True, eq=False)
class GeneratorTuple:
    """s generating matrices sharing base and block shape."""

    matrices: tuple[GeneratorMatrix, ...]
    provenance: dict[str, Any] = field(default_factory=lambda: {"kind": "explicit"})

    def __post_init__(self):
        mats = tuple(self.matrices)
        if not mats:
            raise DforgeError("a generator tuple needs at least one matrix")
        first = mats[0]
        for C in mats[1:]:
            if C.q != first.q:
                raise BaseMismatchError("all matrices must share one base")
            if C.entries.shape != first.entries.shape:
                raise DforgeError("all matrices must share one block shape")
        object.__setattr__(self, "matrices", mats)

    @property
    def q(self) -> int:
        return self.matrices[0].q

    @property
    def s(self) -> int:
        return len(self.matrices)

    @property
    def m_r(self) -> int:
        return self.matrices[0].rows

    @property
    def m_c(self) -> int:
        return self.matrices[0].cols

    def stacked(self) -> np.ndarray:
        """Entries as one array of shape (s, m_r, m_c)."""
        return np.stack([C.entries for C in self.matrices])

    def __eq__(self, other):
        if not isinstance(other, GeneratorTuple):
            return NotImplemented
        return self.matrices == other.matrices

    def __hash__(self):
        return hash(self.matrices)

    def to_dict(self) -> dict[str, Any]:
        return {
            "q": self.q,
            "s": self.s,
            "m_r": self.m_r,
            "m_c": self.m_c,
            "seed": self.provenance.get("seed"),
            "stream": self.provenance.get("stream"),
            "provenance": self.provenance,
            "entries": [C.entries.tolist() for C in self.matrices],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> GeneratorTuple:
        q = int(doc["q"])
        mats = tuple(GeneratorMatrix(q, np.array(e, dtype=np.int64)) for e in doc["entries"])
        T = cls(mats, dict(doc.get("provenance") or {"kind": "explicit"}))
        if (T.s, T.m_r, T.m_c) != (doc["s"], doc["m_r"], doc["m_c"]):
            raise DforgeError("declared s, m_r, m_c do not match the entries")
        return T

    @classmethod
    def from_json(cls, text: str) -> GeneratorTuple:
        return cls.from_dict(json.loads(text))


def rank_mod_q(a: np.ndarray, q: int) -> int:
    """Rank of an integer matrix over Z_q by Gaussian elimination."""
    m = np.array(a, dtype=np.int64) % q
    rows, cols = m.shape
    rank = 0
    for col in range(cols):
        pivot = next((r for r in range(rank, rows) if m[r, col]), None)
        if pivot is None:
            continue
        m[[rank, pivot]] = m[[pivot, rank]]
        m[rank] = (m[rank] * pow(int(m[rank, col]), -1, q)) % q
        for r in range(rows):
            if r != rank and m[r, col]:
                m[r] = (m[r] - m[r, col] * m[rank]) % q
        rank += 1
        if rank == rows:
            break
    return rank


def digit_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based Philox generator keyed by (seed, stream).

    Distinct streams come from distinct spawn keys of one seed sequence, so
    they are independent and never share state.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(stream),))
    return np.random.Generator(np.random.Philox(ss))


def sample_tuple(
    s: int,
    q: int,
    m_r: int = DEFAULT_DIGITS,
    m_c: int = DEFAULT_DIGITS,
    seed: int = 0,
    stream: int = 0,
    invertible: int | None = None,
) -> GeneratorTuple:
    """Draw s matrices with independent uniform entries in Z_q.

    With ``invertible=t`` each matrix is redrawn until its upper-left t x t
    block has full rank; the number of redraws is kept in the provenance.
    """
    check_base(q)
    if s < 1 or m_r < 1 or m_c < 1:
        raise DforgeError("s, m_r and m_c must be positive")
    if invertible is not None and not 1 <= invertible <= min(m_r, m_c):
        raise DforgeError(f"invertible block size {invertible} does not fit {m_r}x{m_c}")
    rng = digit_rng(seed, stream)
    mats = []
    redraws = 0
    for _ in range(s):
        while True:
            a = rng.integers(0, q, size=(m_r, m_c), dtype=np.int64)
            if invertible is None or rank_mod_q(a[:invertible, :invertible], q) == invertible:
                break
            redraws += 1
        mats.append(GeneratorMatrix(q, a))
    prov: dict[str, Any] = {"kind": "sampled", "seed": int(seed), "stream": int(stream),
                            "generator": "philox"}
    if invertible is not None:
        prov["invertible"] = invertible
        prov["redraws"] = redraws
    return GeneratorTuple(tuple(mats), prov)


def named_matrix(kind: str, q: int, m: int, cols: int | None = None) -> GeneratorMatrix:
    """Classical baseline matrices of size m x cols (square by default).

    ``identity`` gives the van der Corput sequence; ``pascal`` has entry
    (i, j) = binomial(j, i) mod q, Faure's construction.
    """
    check_base(q)
    cols = m if cols is None else cols
    if kind == "identity":
        a = np.eye(m, cols, dtype=np.int64)
    elif kind == "pascal":
        a = np.array([[math.comb(j, i) % q for j in range(cols)] for i in range(m)], dtype=np.int64)
    else:
        raise DforgeError(f"unknown matrix kind {kind!r}; expected 'identity' or 'pascal'")
    return GeneratorMatrix(q, a)


def named_tuple(kinds: Sequence[str], q: int, m_r: int, m_c: int | None = None) -> GeneratorTuple:
    mats = tuple(named_matrix(k, q, m_r, m_c) for k in kinds)
    return GeneratorTuple(mats, {"kind": "named", "matrices": list(kinds)})


def _as_digitvec(k: DigitVec | int, q: int) -> DigitVec:
    if isinstance(k, DigitVec):
        if k.q != q:
            raise BaseMismatchError(f"digit vector base {k.q} does not match {q}")
        return k
    return digits_of(int(k), q)


def apply_transpose(C: GeneratorMatrix, k: DigitVec | int) -> DigitVec:
    """C^T k over Z_q: component b is sum_a C[a, b] * k_a."""
    k = _as_digitvec(k, C.q)
    if len(k) > C.rows:
        raise DforgeError(f"index has {len(k)} digits but the matrix has only {C.rows} rows")
    if not k:
        return DigitVec(C.q)
    image = np.array(k.digits, dtype=np.int64) @ C.entries[: len(k)]
    return DigitVec(C.q, tuple((image % C.q).tolist()))


def combined_image(T: GeneratorTuple, ks: Sequence[DigitVec | int]) -> DigitVec:
    """Digitwise sum over j of C_j^T k_j."""
    if len(ks) != T.s:
        raise DforgeError(f"expected {T.s} indices, got {len(ks)}")
    q = T.q
    total = np.zeros(T.m_c, dtype=np.int64)
    for C, k in zip(T.matrices, ks):
        total += np.array(apply_transpose(C, k).padded(T.m_c), dtype=np.int64)
    return DigitVec(q, tuple((total % q).tolist()))


def image_table(C: GeneratorMatrix, indices: np.ndarray, width: int) -> np.ndarray:
    """First ``width`` components of C^T k for each index k, shape (len, width)."""
    q = C.q
    ndig = max(1, len(digit_list(int(np.max(indices, initial=0)), q)))
    if ndig > C.rows:
        raise DforgeError(f"indices need {ndig} digits but the matrix has only {C.rows} rows")
    if width > C.cols:
        raise DforgeError(f"requested {width} image components from {C.cols} columns")
    powers = q ** np.arange(ndig, dtype=np.int64)
    kd = (np.asarray(indices, dtype=np.int64)[:, None] // powers[None, :]) % q
    return (kd @ C.entries[:ndig, :width]) % q


@dataclass(frozen=True)
class GridPoint:
    """A point of Q^s(q^m), stored as integer numerators over q^m."""

    coords: tuple[int, ...]
    m: int
    q: int

    def __post_init__(self):
        check_base(self.q)
        coords = tuple(int(c) for c in self.coords)
        size = self.q**self.m
        for c in coords:
            if not 0 <= c < size:
                raise DforgeError(f"coordinate numerator {c} outside [0, {size})")
        object.__setattr__(self, "coords", coords)

    @property
    def s(self) -> int:
        return len(self.coords)

    def values(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(c, self.q**self.m) for c in self.coords)

    def volume(self) -> Fraction:
        return math.prod(self.values(), start=Fraction(1))


@dataclass(frozen=True, eq=False)
class PointSet:
    """The first N points of a digital sequence, truncated to m digits.

    ``numerators`` has shape (N, s). Indexing yields :class:`GridPoint`.
    """

    q: int
    m: int
    numerators: np.ndarray

    def __post_init__(self):
        a = np.array(self.numerators, dtype=np.int64)
        if a.ndim != 2:
            a = a.reshape(len(a), -1)
        a.flags.writeable = False
        object.__setattr__(self, "numerators", a)

    @property
    def s(self) -> int:
        return self.numerators.shape[1]

    def __len__(self) -> int:
        return self.numerators.shape[0]

    def __getitem__(self, i: int) -> GridPoint:
        return GridPoint(tuple(self.numerators[i].tolist()), self.m, self.q)

    def __iter__(self) -> Iterator[GridPoint]:
        for i in range(len(self)):
            yield self[i]

    def __eq__(self, other):
        if not isinstance(other, PointSet):
            return NotImplemented
        return (self.q, self.m) == (other.q, other.m) and np.array_equal(
            self.numerators, other.numerators
        )

    @classmethod
    def from_points(cls, points: Sequence[GridPoint]) -> PointSet:
        if not points:
            raise DforgeError("cannot infer base and resolution from an empty list")
        q, m = points[0].q, points[0].m
        if any(p.q != q or p.m != m for p in points):
            raise DforgeError("points must share base and resolution")
        return cls(q, m, np.array([p.coords for p in points], dtype=np.int64))


def point_digits(T: GeneratorTuple, n: np.ndarray, m: int) -> np.ndarray:
    """Digits x_{n,j,1..m} of each point, shape (len(n), s, m)."""
    q = T.q
    if m > T.m_r:
        raise DforgeError(f"precision {m} exceeds the {T.m_r} matrix rows")
    n = np.asarray(n, dtype=np.int64)
    if n.size and int(n.max()) >= q**T.m_c:
        raise DforgeError(f"index {int(n.max())} needs more than {T.m_c} digits")
    nd = (n[:, None] // (q ** np.arange(T.m_c, dtype=np.int64))[None, :]) % q
    # C_j has shape (m_r, m_c); x_{n,j} = C_j n.
    return np.einsum("nc,jrc->njr", nd, T.stacked()[:, :m, :]) % q


def point(T: GeneratorTuple, n: int, m: int) -> GridPoint:
    """The n-th point of the sequence with coordinates truncated to m digits."""
    if n < 0:
        raise DforgeError(f"index must be nonnegative, got {n}")
    return point_set(T, n + 1, m)[n]


def point_set(T: GeneratorTuple, N: int, m: int) -> PointSet:
    """Points n = 0..N-1, in index order."""
    q = T.q
    if N < 0:
        raise DforgeError(f"point count must be nonnegative, got {N}")
    if N > q**T.m_c:
        raise DforgeError(f"N = {N} exceeds q^m_c = {q}^{T.m_c}")
    digits = point_digits(T, np.arange(N, dtype=np.int64), m)
    weights = q ** np.arange(m - 1, -1, -1, dtype=np.int64)
    numerators = digits @ weights if N else np.zeros((0, T.s), dtype=np.int64)
    return PointSet(q, m, numerators.reshape(N, T.s))
