"""Base-q digit arithmetic.

Digit vectors are little-endian: index 0 holds the least significant digit
of an integer, or the first digit after the radix point of a real in [0, 1).
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import BaseMismatchError, DforgeError

MAX_BASE = 257


@functools.lru_cache(maxsize=None)
def check_base(q: int) -> int:
    """Return ``q`` if it is a prime in [2, 257], else raise."""
    if not isinstance(q, int) or isinstance(q, bool):
        raise DforgeError(f"base must be an integer, got {q!r}")
    if q < 2 or q > MAX_BASE:
        raise DforgeError(f"base must lie in [2, {MAX_BASE}], got {q}")
    d = 2
    while d * d <= q:
        if q % d == 0:
            raise DforgeError(f"base must be prime, got {q}")
        d += 1
    return q


def digit_list(n: int, q: int, width: int | None = None) -> list[int]:
    """Little-endian digits of ``n``; padded or checked against ``width`` when given."""
    if n < 0:
        raise DforgeError(f"expected a nonnegative integer, got {n}")
    out = []
    while n:
        n, d = divmod(n, q)
        out.append(d)
    if width is not None:
        if len(out) > width:
            raise DforgeError(f"integer needs {len(out)} digits, more than {width}")
        out.extend([0] * (width - len(out)))
    return out


def from_digits(digits: Iterable[int], q: int) -> int:
    value = 0
    for d in reversed(list(digits)):
        value = value * q + d
    return value


@dataclass(frozen=True)
class DigitVec:
    """A finitely supported vector over Z_q, stored in canonical form.

    Canonical means no trailing zero digits, so the zero vector has an empty
    digit tuple. Equality is structural.
    """

    q: int
    digits: tuple[int, ...] = ()

    def __post_init__(self):
        check_base(self.q)
        digits = tuple(int(d) for d in self.digits)
        for d in digits:
            if not 0 <= d < self.q:
                raise DforgeError(f"digit {d} out of range for base {self.q}")
        end = len(digits)
        while end and digits[end - 1] == 0:
            end -= 1
        object.__setattr__(self, "digits", digits[:end])

    @classmethod
    def of(cls, n: int, q: int) -> DigitVec:
        return digits_of(n, q)

    @property
    def value(self) -> int:
        return from_digits(self.digits, self.q)

    def __len__(self) -> int:
        return len(self.digits)

    def __getitem__(self, i: int) -> int:
        # Unlisted positions are zero.
        return self.digits[i] if 0 <= i < len(self.digits) else 0

    def __bool__(self) -> bool:
        return bool(self.digits)

    def __add__(self, other: DigitVec) -> DigitVec:
        return digit_add(self, other)

    def __rmul__(self, c: int) -> DigitVec:
        return scalar_mul(c, self)

    def padded(self, width: int) -> list[int]:
        if len(self.digits) > width:
            raise DforgeError(f"digit vector has {len(self.digits)} digits, more than {width}")
        return list(self.digits) + [0] * (width - len(self.digits))


def digits_of(n: int, q: int) -> DigitVec:
    """Base-``q`` expansion of ``n`` as a canonical digit vector."""
    check_base(q)
    return DigitVec(q, tuple(digit_list(n, q)))


def length_of(k: int, q: int) -> int:
    """Position of the highest nonzero digit of ``k``, i.e. floor(log_q k).

    Computed by counting digits. ``k = 0`` has no length and is rejected.
    """
    check_base(q)
    if k < 1:
        raise DforgeError(f"length is only defined for k >= 1, got {k}")
    return len(digit_list(k, q)) - 1


def _same_base(k: DigitVec, l: DigitVec) -> int:
    if k.q != l.q:
        raise BaseMismatchError(f"base mismatch: {k.q} vs {l.q}")
    return k.q


def digit_add(k: DigitVec, l: DigitVec) -> DigitVec:
    """Componentwise sum modulo q (the integer operation written k (+) l)."""
    q = _same_base(k, l)
    n = max(len(k), len(l))
    return DigitVec(q, tuple((k[i] + l[i]) % q for i in range(n)))


def digitwise_add(a: int, b: int, q: int) -> int:
    """Integer form of :func:`digit_add`."""
    if q == 2:
        return a ^ b
    out, scale = 0, 1
    while a or b:
        a, da = divmod(a, q)
        b, db = divmod(b, q)
        out += ((da + db) % q) * scale
        scale *= q
    return out


def scalar_mul(c: int, k: DigitVec) -> DigitVec:
    if not 1 <= c < k.q:
        raise DforgeError(f"scalar must lie in [1, {k.q}), got {c}")
    return DigitVec(k.q, tuple((c * d) % k.q for d in k.digits))


def first_nonzero_index(b: DigitVec | Sequence[int]) -> int | None:
    """0-based index of the first nonzero component; ``None`` for the zero vector."""
    digits = b.digits if isinstance(b, DigitVec) else b
    for i, d in enumerate(digits):
        if d:
            return i
    return None


def valuation(b: DigitVec | Sequence[int]) -> int | None:
    """Valuation of ``b`` read as a 1-based vector (b_1, b_2, ...).

    Returns ``-(index + 1)`` for the first nonzero 0-based index, and ``None``
    (standing for minus infinity) for the zero vector. Thus ``valuation(b) <= -m``
    holds exactly when the first m - 1 components vanish.
    """
    w = first_nonzero_index(b)
    return None if w is None else -(w + 1)


def valuation_at_most(b: DigitVec | Sequence[int], bound: int) -> bool:
    """``valuation(b) <= bound`` with the zero vector counted as minus infinity."""
    v = valuation(b)
    return v is None or v <= bound


def valuation_at_least(b: DigitVec | Sequence[int], bound: float) -> bool:
    """``valuation(b) >= bound``; never true for the zero vector."""
    v = valuation(b)
    return v is not None and v >= bound


def is_strongly_dependent(k: Sequence[DigitVec], l: Sequence[DigitVec]) -> bool:
    """True iff some nonzero scalar c gives k_i = c * l_i for every coordinate."""
    if len(k) != len(l):
        raise DforgeError(f"arity mismatch: {len(k)} vs {len(l)}")
    if not k:
        raise DforgeError("tuples must be nonempty")
    q = k[0].q
    for a, b in zip(k, l):
        if a.q != q or b.q != q:
            raise BaseMismatchError("all digit vectors must share one base")
    for c in range(1, q):
        if all(a == DigitVec(q, tuple((c * d) % q for d in b.digits)) for a, b in zip(k, l)):
            return True
    return False
