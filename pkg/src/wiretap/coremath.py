"""Finite fields, entropy functionals and sorted probability vectors.

Symbol strings are stored as integer indices with the *first* symbol as the
most significant digit.  For GF(2^l) this means bit 0 of a word (in reading
order) is the coefficient of x^(l-1), so "the first lam bits" of a word are
``word >> (l - lam)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

__all__ = [
    "FieldMismatchError",
    "GF2m",
    "PrimeField",
    "FieldWord",
    "gf_mul",
    "gf_inv",
    "binary_entropy",
    "ProbVector",
    "EntropyStats",
    "sorted_probs",
    "entropy_stats",
    "stable_sum",
    "to_symbols",
    "from_symbols",
    "is_irreducible",
    "default_polynomial",
]

PROB_TOL = 1e-9

# Low-weight irreducible polynomials, bit i = coefficient of x^i.
_POLYNOMIALS = {
    1: 0b11,
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10000011,
    8: 0x11B,
    9: 0x211,
    10: 0x409,
    11: 0x805,
    12: 0x1009,
    13: 0x201B,
    14: 0x4021,
    15: 0x8003,
    16: 0x1002B,
}


class FieldMismatchError(ValueError):
    """Raised when combining elements of different fields."""


def _clmul(a, b, nbits):
    """Carry-less product of ``a`` and ``b``; works on ints and int arrays."""
    out = (a * 0) ^ (b * 0)
    for i in range(nbits):
        out ^= ((b >> i) & 1) * (a << i)
    return out


def _poly_mod(a: int, f: int) -> int:
    df = f.bit_length() - 1
    while a and a.bit_length() - 1 >= df:
        a ^= f << (a.bit_length() - 1 - df)
    return a


def _poly_mulmod(a: int, b: int, f: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        b >>= 1
        a <<= 1
        if a >> (f.bit_length() - 1):
            a ^= f
    return out


def _poly_gcd(a: int, b: int) -> int:
    while b:
        a, b = b, _poly_mod(a, b)
    return a


def _prime_factors(n: int) -> list[int]:
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def is_irreducible(poly: int) -> bool:
    """Rabin's irreducibility test for a polynomial over GF(2)."""
    l = poly.bit_length() - 1
    if l < 1:
        return False
    if l == 1:
        return True

    def frob(k):
        # x^(2^k) mod poly
        y = 0b10
        for _ in range(k):
            y = _poly_mulmod(y, y, poly)
        return y

    if frob(l) != 0b10:
        return False
    for q in _prime_factors(l):
        if _poly_gcd(poly, frob(l // q) ^ 0b10) != 1:
            return False
    return True


@lru_cache(maxsize=None)
def default_polynomial(l: int) -> int:
    """Irreducible polynomial used for GF(2^l) unless overridden.

    Degrees up to 16 come from a fixed table; larger degrees take the
    lexicographically smallest irreducible trinomial, then pentanomial.
    """
    if l < 1:
        raise ValueError(f"field degree must be positive, got {l}")
    if l in _POLYNOMIALS:
        return _POLYNOMIALS[l]
    top = (1 << l) | 1
    for a in range(1, l):
        if is_irreducible(top | (1 << a)):
            return top | (1 << a)
    for a in range(1, l):
        for b in range(a + 1, l):
            for c in range(b + 1, l):
                cand = top | (1 << a) | (1 << b) | (1 << c)
                if is_irreducible(cand):
                    return cand
    raise ValueError(f"no low-weight irreducible polynomial of degree {l}")


_TABLE_MAX_DEGREE = 20


@lru_cache(maxsize=32)
def _log_tables(l: int, poly: int) -> tuple[np.ndarray, np.ndarray]:
    """Discrete log and doubled antilog tables with respect to a generator."""
    order = (1 << l) - 1
    for g in range(2, 1 << l) if l > 1 else [1]:
        powers = np.empty(order, dtype=np.int64)
        x = 1
        for i in range(order):
            powers[i] = x
            x = _poly_mulmod(x, g, poly)
            if x == 1 and i < order - 1:
                break
        else:
            break
    log = np.zeros(1 << l, dtype=np.int64)
    log[powers] = np.arange(order)
    exp = np.concatenate([powers, powers])
    log.setflags(write=False)
    exp.setflags(write=False)
    return log, exp


@dataclass(frozen=True)
class GF2m:
    """The extension field GF(2^l) with a fixed reduction polynomial."""

    l: int
    poly: int = 0

    def __post_init__(self):
        if self.l < 1:
            raise ValueError(f"field degree must be positive, got {self.l}")
        if self.poly == 0:
            object.__setattr__(self, "poly", default_polynomial(self.l))
        if self.poly.bit_length() - 1 != self.l:
            raise ValueError(f"polynomial {self.poly:#x} does not have degree {self.l}")
        if not is_irreducible(self.poly):
            raise ValueError(f"polynomial {self.poly:#x} is reducible")

    @property
    def order(self) -> int:
        return 1 << self.l

    def mul(self, a, b):
        """Field product; ``a`` and ``b`` may be ints or integer arrays."""
        if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
            if self.l > 31:
                raise ValueError("array multiplication supports l <= 31")
            a = np.asarray(a, dtype=np.int64)
            b = np.asarray(b, dtype=np.int64)
            if self.l <= _TABLE_MAX_DEGREE:
                log, exp = _log_tables(self.l, self.poly)
                out = exp[log[a] + log[b]]
                return np.where((a == 0) | (b == 0), 0, out)
        return self.mul_reference(a, b)

    def mul_reference(self, a, b):
        """Shift-and-add product with explicit reduction (no tables)."""
        prod = _clmul(a, b, self.l)
        for i in range(2 * self.l - 2, self.l - 1, -1):
            prod ^= ((prod >> i) & 1) * (self.poly << (i - self.l))
        return prod

    def inv(self, a: int) -> int:
        if a % self.order == 0:
            raise ZeroDivisionError("zero has no multiplicative inverse")
        # a^(2^l - 2) by square-and-multiply
        result, base, e = 1, a, self.order - 2
        while e:
            if e & 1:
                result = _poly_mulmod(result, base, self.poly)
            base = _poly_mulmod(base, base, self.poly)
            e >>= 1
        return result

    def add(self, a, b):
        return a ^ b


@dataclass(frozen=True)
class PrimeField:
    """The prime field Z/p."""

    p: int

    def __post_init__(self):
        if self.p < 2 or any(self.p % d == 0 for d in range(2, math.isqrt(self.p) + 1)):
            raise ValueError(f"{self.p} is not prime")

    @property
    def order(self) -> int:
        return self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def inv(self, a: int) -> int:
        if a % self.p == 0:
            raise ZeroDivisionError("zero has no multiplicative inverse")
        return pow(a, self.p - 2, self.p)

    def add(self, a, b):
        return (a + b) % self.p


@dataclass(frozen=True)
class FieldWord:
    """An element of GF(2^l) (an l-bit word) or of Z/p (one symbol)."""

    value: int
    field: GF2m | PrimeField = field(default_factory=lambda: PrimeField(2))

    def __post_init__(self):
        if not 0 <= self.value < self.field.order:
            raise ValueError(f"{self.value} is not an element of {self.field}")

    @property
    def bits(self) -> tuple[int, ...]:
        """Coefficients in reading order (highest power first)."""
        if isinstance(self.field, PrimeField):
            return (self.value,)
        return tuple(int(b) for b in to_symbols(self.value, self.field.l))

    def _check(self, other: FieldWord):
        if not isinstance(other, FieldWord):
            return NotImplemented
        if other.field != self.field:
            raise FieldMismatchError(f"cannot combine {self.field} with {other.field}")
        return None

    def __add__(self, other: FieldWord) -> FieldWord:
        if self._check(other) is NotImplemented:
            return NotImplemented
        return FieldWord(self.field.add(self.value, other.value), self.field)

    def __mul__(self, other: FieldWord) -> FieldWord:
        if self._check(other) is NotImplemented:
            return NotImplemented
        return FieldWord(int(self.field.mul(self.value, other.value)), self.field)

    def inverse(self) -> FieldWord:
        return FieldWord(self.field.inv(self.value), self.field)


def gf_mul(a: FieldWord, b: FieldWord) -> FieldWord:
    return a * b


def gf_inv(a: FieldWord) -> FieldWord:
    return a.inverse()


def binary_entropy(p: float) -> float:
    """h(p) in bits, with 0 log 0 = 0."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"binary entropy needs p in [0, 1], got {p}")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def stable_sum(x) -> float:
    """Compensated sum of every entry of ``x``."""
    return math.fsum(np.ravel(np.asarray(x, dtype=float)).tolist())


class ProbVector:
    """A finite probability distribution over outcomes ``0..len-1``.

    ``sorted_view`` is the descending arrangement of the probabilities, so two
    distributions that differ only by a relabelling of outcomes have equal
    sorted views.
    """

    __slots__ = ("_probs", "_sorted")

    def __init__(self, probs, *, tol: float = PROB_TOL):
        arr = np.array(probs, dtype=float).ravel()
        if arr.size == 0:
            raise ValueError("empty distribution")
        if np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise ValueError("probabilities must be finite and non-negative")
        total = stable_sum(arr)
        if abs(total - 1.0) > tol:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        arr.setflags(write=False)
        self._probs = arr
        self._sorted = None

    @property
    def probs(self) -> np.ndarray:
        return self._probs

    @property
    def sorted_view(self) -> np.ndarray:
        if self._sorted is None:
            s = -np.sort(-self._probs)
            s.setflags(write=False)
            self._sorted = s
        return self._sorted

    def __len__(self) -> int:
        return self._probs.size

    def __getitem__(self, i):
        return self._probs[i]

    def __repr__(self) -> str:
        return f"ProbVector({self._probs.tolist()!r})" if len(self) <= 8 else f"ProbVector(<{len(self)} outcomes>)"

    @classmethod
    def uniform(cls, size: int) -> ProbVector:
        return cls(np.full(size, 1.0 / size))


@dataclass(frozen=True)
class EntropyStats:
    """Shannon entropy and the variance of the surprisal, both in bits."""

    entropy: float
    variance_log: float


def sorted_probs(d: ProbVector) -> np.ndarray:
    return d.sorted_view


def entropy_stats(d) -> EntropyStats:
    """Entropy and variance of the surprisal ``-log2 P``, in bits."""
    if not isinstance(d, ProbVector):
        d = ProbVector(d)
    p = d.probs[d.probs > 0]
    surprisal = -np.log2(p)
    h = stable_sum(p * surprisal)
    var = stable_sum(p * (surprisal - h) ** 2)
    return EntropyStats(max(h, 0.0), max(var, 0.0))


def to_symbols(index, width: int, p: int = 2) -> np.ndarray:
    """Digits of ``index`` in base ``p``, most significant first.

    Works elementwise on arrays; the digit axis is appended last.
    """
    idx = np.asarray(index, dtype=np.int64)
    powers = p ** np.arange(width - 1, -1, -1, dtype=np.int64)
    return (idx[..., None] // powers) % p


def from_symbols(symbols, p: int = 2):
    """Inverse of :func:`to_symbols` along the last axis."""
    sym = np.asarray(symbols, dtype=np.int64)
    width = sym.shape[-1]
    powers = p ** np.arange(width - 1, -1, -1, dtype=np.int64)
    out = sym @ powers
    return int(out) if out.ndim == 0 else out
