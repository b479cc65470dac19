"""Invertible two-universal extractors.

Both families map an ``l``-symbol input ``v`` and a seed ``s`` to a
``lam``-symbol output, and come with an inverter that, given fresh
randomness ``r`` of ``l - lam`` symbols, produces a uniformly distributed
preimage of a message.

Inputs, outputs, seeds and randomness are integer indices (first symbol most
significant, see :mod:`wiretap.coremath`).  ``extract`` and ``invert``
broadcast over numpy integer arrays for ``v``, ``m`` and ``r``; the seed is
always a scalar.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .coremath import GF2m, PrimeField, from_symbols, to_symbols

__all__ = [
    "ExtractorParams",
    "InvertibleExtractor",
    "FiniteFieldExtractor",
    "ModifiedToeplitzExtractor",
    "make_extractor",
    "ff_extract",
    "ff_invert",
    "toeplitz_extract",
    "toeplitz_invert",
    "toeplitz_matrix",
    "inverse_table",
]


@dataclass(frozen=True)
class ExtractorParams:
    l: int
    lam: int
    seed_len: int
    p: int = 2

    def __post_init__(self):
        if not 0 < self.lam <= self.l:
            raise ValueError(f"need 0 < lam <= l, got lam={self.lam}, l={self.l}")

    @property
    def rand_len(self) -> int:
        return self.l - self.lam


class InvertibleExtractor:
    """Common surface of the extractor families."""

    family = "abstract"

    def __init__(self, l: int, lam: int, p: int = 2):
        PrimeField(p)
        self.params = ExtractorParams(l, lam, self._seed_len(l), p)
        self.l, self.lam, self.p = l, lam, p

    @staticmethod
    def _seed_len(l: int) -> int:
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}(l={self.l}, lam={self.lam}, p={self.p})"

    def __eq__(self, other):
        return type(self) is type(other) and self.params == other.params

    def __hash__(self):
        return hash((type(self), self.params))

    @property
    def n_inputs(self) -> int:
        return self.p**self.l

    @property
    def n_messages(self) -> int:
        return self.p**self.lam

    @property
    def n_random(self) -> int:
        return self.p ** (self.l - self.lam)

    @property
    def n_seeds(self) -> int:
        return len(self.seeds())

    def seeds(self) -> np.ndarray:
        """All valid seed indices."""
        raise NotImplementedError

    def sample_seed(self, rng: np.random.Generator) -> int:
        seeds = self.seeds()
        return int(seeds[rng.integers(len(seeds))])

    def extract(self, v, s: int):
        raise NotImplementedError

    def invert(self, m, s: int, r):
        raise NotImplementedError

    def extract_many(self, v, seeds):
        """``extract`` for every seed at once; row ``i`` uses ``seeds[i]``.

        ``v`` is either shared by all seeds or has one row per seed.
        """
        seeds = np.asarray(seeds, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        rows = [v[i] if v.ndim > 1 else v for i in range(seeds.size)]
        return np.stack([np.asarray(self.extract(x, int(s))) for x, s in zip(rows, seeds)])

    def invert_many(self, m, seeds, r):
        """``invert`` for every seed at once, shared ``m`` and ``r``."""
        return np.stack([np.asarray(self.invert(m, int(s), r)) for s in np.asarray(seeds)])

    def _check_range(self, name, x, bound):
        x = np.asarray(x)
        if x.size and (x.min() < 0 or x.max() >= bound):
            raise ValueError(f"{name} out of range [0, {bound})")


class FiniteFieldExtractor(InvertibleExtractor):
    """Ext(v, s) = leading ``lam`` bits of v * s in GF(2^l), seed s != 0."""

    family = "finite_field"

    def __init__(self, l: int, lam: int, poly: int = 0):
        super().__init__(l, lam, 2)
        self.field = GF2m(l, poly)

    @staticmethod
    def _seed_len(l):
        return l

    def seeds(self):
        return np.arange(1, 1 << self.l, dtype=np.int64)

    def _check_seed(self, s):
        if not 0 < s < (1 << self.l):
            raise ValueError("finite-field seed must be a non-zero element of GF(2^l)")

    def extract(self, v, s):
        self._check_seed(s)
        self._check_range("v", v, self.n_inputs)
        out = self.field.mul(v, int(s)) >> (self.l - self.lam)
        return out

    def invert(self, m, s, r):
        self._check_seed(s)
        self._check_range("m", m, self.n_messages)
        self._check_range("r", r, self.n_random)
        word = (m << (self.l - self.lam)) | r
        return self.field.mul(word, self.field.inv(int(s)))

    def _check_seeds(self, seeds):
        seeds = np.asarray(seeds, dtype=np.int64)
        if seeds.size and (seeds.min() < 1 or seeds.max() >= (1 << self.l)):
            raise ValueError("finite-field seed must be a non-zero element of GF(2^l)")
        return seeds

    def extract_many(self, v, seeds):
        seeds = self._check_seeds(seeds)
        self._check_range("v", v, self.n_inputs)
        v = np.asarray(v, dtype=np.int64)
        v = v[None, :] if v.ndim == 1 else v
        return self.field.mul(v, seeds[:, None]) >> (self.l - self.lam)

    def invert_many(self, m, seeds, r):
        seeds = self._check_seeds(seeds)
        self._check_range("m", m, self.n_messages)
        self._check_range("r", r, self.n_random)
        word = (np.asarray(m, dtype=np.int64) << (self.l - self.lam)) | np.asarray(r, dtype=np.int64)
        inv = inverse_table(self.field)[seeds]
        return self.field.mul(word[None, :], inv[:, None])


@lru_cache(maxsize=4096)
def _toeplitz(s: int, l: int, lam: int, p: int) -> np.ndarray:
    digits = to_symbols(s, l - 1, p) if l > 1 else np.zeros(0, dtype=np.int64)
    cols = l - lam
    t = np.zeros((lam, cols), dtype=np.int64)
    for i in range(lam):
        for j in range(cols):
            d = i - j
            # column 0 top-to-bottom, then row 0 from column 1 rightwards
            t[i, j] = digits[d] if d >= 0 else digits[lam - 1 - d]
    t.setflags(write=False)
    return t


def _small_matmul(a, b) -> np.ndarray:
    # BLAS float product; exact since entries and sums stay far below 2**53
    return np.rint(np.matmul(a.astype(np.float64), b.astype(np.float64))).astype(np.int64)


@lru_cache(maxsize=64)
def _inverse_table(l: int, poly: int) -> np.ndarray:
    field = GF2m(l, poly)
    a = np.arange(1 << l, dtype=np.int64)
    # a^(2^l - 2) = prod of a^(2^i) for i = 1 .. l-1
    out = np.ones_like(a)
    sq = a
    for _ in range(1, l):
        sq = field.mul(sq, sq)
        out = field.mul(out, sq)
    out[0] = 0
    out.setflags(write=False)
    return out


def inverse_table(field: GF2m) -> np.ndarray:
    """Multiplicative inverse of every element (entry 0 is a placeholder)."""
    if field.l > 22:
        raise ValueError("inverse tables are built for l <= 22 only")
    return _inverse_table(field.l, field.poly)


def toeplitz_matrix(s: int, l: int, lam: int, p: int = 2) -> np.ndarray:
    """The ``lam x (l - lam)`` Toeplitz matrix built from seed index ``s``."""
    if not 0 <= s < p ** (l - 1):
        raise ValueError("seed out of range")
    return _toeplitz(int(s), l, lam, p)


class ModifiedToeplitzExtractor(InvertibleExtractor):
    """Ext(v, s) = [T(s) | I] v over Z/p; seeds are ``l - 1`` symbols.

    The input splits as ``v = (v_high, v_low)`` with ``l - lam`` and ``lam``
    symbols; the inverter returns ``(r, m - T(s) r)``.
    """

    family = "toeplitz"

    @staticmethod
    def _seed_len(l):
        return l - 1

    def seeds(self):
        return np.arange(self.p ** (self.l - 1), dtype=np.int64)

    def matrix(self, s: int) -> np.ndarray:
        return toeplitz_matrix(s, self.l, self.lam, self.p)

    def extract(self, v, s):
        self._check_range("v", v, self.n_inputs)
        t = self.matrix(s)
        v = np.asarray(v, dtype=np.int64)
        split = self.p**self.lam
        high = to_symbols(v // split, self.l - self.lam, self.p)
        low = to_symbols(v % split, self.lam, self.p)
        return from_symbols((high @ t.T + low) % self.p, self.p)

    def _matrices(self, seeds) -> np.ndarray:
        """Stack of ``T(s)`` of shape ``(len(seeds), lam, l - lam)``."""
        seeds = np.asarray(seeds, dtype=np.int64)
        if seeds.size and (seeds.min() < 0 or seeds.max() >= self.p ** (self.l - 1)):
            raise ValueError("seed out of range")
        digits = to_symbols(seeds, self.l - 1, self.p)
        i, j = np.indices((self.lam, self.l - self.lam))
        d = i - j
        return digits[:, np.where(d >= 0, d, self.lam - 1 - d)]

    def _product_table(self, seeds) -> np.ndarray:
        """``T(s) r`` as an index, for every seed row and every ``r``.

        Binary only: built by XOR doubling over the columns of ``T(s)``.
        """
        t = self._matrices(seeds)
        cols = self.l - self.lam
        col_idx = from_symbols(t.transpose(0, 2, 1), 2)  # (S, cols), column j <-> bit cols-1-j
        table = np.zeros((t.shape[0], 1 << cols), dtype=np.int64)
        for j in range(cols):
            width = 1 << j
            table[:, width : 2 * width] = table[:, :width] ^ col_idx[:, cols - 1 - j, None]
        return table

    def _binary_fast(self) -> bool:
        return self.p == 2 and self.l - self.lam <= 16

    def extract_many(self, v, seeds):
        self._check_range("v", v, self.n_inputs)
        v = np.asarray(v, dtype=np.int64)
        split = self.p**self.lam
        if self._binary_fast():
            table = self._product_table(seeds)
            high = np.broadcast_to(v // split, (table.shape[0],) + v.shape[-1:])
            return np.take_along_axis(table, high, axis=1) ^ (v % split)
        t = self._matrices(seeds)
        high = to_symbols(v // split, self.l - self.lam, self.p)
        low = to_symbols(v % split, self.lam, self.p)
        return from_symbols((_small_matmul(high, t.transpose(0, 2, 1)) + low) % self.p, self.p)

    def invert_many(self, m, seeds, r):
        self._check_range("m", m, self.n_messages)
        self._check_range("r", r, self.n_random)
        m = np.asarray(m, dtype=np.int64)
        r = np.asarray(r, dtype=np.int64)
        if self._binary_fast():
            table = self._product_table(seeds)
            return r * 2**self.lam + (m ^ table[:, r])
        t = self._matrices(seeds)
        r_sym = to_symbols(r, self.l - self.lam, self.p)
        low = (to_symbols(m, self.lam, self.p) - _small_matmul(r_sym, t.transpose(0, 2, 1))) % self.p
        return r * self.p**self.lam + from_symbols(low, self.p)

    def invert(self, m, s, r):
        self._check_range("m", m, self.n_messages)
        self._check_range("r", r, self.n_random)
        t = self.matrix(s)
        m = np.asarray(m, dtype=np.int64)
        r = np.asarray(r, dtype=np.int64)
        r_sym = to_symbols(r, self.l - self.lam, self.p)
        low = (to_symbols(m, self.lam, self.p) - r_sym @ t.T) % self.p
        out = r * self.p**self.lam + from_symbols(low, self.p)
        return int(out) if np.ndim(out) == 0 else out


def make_extractor(family: str, l: int, lam: int, p: int = 2, poly: int = 0) -> InvertibleExtractor:
    if family in ("finite_field", "ff"):
        if p != 2:
            raise ValueError("the finite-field extractor is defined over GF(2^l) only")
        return FiniteFieldExtractor(l, lam, poly)
    if family == "toeplitz":
        return ModifiedToeplitzExtractor(l, lam, p)
    raise ValueError(f"unknown extractor family {family!r}")


def ff_extract(v: int, s: int, l: int, lam: int, poly: int = 0) -> int:
    return int(FiniteFieldExtractor(l, lam, poly).extract(v, s))


def ff_invert(m: int, s: int, r: int, l: int, lam: int, poly: int = 0) -> int:
    return int(FiniteFieldExtractor(l, lam, poly).invert(m, s, r))


def toeplitz_extract(v: int, s: int, l: int, lam: int, p: int = 2) -> int:
    return int(ModifiedToeplitzExtractor(l, lam, p).extract(v, s))


def toeplitz_invert(m: int, s: int, r: int, l: int, lam: int, p: int = 2) -> int:
    return int(ModifiedToeplitzExtractor(l, lam, p).invert(m, s, r))
