"""Linear block codes over Z/p with exhaustive nearest-codeword decoding."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .coremath import PrimeField, from_symbols, to_symbols

__all__ = [
    "LinearCode",
    "encode",
    "decode",
    "rank_mod_p",
    "standard_code",
    "identity_code",
    "repetition_code",
    "hamming_7_4",
    "random_linear_code",
    "load_code",
]

# Nearest-codeword search enumerates every message.
MAX_DECODE_MESSAGES = 1 << 16


def rank_mod_p(matrix, p: int) -> int:
    """Rank of an integer matrix over Z/p by Gaussian elimination."""
    a = np.array(matrix, dtype=np.int64) % p
    rows, cols = a.shape
    rank = 0
    for c in range(cols):
        pivot = next((r for r in range(rank, rows) if a[r, c]), None)
        if pivot is None:
            continue
        a[[rank, pivot]] = a[[pivot, rank]]
        a[rank] = (a[rank] * pow(int(a[rank, c]), p - 2, p)) % p
        for r in range(rows):
            if r != rank and a[r, c]:
                a[r] = (a[r] - a[r, c] * a[rank]) % p
        rank += 1
        if rank == rows:
            break
    return rank


@dataclass(frozen=True, eq=False)
class LinearCode:
    """A ``k x n`` generator matrix of full row rank over Z/p."""

    generator: np.ndarray
    p: int = 2
    name: str = ""
    _codebook: np.ndarray | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        PrimeField(self.p)
        g = np.array(self.generator, dtype=np.int64)
        if g.ndim != 2 or g.size == 0:
            raise ValueError("generator must be a non-empty 2-D matrix")
        if g.min() < 0 or g.max() >= self.p:
            raise ValueError(f"generator entries must lie in [0, {self.p})")
        if rank_mod_p(g, self.p) != g.shape[0]:
            raise ValueError("generator matrix is rank deficient")
        g.setflags(write=False)
        object.__setattr__(self, "generator", g)

    @property
    def k(self) -> int:
        return self.generator.shape[0]

    @property
    def n(self) -> int:
        return self.generator.shape[1]

    @property
    def size(self) -> int:
        return self.p**self.k

    def __eq__(self, other):
        return (
            isinstance(other, LinearCode)
            and self.p == other.p
            and np.array_equal(self.generator, other.generator)
        )

    def __hash__(self):
        return hash((self.p, self.generator.tobytes(), self.generator.shape))

    def encode(self, v) -> np.ndarray:
        """Codeword ``v G`` for message symbols ``v`` (rows broadcast)."""
        v = np.asarray(v, dtype=np.int64)
        if v.shape[-1:] != (self.k,):
            raise ValueError(f"message must have {self.k} symbols, got shape {v.shape}")
        if v.size and (v.min() < 0 or v.max() >= self.p):
            raise ValueError(f"message symbols must lie in [0, {self.p})")
        return (v @ self.generator) % self.p

    def encode_index(self, v):
        """Codeword symbols for message index (or array of indices) ``v``."""
        return self.encode(to_symbols(v, self.k, self.p))

    def codebook(self) -> np.ndarray:
        """All codewords, row ``i`` encoding message index ``i``."""
        if self._codebook is None:
            if self.size > MAX_DECODE_MESSAGES:
                raise ValueError(
                    f"code has {self.size} codewords; exhaustive enumeration is capped at {MAX_DECODE_MESSAGES}"
                )
            book = self.encode_index(np.arange(self.size))
            book.setflags(write=False)
            object.__setattr__(self, "_codebook", book)
        return self._codebook

    def decode(self, y) -> np.ndarray:
        """Nearest-codeword message symbols; ties go to the smallest message.

        ``y`` may be a single word of ``n`` symbols or a batch of rows.
        """
        idx = self.decode_index(y)
        return to_symbols(idx, self.k, self.p)

    def decode_index(self, y, chunk: int = 4096):
        y = np.asarray(y, dtype=np.int64)
        if y.shape[-1:] != (self.n,):
            raise ValueError(f"received word must have {self.n} symbols, got shape {y.shape}")
        book = self.codebook()
        flat = y.reshape(-1, self.n)
        out = np.empty(flat.shape[0], dtype=np.int64)
        for start in range(0, flat.shape[0], chunk):
            block = flat[start : start + chunk]
            dist = (block[:, None, :] != book[None, :, :]).sum(axis=2)
            # message indices enumerate in lexicographic symbol order, so
            # argmin's first-hit rule gives the lexicographic tie-break
            out[start : start + chunk] = dist.argmin(axis=1)
        return int(out[0]) if y.ndim == 1 else out.reshape(y.shape[:-1])

    def to_json(self) -> dict:
        return {"p": self.p, "n": self.n, "k": self.k, "rows": self.generator.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> LinearCode:
        rows = obj["rows"]
        code = cls(np.array(rows, dtype=np.int64), int(obj.get("p", 2)), obj.get("name", ""))
        if int(obj.get("n", code.n)) != code.n or int(obj.get("k", code.k)) != code.k:
            raise ValueError("declared n/k do not match the generator rows")
        return code


def encode(code: LinearCode, v) -> np.ndarray:
    return code.encode(v)


def decode(code: LinearCode, y) -> np.ndarray:
    return code.decode(y)


def identity_code(n: int, p: int = 2) -> LinearCode:
    return LinearCode(np.eye(n, dtype=np.int64), p, f"identity({n})")


def repetition_code(n: int, p: int = 2) -> LinearCode:
    return LinearCode(np.ones((1, n), dtype=np.int64), p, f"repetition({n})")


def hamming_7_4() -> LinearCode:
    # systematic form [I_4 | P]
    g = np.array(
        [
            [1, 0, 0, 0, 1, 1, 0],
            [0, 1, 0, 0, 1, 0, 1],
            [0, 0, 1, 0, 0, 1, 1],
            [0, 0, 0, 1, 1, 1, 1],
        ]
    )
    return LinearCode(g, 2, "hamming_7_4")


def random_linear_code(p: int, n: int, k: int, seed=None) -> LinearCode:
    """Uniform full-rank ``k x n`` generator; rank-deficient draws are redrawn."""
    if not 0 < k <= n:
        raise ValueError(f"need 0 < k <= n, got k={k}, n={n}")
    rng = np.random.default_rng(seed)
    for _ in itertools.count():
        g = rng.integers(0, p, size=(k, n))
        if rank_mod_p(g, p) == k:
            return LinearCode(g, p, f"random_linear(p={p}, n={n}, k={k})")
    raise AssertionError("unreachable")


def standard_code(name: str, **params) -> LinearCode:
    builders = {
        "identity": identity_code,
        "repetition": repetition_code,
        "hamming_7_4": hamming_7_4,
        "random_linear": random_linear_code,
    }
    if name not in builders:
        raise ValueError(f"unknown code {name!r}; choose from {sorted(builders)}")
    try:
        return builders[name](**params)
    except TypeError as exc:
        raise ValueError(f"bad parameters for {name}: {exc}") from None


def load_code(path) -> LinearCode:
    return LinearCode.from_json(json.loads(Path(path).read_text()))


def codeword_indices(code: LinearCode) -> np.ndarray:
    """Codewords as indices into the length-``n`` output space."""
    return from_symbols(code.codebook(), code.p)
