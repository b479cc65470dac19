"""Discrete channels: single uses, memoryless products, wiretap II and
type-constrained arbitrarily varying channels.

Output sequences of a product channel are indexed lexicographically with the
first channel use as the most significant digit, matching
:func:`wiretap.coremath.to_symbols`.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .coremath import ProbVector, stable_sum
from .ecc import LinearCode

__all__ = [
    "TransitionMatrix",
    "bsc",
    "bec",
    "z_channel",
    "noiseless",
    "completely_noisy",
    "q_ary_symmetric",
    "circulant_channel",
    "tensor",
    "mutual_information",
    "product_output_dist",
    "output_table",
    "sample",
    "Symmetry",
    "classify_symmetry",
    "wiretap2_channel",
    "wiretap2_masks",
    "AvcSpec",
    "StateSequence",
    "avc_channels",
    "state_orderings",
    "restricted_symmetry_check",
    "MAX_OUTCOMES",
]

MAX_OUTCOMES = 1 << 20
ROW_TOL = 1e-9
SYM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """Row ``x`` holds the output distribution W(.|x)."""

    entries: np.ndarray
    name: str = ""

    def __post_init__(self):
        w = np.array(self.entries, dtype=float)
        if w.ndim != 2 or w.size == 0:
            raise ValueError("transition matrix must be a non-empty 2-D array")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("transition probabilities must be finite and non-negative")
        sums = w.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > ROW_TOL):
            raise ValueError(f"rows must sum to 1, got {sums.tolist()}")
        w.setflags(write=False)
        object.__setattr__(self, "entries", w)

    @property
    def n_inputs(self) -> int:
        return self.entries.shape[0]

    @property
    def n_outputs(self) -> int:
        return self.entries.shape[1]

    def __eq__(self, other):
        return isinstance(other, TransitionMatrix) and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash(self.entries.tobytes())

    def __repr__(self):
        return self.name or f"TransitionMatrix({self.entries.tolist()})"

    def to_json(self) -> dict:
        return {"inputs": self.n_inputs, "outputs": self.n_outputs, "rows": self.entries.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> TransitionMatrix:
        w = cls(np.array(obj["rows"], dtype=float), obj.get("name", ""))
        if int(obj.get("inputs", w.n_inputs)) != w.n_inputs or int(obj.get("outputs", w.n_outputs)) != w.n_outputs:
            raise ValueError("declared inputs/outputs do not match the rows")
        return w

    @classmethod
    def load(cls, path) -> TransitionMatrix:
        return cls.from_json(json.loads(Path(path).read_text()))


def _check_prob(p, name="p"):
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {p}")


def bsc(p: float) -> TransitionMatrix:
    _check_prob(p)
    return TransitionMatrix([[1 - p, p], [p, 1 - p]], f"BSC({p})")


def bec(e: float) -> TransitionMatrix:
    """Binary erasure channel; output 2 is the erasure symbol."""
    _check_prob(e, "e")
    return TransitionMatrix([[1 - e, 0.0, e], [0.0, 1 - e, e]], f"BEC({e})")


def z_channel(p: float) -> TransitionMatrix:
    """Input 0 is received perfectly; input 1 flips to 0 with probability ``p``."""
    _check_prob(p)
    return TransitionMatrix([[1.0, 0.0], [p, 1 - p]], f"Z({p})")


def noiseless(q: int = 2) -> TransitionMatrix:
    return TransitionMatrix(np.eye(q), f"noiseless({q})")


def completely_noisy(q: int = 2, outputs: int | None = None) -> TransitionMatrix:
    outputs = q if outputs is None else outputs
    return TransitionMatrix(np.full((q, outputs), 1.0 / outputs), f"noisy({q})")


def q_ary_symmetric(q: int, p: float) -> TransitionMatrix:
    """Correct with probability ``1 - p``, otherwise uniform over the other symbols."""
    _check_prob(p)
    w = np.full((q, q), p / (q - 1))
    np.fill_diagonal(w, 1 - p)
    return TransitionMatrix(w, f"QSC({q}, {p})")


def circulant_channel(row) -> TransitionMatrix:
    """Strongly symmetric channel whose row ``x`` is ``row`` rotated by ``x``."""
    row = np.asarray(row, dtype=float)
    return TransitionMatrix(np.stack([np.roll(row, x) for x in range(row.size)]))


def tensor(a: TransitionMatrix, b: TransitionMatrix) -> TransitionMatrix:
    """Two independent uses; input ``(x1, x2)`` has index ``x1 * |X2| + x2``."""
    return TransitionMatrix(np.kron(a.entries, b.entries), f"{a!r}x{b!r}")


def mutual_information(w: TransitionMatrix, px=None) -> float:
    """I(X;Z) in bits; uniform input when ``px`` is omitted."""
    px = np.full(w.n_inputs, 1.0 / w.n_inputs) if px is None else np.asarray(px, dtype=float)
    joint = px[:, None] * w.entries
    pz = joint.sum(axis=0)
    mask = joint > 0
    ratio = w.entries[mask] / np.broadcast_to(pz, joint.shape)[mask]
    return stable_sum(joint[mask] * np.log2(ratio))


def _space_size(per_use: Sequence[TransitionMatrix]) -> int:
    return math.prod(w.n_outputs for w in per_use)


def output_table(per_use: Sequence[TransitionMatrix], inputs) -> np.ndarray:
    """Rows P(z^(n) | x^(n)) for every input word in ``inputs`` (shape ``N x n``)."""
    x = np.atleast_2d(np.asarray(inputs, dtype=np.int64))
    if x.shape[1] != len(per_use):
        raise ValueError(f"inputs have {x.shape[1]} symbols but there are {len(per_use)} channel uses")
    size = _space_size(per_use)
    if size > MAX_OUTCOMES:
        raise ValueError(f"{size} output sequences exceed the enumeration cap of {MAX_OUTCOMES}")
    table = np.ones((x.shape[0], 1))
    for i, w in enumerate(per_use):
        if x[:, i].min() < 0 or x[:, i].max() >= w.n_inputs:
            raise ValueError(f"input symbol at position {i} outside the channel alphabet")
        rows = w.entries[x[:, i]]
        table = (table[:, :, None] * rows[:, None, :]).reshape(x.shape[0], -1)
    return table


def product_output_dist(per_use: Sequence[TransitionMatrix], x) -> ProbVector:
    return ProbVector(output_table(per_use, [x])[0])


def sample(per_use: Sequence[TransitionMatrix], x, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Draw channel outputs for input word ``x``.

    With ``size`` given, ``x`` may also be a batch of ``size`` words.
    """
    x = np.asarray(x, dtype=np.int64)
    shape = (len(per_use),) if size is None else (size, len(per_use))
    x = np.broadcast_to(x, shape)
    u = rng.random(shape)
    out = np.empty(shape, dtype=np.int64)
    for i, w in enumerate(per_use):
        cum = np.cumsum(w.entries, axis=1)
        cum[:, -1] = 1.0
        cols = cum[x[..., i]]
        out[..., i] = (u[..., i, None] >= cols).sum(axis=-1)
    return out


class Symmetry(NamedTuple):
    kind: str
    partition: tuple[tuple[int, ...], ...] | None


def _rows_permuted(block: np.ndarray) -> bool:
    s = np.sort(block, axis=1)
    return bool(np.all(np.abs(s - s[0]) <= SYM_TOL))


def _strongly_symmetric(block: np.ndarray) -> bool:
    return _rows_permuted(block) and _rows_permuted(block.T)


def classify_symmetry(w: TransitionMatrix) -> Symmetry:
    """Strongly symmetric / symmetric / asymmetric, with the output partition.

    Any strongly symmetric block has columns that are permutations of each
    other, and a union of such blocks with equal column profiles is again
    strongly symmetric, so grouping outputs by sorted column decides the
    question exactly.
    """
    e = w.entries
    if _strongly_symmetric(e):
        return Symmetry("strongly_symmetric", (tuple(range(w.n_outputs)),))
    groups: list[list[int]] = []
    profiles: list[np.ndarray] = []
    for z in range(w.n_outputs):
        col = np.sort(e[:, z])
        for g, prof in zip(groups, profiles):
            if np.all(np.abs(prof - col) <= SYM_TOL):
                g.append(z)
                break
        else:
            groups.append([z])
            profiles.append(col)
    if all(_rows_permuted(e[:, g]) for g in groups):
        return Symmetry("symmetric", tuple(tuple(g) for g in groups))
    return Symmetry("asymmetric", None)


def is_symmetric(w: TransitionMatrix) -> bool:
    return classify_symmetry(w).kind != "asymmetric"


def wiretap2_channel(n: int, w: Sequence[int], q: int | None = None) -> list[TransitionMatrix]:
    """Noiseless binary uses where ``w_i = 1``, uniform-output uses elsewhere."""
    w = [int(b) for b in w]
    if len(w) != n or any(b not in (0, 1) for b in w):
        raise ValueError(f"mask must be {n} bits")
    if q is not None and sum(w) != q:
        raise ValueError(f"mask has weight {sum(w)}, expected {q}")
    clear, noisy = noiseless(2), completely_noisy(2)
    return [clear if b else noisy for b in w]


def wiretap2_masks(n: int, q: int):
    """Every selection of ``q`` observed positions, as bit tuples."""
    for pos in itertools.combinations(range(n), q):
        yield tuple(1 if i in pos else 0 for i in range(n))


@dataclass(frozen=True, eq=False)
class AvcSpec:
    """Per-use channel chosen by a state whose frequencies are fixed."""

    states: tuple[TransitionMatrix, ...]
    frequencies: tuple[float, ...]

    def __post_init__(self):
        states = tuple(self.states)
        freqs = tuple(float(f) for f in self.frequencies)
        if not states or len(states) != len(freqs):
            raise ValueError("need one frequency per state")
        if any(f < 0 for f in freqs) or abs(math.fsum(freqs) - 1.0) > 1e-9:
            raise ValueError("frequencies must be non-negative and sum to 1")
        shape = (states[0].n_inputs, states[0].n_outputs)
        if any((s.n_inputs, s.n_outputs) != shape for s in states):
            raise ValueError("all states must share input and output alphabets")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "frequencies", freqs)

    def counts(self, n: int) -> tuple[int, ...]:
        """Occurrences of each state in a length-``n`` sequence."""
        counts = []
        for f in self.frequencies:
            c = f * n
            if abs(c - round(c)) > 1e-9:
                raise ValueError(f"frequency {f} times n={n} is not an integer")
            counts.append(int(round(c)))
        return tuple(counts)

    def to_json(self) -> dict:
        return {"states": [s.to_json() for s in self.states], "frequencies": list(self.frequencies)}

    @classmethod
    def from_json(cls, obj: dict) -> AvcSpec:
        freqs = obj["frequencies"]
        if isinstance(freqs, dict):
            freqs = [freqs[str(i)] if str(i) in freqs else freqs[i] for i in range(len(obj["states"]))]
        return cls(
            tuple(TransitionMatrix.from_json(s) for s in obj["states"]),
            tuple(float(Fraction(str(f))) for f in freqs),
        )


@dataclass(frozen=True)
class StateSequence:
    seq: tuple[int, ...]

    def validate(self, spec: AvcSpec) -> None:
        counts = spec.counts(len(self.seq))
        if any(not 0 <= q < len(spec.states) for q in self.seq):
            raise ValueError("state id out of range")
        observed = tuple(self.seq.count(q) for q in range(len(spec.states)))
        if observed != counts:
            raise ValueError(f"state counts {observed} violate the type constraint {counts}")


def avc_channels(spec: AvcSpec, seq) -> list[TransitionMatrix]:
    seq = seq if isinstance(seq, StateSequence) else StateSequence(tuple(int(q) for q in seq))
    seq.validate(spec)
    return [spec.states[q] for q in seq.seq]


def state_orderings(spec: AvcSpec, n: int):
    """All distinct state sequences of the required type, lexicographically."""
    counts = list(spec.counts(n))

    def rec(prefix):
        if len(prefix) == n:
            yield StateSequence(tuple(prefix))
            return
        for q, c in enumerate(counts):
            if c:
                counts[q] -= 1
                prefix.append(q)
                yield from rec(prefix)
                prefix.pop()
                counts[q] += 1

    yield from rec([])


def restricted_symmetry_check(
    per_use: Sequence[TransitionMatrix], inputs: LinearCode | np.ndarray, tol: float = 1e-9
) -> bool:
    """True iff every allowed input word yields the same sorted output vector.

    ``inputs`` is a linear code (its codewords are used) or an explicit array
    of input words.
    """
    if isinstance(inputs, LinearCode):
        if any(w.n_inputs != inputs.p for w in per_use):
            raise ValueError("code alphabet does not match the channel input alphabet")
        words = inputs.codebook()
    else:
        words = np.atleast_2d(np.asarray(inputs, dtype=np.int64))
    table = output_table(per_use, words)
    profiles = -np.sort(-table, axis=1)
    return bool(np.all(np.abs(profiles - profiles[0]) <= tol))
