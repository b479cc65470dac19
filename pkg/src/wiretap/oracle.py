"""Exhaustive ground truth: guessing probabilities, smoothing by cutting,
distances from uniform and structural checks of extractors and channels.

Everything here enumerates the full outcome space, so it is only meant for
small instances and for validating the closed-form bounds.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

import numpy as np

from .channels import TransitionMatrix, output_table
from .coremath import ProbVector, stable_sum
from .ecc import LinearCode
from .extractors import InvertibleExtractor

__all__ = [
    "VerificationError",
    "JointDist",
    "exact_pguess",
    "min_entropy",
    "cut_distribution",
    "exact_smooth_guess_bound",
    "exact_dU",
    "distance_from_uniform",
    "distinguishing_advantage",
    "hashed_joint",
    "find_inverter_violation",
    "verify_inverter_uniformity",
    "verify_two_universality",
    "verify_equidistance",
]

ABS_TOL = 1e-9
MAX_INVERTER_INPUTS = 1 << 12
MAX_UNIVERSALITY_INPUTS = 1 << 8


class VerificationError(AssertionError):
    """An exhaustive check found a counterexample (kept in ``witness``)."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class JointDist:
    """Probability table whose axis 0 is the variable of interest.

    The remaining axes together form the conditioning side (``z``, or
    ``(z, s)``) and are flattened by the oracle functions.
    """

    def __init__(self, table, tol: float = ABS_TOL):
        t = np.array(table, dtype=float)
        if t.ndim < 2:
            raise ValueError("joint table needs at least two axes")
        if np.any(t < 0):
            raise ValueError("probabilities must be non-negative")
        total = stable_sum(t)
        if abs(total - 1.0) > tol:
            raise ValueError(f"joint table sums to {total!r}, not 1")
        t.setflags(write=False)
        self.table = t

    @property
    def shape(self):
        return self.table.shape

    def flat(self) -> np.ndarray:
        return self.table.reshape(self.table.shape[0], -1)


def _flat(j) -> np.ndarray:
    if isinstance(j, JointDist):
        return j.flat()
    t = np.asarray(j, dtype=float)
    return t.reshape(t.shape[0], -1)


def exact_pguess(j) -> float:
    """Sum over conditions of the largest joint probability."""
    return stable_sum(_flat(j).max(axis=0))


def min_entropy(j) -> float:
    return -math.log2(exact_pguess(j))


def _as_array(d) -> np.ndarray:
    return d.probs if isinstance(d, ProbVector) else np.asarray(d, dtype=float)


def cut_distribution(d, cap: float) -> tuple[ProbVector, float]:
    """Lower every probability above ``cap`` to ``cap`` and pour the excess
    into the next-largest outcomes, filling each up to ``cap``.

    Returns the smoothed distribution (same outcome labels as ``d``) and its
    variational distance from ``d``, which equals the removed excess.
    """
    p = _as_array(d)
    size = p.size
    if cap * size < 1.0 - ABS_TOL:
        raise ValueError(f"cap {cap} is below the uniform level 1/{size}")
    order = np.argsort(-p, kind="stable")
    s = p[order]
    above = s > cap
    if not above.any():
        return (d if isinstance(d, ProbVector) else ProbVector(p)), 0.0
    k1 = int(np.flatnonzero(above)[-1])
    excess = math.fsum((s[: k1 + 1] - cap).tolist())
    room = np.cumsum(cap - s[k1 + 1 :])
    hit = np.flatnonzero(room >= excess)
    if hit.size:
        k2 = k1 + 1 + int(hit[0])
        eta = float(room[hit[0]] - excess)
    else:
        # cap equal to the uniform level up to rounding
        k2 = size - 1
        eta = max(float(room[-1] - excess), 0.0) if room.size else 0.0
    q = s.copy()
    q[:k2] = cap
    q[k2] = cap - eta
    out = np.empty_like(p)
    out[order] = q
    return ProbVector(out), excess


def exact_smooth_guess_bound(sorted_cond, V_size: int, Z_size: int, n: int, cap: float | None = None):
    """Top-``ceil(|Z|^n/|V|)`` mass of the cut conditional distribution.

    Returns ``(guess_bound, eps)``; with ``cap=None`` nothing is cut and
    ``eps`` is 0.
    """
    s = np.sort(_as_array(sorted_cond))[::-1]
    top = -(-(Z_size**n) // V_size)
    if s.size < top:
        raise ValueError(f"distribution has {s.size} entries, fewer than the cutoff {top}")
    eps = 0.0
    if cap is not None and math.isfinite(cap):
        smoothed, eps = cut_distribution(s, cap)
        s = smoothed.sorted_view
    return stable_sum(s[:top]), eps


def exact_dU(j) -> float:
    """Expected distance of axis-0 variable from uniform given the rest."""
    t = _flat(j)
    cond = t.sum(axis=0)
    return 0.5 * stable_sum(np.abs(t - cond / t.shape[0]))


def distance_from_uniform(d) -> float:
    p = _as_array(d)
    return 0.5 * stable_sum(np.abs(p - 1.0 / p.size))


def distinguishing_advantage(d0, d1) -> float:
    a, b = _as_array(d0), _as_array(d1)
    if a.shape != b.shape:
        raise ValueError("distributions live on different outcome spaces")
    return 0.5 * stable_sum(np.abs(a - b))


def hashed_joint(ext: InvertibleExtractor, pvz) -> np.ndarray:
    """Table P(m, z, s) of (Ext(V, S), Z, S) for a uniform independent seed."""
    pvz = np.asarray(pvz, dtype=float)
    if pvz.shape[0] != ext.n_inputs:
        raise ValueError("first axis of the joint table must enumerate extractor inputs")
    pvz = pvz.reshape(pvz.shape[0], -1)
    seeds = ext.seeds()
    v = np.arange(ext.n_inputs)
    out = np.zeros((ext.n_messages, pvz.shape[1], seeds.size))
    for i, s in enumerate(seeds):
        m = np.asarray(ext.extract(v, int(s)))
        np.add.at(out[:, :, i], m, pvz)
    return out / seeds.size


def find_inverter_violation(ext: InvertibleExtractor):
    """First ``(m, s)`` whose inverter outputs are not exactly the preimages.

    Returns ``None`` when, for every seed and message, the inverter hits
    every preimage of the message exactly once as ``r`` ranges over all
    values.
    """
    if ext.n_inputs > MAX_INVERTER_INPUTS:
        raise ValueError(f"exhaustive inverter check is limited to {MAX_INVERTER_INPUTS} inputs")
    msgs = np.repeat(np.arange(ext.n_messages), ext.n_random)
    rand = np.tile(np.arange(ext.n_random), ext.n_messages)
    every_v = np.arange(ext.n_inputs)
    seeds = ext.seeds()
    chunk = max(1, (1 << 22) // (ext.n_inputs * ext.l))
    for start in range(0, seeds.size, chunk):
        block = seeds[start : start + chunk]
        v = np.asarray(ext.invert_many(msgs, block, rand))
        back = np.asarray(ext.extract_many(v, block))
        bad_s, bad_i = np.nonzero(back != msgs)
        if bad_s.size:
            return int(msgs[bad_i[0]]), int(block[bad_s[0]])
        hits = np.asarray(ext.extract_many(every_v, block))
        offset = np.arange(block.size)[:, None] * ext.n_messages
        counts = np.bincount((hits + offset).ravel(), minlength=block.size * ext.n_messages)
        bad = np.flatnonzero(counts != ext.n_random)
        if bad.size:
            return int(bad[0] % ext.n_messages), int(block[bad[0] // ext.n_messages])
        groups = np.sort(v.reshape(block.size, ext.n_messages, ext.n_random), axis=2)
        bad_s, bad_m = np.nonzero((np.diff(groups, axis=2) == 0).any(axis=2))
        if bad_s.size:
            return int(bad_m[0]), int(block[bad_s[0]])
    return None


def verify_inverter_uniformity(ext: InvertibleExtractor) -> bool:
    return find_inverter_violation(ext) is None


def verify_two_universality(ext: InvertibleExtractor) -> Fraction:
    """Largest fraction of seeds on which two distinct inputs collide."""
    if ext.n_inputs > MAX_UNIVERSALITY_INPUTS:
        raise ValueError(f"exhaustive universality check is limited to {MAX_UNIVERSALITY_INPUTS} inputs")
    v = np.arange(ext.n_inputs)
    collisions = np.zeros((v.size, v.size), dtype=np.int64)
    seeds = ext.seeds()
    for s in seeds:
        e = np.asarray(ext.extract(v, int(s)))
        collisions += e[:, None] == e[None, :]
    np.fill_diagonal(collisions, 0)
    return Fraction(int(collisions.max()), int(seeds.size))


def verify_equidistance(per_use: Sequence[TransitionMatrix], code: LinearCode, tol: float = ABS_TOL):
    """Distance of each codeword's output from the uniform-input output.

    Returns ``(delta, max_pairwise)``.  Raises :class:`VerificationError`
    when the per-codeword distances differ or a pair exceeds ``2 * delta``.
    """
    table = output_table(per_use, code.codebook())
    mixed = table.mean(axis=0)
    dist = 0.5 * np.abs(table - mixed).sum(axis=1)
    delta = float(dist[0])
    spread = float(np.abs(dist - delta).max())
    if spread > tol:
        i = int(np.abs(dist - delta).argmax())
        raise VerificationError(f"codeword {i} is at distance {dist[i]} != {delta}", witness=i)
    worst = 0.0
    for i in range(table.shape[0] - 1):
        d = 0.5 * np.abs(table[i + 1 :] - table[i]).sum(axis=1)
        worst = max(worst, float(d.max()))
    if worst > 2 * delta + tol:
        raise VerificationError(f"pairwise distance {worst} exceeds 2*delta = {2 * delta}")
    return delta, worst
