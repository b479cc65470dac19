"""Seeded and unseeded wiretap schemes built from an extractor inverter and a
linear code, with Monte Carlo correctness and exact secrecy evaluation.

Sender: ``x = ECC(INV(m, s, r))``.  Receiver: ``m' = EXT(DEC(y), s)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from . import oracle
from .bounds import unseeded_compose
from .channels import (
    AvcSpec,
    TransitionMatrix,
    bec,
    bsc,
    completely_noisy,
    noiseless,
    output_table,
    q_ary_symmetric,
    sample,
    state_orderings,
    wiretap2_channel,
    wiretap2_masks,
    z_channel,
)
from .coremath import to_symbols
from .ecc import LinearCode, load_code, standard_code
from .extractors import InvertibleExtractor, make_extractor

__all__ = [
    "Memoryless",
    "WiretapII",
    "TypeConstrainedAvc",
    "SchemeConfig",
    "send",
    "receive",
    "TrialReport",
    "run_seeded_trials",
    "exact_decoding_error",
    "UnseededReport",
    "run_unseeded",
    "SecrecyReport",
    "exact_secrecy",
    "identity_code_secrecy",
    "MAX_SECRECY_ENTRIES",
    "scheme_from_json",
    "load_scheme",
]

MAX_SECRECY_ENTRIES = 1 << 24
_CHUNK_ENTRIES = 1 << 24


class Memoryless:
    """A fixed (possibly non-identical) memoryless eavesdropper channel."""

    def __init__(self, per_use: Sequence[TransitionMatrix]):
        self.per_use = list(per_use)
        self.n = len(self.per_use)

    def strategies(self) -> Iterator[tuple[object, list[TransitionMatrix]]]:
        yield "fixed", self.per_use


class WiretapII:
    """The eavesdropper observes any ``q`` of the ``n`` transmitted bits."""

    def __init__(self, n: int, q: int):
        if not 0 <= q <= n:
            raise ValueError(f"need 0 <= q <= n, got q={q}, n={n}")
        self.n, self.q = n, q

    def strategies(self):
        for mask in wiretap2_masks(self.n, self.q):
            yield mask, wiretap2_channel(self.n, mask, self.q)


class TypeConstrainedAvc:
    """The eavesdropper orders a state sequence of fixed type."""

    def __init__(self, spec: AvcSpec, n: int):
        spec.counts(n)
        self.spec, self.n = spec, n

    def strategies(self):
        for seq in state_orderings(self.spec, self.n):
            yield seq.seq, [self.spec.states[q] for q in seq.seq]


@dataclass
class SchemeConfig:
    extractor: InvertibleExtractor
    code: LinearCode
    receiver: list[TransitionMatrix]
    adversary: Memoryless | WiretapII | TypeConstrainedAvc | None = None
    t: int = 1
    seed_code: LinearCode | None = None

    def __post_init__(self):
        ext, code = self.extractor, self.code
        if ext.l != code.k or ext.p != code.p:
            raise ValueError(
                f"extractor works on {ext.l} symbols over Z/{ext.p} but the code encodes {code.k} over Z/{code.p}"
            )
        self.receiver = list(self.receiver)
        if len(self.receiver) != code.n:
            raise ValueError(f"receiver channel has {len(self.receiver)} uses, code length is {code.n}")
        if any(w.n_inputs != code.p for w in self.receiver):
            raise ValueError("receiver channel inputs do not match the code alphabet")
        if self.adversary is not None and self.adversary.n != code.n:
            raise ValueError("adversary channel length does not match the code length")
        if self.t < 1:
            raise ValueError("t must be at least 1")
        if self.seed_code is None:
            self.seed_code = _default_seed_code(ext, code)
        elif self.seed_code.k != ext.params.seed_len:
            raise ValueError("seed code dimension must equal the seed length")

    @property
    def rate(self) -> float:
        return self.extractor.lam / self.code.n


def _default_seed_code(ext: InvertibleExtractor, code: LinearCode) -> LinearCode | None:
    # same generator, keeping as many rows as the seed has symbols
    length = ext.params.seed_len
    if length == 0:
        return None
    return LinearCode(code.generator[-length:], code.p, f"{code.name or 'code'}[seed]")


def send(cfg: SchemeConfig, m: int, s: int, rng: np.random.Generator):
    """Encode message index ``m`` under seed ``s``; returns ``(x, v)``."""
    ext = cfg.extractor
    r = int(rng.integers(ext.n_random))
    v = int(ext.invert(m, s, r))
    return cfg.code.encode_index(v), v


def receive(cfg: SchemeConfig, y, s: int) -> int:
    return int(cfg.extractor.extract(cfg.code.decode_index(y), s))


@dataclass
class TrialReport:
    trials: int
    seed: int
    block_error_rate: float
    message_error_rate: float
    block_error_stderr: float
    per_message_error: np.ndarray = field(repr=False)

    @property
    def mt_error_estimate(self) -> float:
        """Worst observed per-message error rate."""
        return float(np.nanmax(self.per_message_error))

    def to_json(self) -> dict:
        return {
            "trials": self.trials,
            "extractor_seed": self.seed,
            "rm_block_error": self.block_error_rate,
            "rm_message_error": self.message_error_rate,
            "block_error_stderr": self.block_error_stderr,
            "mt_message_error": self.mt_error_estimate,
        }


def run_seeded_trials(
    cfg: SchemeConfig, trials: int, rng: np.random.Generator, seed: int | None = None
) -> TrialReport:
    """Uniform messages sent through the receiver channel ``trials`` times.

    One public seed serves the whole run.  Block errors count ``DEC(y) != v``;
    message errors count ``m' != m``.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    ext, code = cfg.extractor, cfg.code
    s = ext.sample_seed(rng) if seed is None else int(seed)
    m = rng.integers(ext.n_messages, size=trials)
    r = rng.integers(ext.n_random, size=trials)
    v = np.asarray(ext.invert(m, s, r))
    x = code.encode_index(v)
    y = sample(cfg.receiver, x, rng, size=trials)
    v_hat = np.asarray(code.decode_index(y))
    m_hat = np.asarray(ext.extract(v_hat, s))
    block = v_hat != v
    wrong = m_hat != m
    sent = np.bincount(m, minlength=ext.n_messages)
    failed = np.bincount(m, weights=wrong, minlength=ext.n_messages)
    with np.errstate(invalid="ignore", divide="ignore"):
        per_message = np.where(sent > 0, failed / np.maximum(sent, 1), np.nan)
    rate = float(block.mean())
    return TrialReport(
        trials=trials,
        seed=s,
        block_error_rate=rate,
        message_error_rate=float(wrong.mean()),
        block_error_stderr=math.sqrt(rate * (1 - rate) / trials),
        per_message_error=per_message,
    )


def exact_decoding_error(code: LinearCode, per_use: Sequence[TransitionMatrix]) -> tuple[float, float]:
    """``(average, worst)`` over messages of Pr[DEC(ChR(ECC(v))) != v].

    Enumerates every received word, so ``|Y|^n`` must be small.
    """
    table = output_table(per_use, code.codebook())
    outputs = per_use[0].n_outputs
    if any(w.n_outputs != outputs for w in per_use) or outputs != code.p:
        raise ValueError("exact decoding error needs output alphabet equal to the code alphabet")
    words = to_symbols(np.arange(table.shape[1]), code.n, code.p)
    decoded = np.asarray(code.decode_index(words))
    hit = decoded[None, :] == np.arange(code.size)[:, None]
    fail = 1.0 - (table * hit).sum(axis=1)
    return float(fail.mean()), float(fail.max())


@dataclass
class UnseededReport:
    seed: int
    seed_received: int | None
    sent: list[int]
    recovered: list[int | None]
    failed: list[bool]
    transcript: list[dict]
    eps_rm: float | None = None
    eps_cor: float | None = None

    @property
    def seed_ok(self) -> bool:
        return self.seed_received == self.seed


def run_unseeded(
    cfg: SchemeConfig,
    messages: Sequence[int],
    rng: np.random.Generator,
    *,
    seed_error=None,
    eps_rm: float | None = None,
    eps_cor: float | None = None,
    seed_err: float = 0.0,
) -> UnseededReport:
    """One seed, ``len(messages)`` seeded rounds, then the seed itself.

    The seed travels last so the channel cannot depend on it.  ``seed_error``
    is an optional error pattern added (mod p) to the transmitted seed
    codeword on top of the channel noise.  When ``eps_rm``/``eps_cor`` (per
    seeded round) are given, the report carries the composed guarantees.
    """
    ext, code = cfg.extractor, cfg.code
    t = len(messages)
    s = ext.sample_seed(rng)
    transcript = []
    for m in messages:
        x, v = send(cfg, int(m), s, rng)
        y = sample(cfg.receiver, x, rng)
        transcript.append({"m": int(m), "v": v, "x": x.tolist(), "y": y.tolist()})

    if cfg.seed_code is None:
        s_hat = s
    else:
        sc = cfg.seed_code
        a = sc.encode(to_symbols(s, sc.k, sc.p))
        a_recv = sample(cfg.receiver, a, rng) if len(cfg.receiver) == sc.n else a.copy()
        if seed_error is not None:
            a_recv = (a_recv + np.asarray(seed_error, dtype=np.int64)) % sc.p
        s_hat = int(sc.decode_index(a_recv))

    valid = s_hat in set(ext.seeds().tolist())
    recovered, failed = [], []
    for rec in transcript:
        m_hat = receive(cfg, np.asarray(rec["y"]), s_hat) if valid else None
        rec["m_recovered"] = m_hat
        recovered.append(m_hat)
        failed.append(s_hat != s or m_hat != rec["m"])

    report = UnseededReport(s, s_hat, [int(m) for m in messages], recovered, failed, transcript)
    if eps_rm is not None:
        report.eps_rm, report.eps_cor = unseeded_compose(eps_rm, eps_cor or 0.0, t, seed_err)[:2]
    return report


@dataclass
class SecrecyReport:
    rm: float
    mt: float
    per_strategy: list[tuple[object, float, float]] = field(repr=False)

    @property
    def worst_rm_strategy(self):
        return max(self.per_strategy, key=lambda e: e[1])[0]

    def to_json(self) -> dict:
        return {
            "epsilon_sec_rm": self.rm,
            "epsilon_sec_mt": self.mt,
            "strategies": len(self.per_strategy),
        }


def _conditional_outputs(ext: InvertibleExtractor, pzv: np.ndarray, seeds: np.ndarray) -> np.ndarray:
    """P(z | m, s) as an array of shape ``(S, M, Z)``.

    Averages the codeword output rows over the inverter's randomness.  Seeds
    are stacked into one dense averaging matrix per chunk so the work is a
    single matrix product rather than many memory-bound gathers.
    """
    msgs = np.repeat(np.arange(ext.n_messages), ext.n_random)
    rand = np.tile(np.arange(ext.n_random), ext.n_messages)
    n_v = pzv.shape[0]
    out = np.empty((seeds.size, ext.n_messages, pzv.shape[1]))
    rows = ext.n_messages
    chunk = max(1, min(seeds.size, _CHUNK_ENTRIES // (rows * n_v)))
    for start in range(0, seeds.size, chunk):
        block = seeds[start : start + chunk]
        if ext.n_random == 1:
            for i, s in enumerate(block):
                out[start + i] = pzv[np.asarray(ext.invert(msgs, int(s), rand))]
            continue
        mix = np.zeros((block.size * rows, n_v))
        for i, s in enumerate(block):
            v = np.asarray(ext.invert(msgs, int(s), rand))
            mix[i * rows + msgs, v] = 1.0 / ext.n_random
        out[start : start + block.size] = (mix @ pzv).reshape(block.size, rows, -1)
    return out


def _max_pairwise_distance(cond: np.ndarray) -> float:
    """max over message pairs of d(P(z, s | m), P(z, s | m')); ``cond`` is (S, M, Z)."""
    s_count, m_count = cond.shape[:2]
    per_m = np.ascontiguousarray(cond.transpose(1, 0, 2)).reshape(m_count, -1) / s_count
    worst = 0.0
    for a in range(m_count - 1):
        d = 0.5 * np.abs(per_m[a + 1 :] - per_m[a]).sum(axis=1)
        worst = max(worst, float(d.max()))
    return worst


def exact_secrecy(cfg: SchemeConfig, adversary=None, *, pairwise: bool = True) -> SecrecyReport:
    """Exact rm- and mt-secrecy, maximised over the adversary's strategies.

    rm-secrecy is ``d_U(M | Z, S)`` for uniform messages; mt-secrecy is the
    largest distance between ``(Z(m), S)`` and ``(Z(m'), S)`` over message
    pairs.  ``pairwise=False`` skips the quadratic mt pass (mt is then NaN).
    """
    adversary = adversary or cfg.adversary
    if adversary is None:
        raise ValueError("no adversary channel configured")
    ext, code = cfg.extractor, cfg.code
    seeds = ext.seeds()
    book = code.codebook()
    results = []
    for label, per_use in adversary.strategies():
        z_space = math.prod(w.n_outputs for w in per_use)
        entries = ext.n_messages * seeds.size * z_space
        if entries > MAX_SECRECY_ENTRIES:
            raise ValueError(f"joint table of {entries} entries exceeds the desk-scale cap {MAX_SECRECY_ENTRIES}")
        pzv = output_table(per_use, book)
        cond = _conditional_outputs(ext, pzv, seeds)  # (S, M, Z)
        joint = np.transpose(cond, (1, 2, 0)) / (ext.n_messages * seeds.size)
        rm = oracle.exact_dU(joint)
        mt = _max_pairwise_distance(cond) if pairwise else math.nan
        results.append((label, rm, mt))
    return SecrecyReport(
        rm=max(r[1] for r in results),
        mt=max(r[2] for r in results) if pairwise else math.nan,
        per_strategy=results,
    )


def identity_code_secrecy(ext: InvertibleExtractor, per_use: Sequence[TransitionMatrix]) -> float:
    """Exact rm-secrecy of the identity code against additive per-use noise.

    When ``z = v + e`` with noise ``e`` independent of ``v`` and the
    extractor is linear, ``P(m | z, s)`` depends on ``z`` only through a
    shift, so ``d_U(M | Z, S)`` equals the seed average of the distance of
    ``Ext(e, s)`` from uniform.  That needs ``|Z|^n`` work per seed instead
    of a full joint table, which reaches instances beyond
    ``MAX_SECRECY_ENTRIES``.
    """
    if len(per_use) != ext.l:
        raise ValueError(f"need {ext.l} channel uses, got {len(per_use)}")
    for w in per_use:
        e = w.entries
        if e.shape != (ext.p, ext.p) or any(not np.allclose(np.roll(e[0], x), e[x], atol=1e-12) for x in range(ext.p)):
            raise ValueError("every channel use must add noise mod p independently of the input")
    noise = output_table(per_use, np.zeros((1, ext.l), dtype=np.int64))[0]
    words = np.arange(ext.n_inputs)
    seeds = ext.seeds()
    total = []
    chunk = max(1, (1 << 22) // ext.n_inputs)
    for start in range(0, seeds.size, chunk):
        block = seeds[start : start + chunk]
        m = np.asarray(ext.extract_many(words, block)) + np.arange(block.size)[:, None] * ext.n_messages
        dist = np.bincount(m.ravel(), weights=np.broadcast_to(noise, m.shape).ravel(), minlength=block.size * ext.n_messages)
        dist = dist.reshape(block.size, ext.n_messages)
        total.extend((0.5 * np.abs(dist - 1.0 / ext.n_messages).sum(axis=1)).tolist())
    return math.fsum(total) / seeds.size


# configuration files


def _channel_from(obj, base: Path) -> TransitionMatrix:
    if isinstance(obj, str):
        return TransitionMatrix.load(base / obj)
    if "file" in obj:
        return TransitionMatrix.load(base / obj["file"])
    if "rows" in obj:
        return TransitionMatrix.from_json(obj)
    kind = obj.get("kind")
    makers = {
        "bsc": lambda: bsc(float(obj["p"])),
        "bec": lambda: bec(float(obj["e"])),
        "z": lambda: z_channel(float(obj["p"])),
        "noiseless": lambda: noiseless(int(obj.get("q", 2))),
        "noisy": lambda: completely_noisy(int(obj.get("q", 2)), obj.get("outputs")),
        "q_ary_symmetric": lambda: q_ary_symmetric(int(obj["q"]), float(obj["p"])),
    }
    if kind not in makers:
        raise ValueError(f"unknown channel kind {kind!r}; choose from {sorted(makers)}")
    try:
        return makers[kind]()
    except KeyError as exc:
        raise ValueError(f"channel {kind!r} is missing parameter {exc}") from None


def _per_use(obj, n: int, base: Path) -> list[TransitionMatrix]:
    if isinstance(obj, list):
        out = [_channel_from(o, base) for o in obj]
        if len(out) != n:
            raise ValueError(f"{len(out)} per-use channels given for block length {n}")
        return out
    return [_channel_from(obj, base)] * n


def _code_from(obj, base: Path) -> LinearCode:
    if isinstance(obj, str):
        return load_code(base / obj)
    if "file" in obj:
        return load_code(base / obj["file"])
    if "rows" in obj:
        return LinearCode.from_json(obj)
    if "name" in obj:
        return standard_code(obj["name"], **obj.get("params", {}))
    raise ValueError("code entry needs a file, explicit rows or a standard name")


def _adversary_from(obj, n: int, base: Path):
    if obj is None:
        return None
    kind = obj.get("type", "memoryless")
    if kind == "memoryless":
        return Memoryless(_per_use(obj["channel"], n, base))
    if kind == "wiretap2":
        return WiretapII(n, int(obj["q"]))
    if kind == "avc":
        spec = obj["spec"]
        if isinstance(spec, str):
            spec = json.loads((base / spec).read_text())
        return TypeConstrainedAvc(AvcSpec.from_json(spec), n)
    raise ValueError(f"unknown adversary type {kind!r}")


def scheme_from_json(obj: dict, base_dir=".") -> SchemeConfig:
    """Build a :class:`SchemeConfig` from its JSON form.

    ``extractor``: ``{"family", "lam", "poly"?}``; ``code``: a file name,
    inline rows or ``{"name", "params"}``; ``receiver``: one channel or a list
    of per-use channels; ``adversary``: ``{"type": "memoryless" | "wiretap2"
    | "avc", ...}``; ``t``: number of message blocks.  Relative file names
    resolve against ``base_dir``.
    """
    base = Path(base_dir)
    try:
        code = _code_from(obj["code"], base)
        e = obj["extractor"]
        ext = make_extractor(e.get("family", "toeplitz"), code.k, int(e["lam"]), code.p, int(e.get("poly", 0)))
        receiver = _per_use(obj.get("receiver", {"kind": "noiseless", "q": code.p}), code.n, base)
        adversary = _adversary_from(obj.get("adversary"), code.n, base)
    except KeyError as exc:
        raise ValueError(f"scheme config is missing {exc}") from None
    return SchemeConfig(ext, code, receiver, adversary, int(obj.get("t", 1)))


def load_scheme(path) -> SchemeConfig:
    path = Path(path)
    return scheme_from_json(json.loads(path.read_text()), path.parent)
