"""Invariant suites run by ``wiretap verify``.

Each suite enumerates its instances exhaustively and returns a
:class:`SuiteResult` with the numbers it measured, so callers can apply
their own tolerances and print a table.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import oracle
from .bounds import avwtc_length, achievable_length, exhaustive_cut_aep_bound, simple_bound, wiretap2_bound
from .channels import (
    AvcSpec,
    bec,
    bsc,
    circulant_channel,
    classify_symmetry,
    mutual_information,
    noiseless,
    product_output_dist,
    restricted_symmetry_check,
    z_channel,
)
from .coremath import binary_entropy
from .ecc import LinearCode, identity_code, random_linear_code, repetition_code
from .extractors import InvertibleExtractor, make_extractor
from .protocol import (
    MAX_SECRECY_ENTRIES,
    Memoryless,
    SchemeConfig,
    TypeConstrainedAvc,
    WiretapII,
    exact_secrecy,
    identity_code_secrecy,
)

__all__ = [
    "SuiteResult",
    "CorruptedInverter",
    "inverter_suite",
    "universality_suite",
    "lohl_suite",
    "cut_suite",
    "wiretap2_suite",
    "bound_soundness_suite",
    "avc_order_suite",
    "symmetry_suite",
    "SCALES",
    "run_suites",
]

TOL = 1e-9


@dataclass
class SuiteResult:
    name: str
    passed: bool
    checked: int
    detail: dict = field(default_factory=dict)
    witness: object = None
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = "" if self.witness is None else f"  witness={self.witness}"
        return f"{status}  {self.name:<22} {self.checked:>6} checks  {self.seconds:6.1f}s{extra}"

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "checked": self.checked,
            "seconds": round(self.seconds, 3),
            "witness": None if self.witness is None else repr(self.witness),
            "detail": {k: (float(v) if isinstance(v, (Fraction, np.floating)) else v) for k, v in self.detail.items()},
        }


class CorruptedInverter(InvertibleExtractor):
    """Test double: an extractor whose inverter repeats a preimage.

    For message ``m`` under seed ``s`` randomness 1 returns the same
    preimage as randomness 0, so one preimage is never produced.
    """

    def __init__(self, inner: InvertibleExtractor, m: int = 0, s: int | None = None):
        self.inner = inner
        self.params, self.l, self.lam, self.p = inner.params, inner.l, inner.lam, inner.p
        self.family = f"corrupted-{inner.family}"
        self.bad_m = m
        self.bad_s = int(inner.seeds()[-1]) if s is None else s

    def seeds(self):
        return self.inner.seeds()

    def extract(self, v, s):
        return self.inner.extract(v, s)

    def _patch(self, m, r, out, s):
        m = np.broadcast_to(np.asarray(m), np.shape(out))
        r = np.broadcast_to(np.asarray(r), np.shape(out))
        if s != self.bad_s:
            return out
        out = np.array(out, copy=True)
        hit = (m == self.bad_m) & (r == 1)
        out[hit] = self.inner.invert(self.bad_m, s, 0)
        return out

    def invert(self, m, s, r):
        return self._patch(m, r, self.inner.invert(m, s, r), s)

    def invert_many(self, m, seeds, r):
        return np.stack([np.asarray(self.invert(m, int(s), r)) for s in np.asarray(seeds)])


def _timed(fn: Callable[..., SuiteResult]):
    def run(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - t0
        return res

    run.__name__ = fn.__name__
    run.__doc__ = fn.__doc__
    return run


@_timed
def inverter_suite(l_max: int = 12, extractors=None) -> SuiteResult:
    """Ext(Inv(m, s, r), s) = m and every preimage hit exactly once."""
    if extractors is None:
        extractors = [
            make_extractor(fam, l, lam) for fam in ("finite_field", "toeplitz") for l in range(2, l_max + 1) for lam in range(1, l + 1)
        ]
    tuples = 0
    for ext in extractors:
        bad = oracle.find_inverter_violation(ext)
        if bad is not None:
            return SuiteResult("inverter-uniformity", False, tuples, {"extractor": repr(ext)}, bad)
        tuples += ext.n_seeds * ext.n_inputs
    return SuiteResult("inverter-uniformity", True, tuples, {"extractors": len(extractors)})


@_timed
def universality_suite(l_max: int = 8) -> SuiteResult:
    """Largest collision fraction over distinct input pairs is at most 2^-lam."""
    worst_ratio, checked = Fraction(0), 0
    for fam in ("finite_field", "toeplitz"):
        for l in range(1 if fam == "finite_field" else 2, l_max + 1):
            for lam in range(1, l + 1):
                ext = make_extractor(fam, l, lam)
                frac = oracle.verify_two_universality(ext)
                checked += 1
                ratio = frac * ext.n_messages
                worst_ratio = max(worst_ratio, ratio)
                if ratio > 1:
                    return SuiteResult("two-universality", False, checked, {"fraction": frac}, (fam, l, lam))
    return SuiteResult("two-universality", True, checked, {"worst_fraction_times_M": worst_ratio})


def _random_joint(rng, n_v, n_z):
    shape = rng.choice(["dirichlet", "peaked", "sparse"])
    if shape == "dirichlet":
        t = rng.dirichlet(np.full(n_v * n_z, rng.uniform(0.1, 2.0)))
    elif shape == "peaked":
        t = rng.exponential(size=n_v * n_z) ** rng.uniform(2, 6)
    else:
        t = rng.random(n_v * n_z) * (rng.random(n_v * n_z) < 0.3)
        t[rng.integers(t.size)] += 1.0
    return (t / t.sum()).reshape(n_v, n_z)


@_timed
def lohl_suite(trials: int = 200, seed: int = 1) -> SuiteResult:
    """Hashed output distance from uniform within the left-over hash bound."""
    rng = np.random.default_rng(seed)
    worst_gap, violations = -math.inf, 0
    for i in range(trials):
        l = int(rng.integers(1, 7))
        n_z = int(rng.integers(1, 9))
        fam = "finite_field" if l == 1 or rng.random() < 0.5 else "toeplitz"
        lam = int(rng.integers(1, l + 1))
        ext = make_extractor(fam, l, lam)
        pvz = _random_joint(rng, ext.n_inputs, n_z)
        d = oracle.exact_dU(oracle.hashed_joint(ext, pvz))
        bound = 0.5 * math.sqrt(ext.n_messages * oracle.exact_pguess(pvz))
        worst_gap = max(worst_gap, d - bound)
        if d > bound + TOL:
            violations += 1
    return SuiteResult("lohl-soundness", violations == 0, trials, {"violations": violations, "max_excess": worst_gap})


@_timed
def cut_suite(trials: int = 100, seed: int = 2) -> SuiteResult:
    """Cut distribution sits at its declared distance and respects the cap."""
    rng = np.random.default_rng(seed)
    worst_dist, worst_over = 0.0, -math.inf
    for _ in range(trials):
        size = int(rng.integers(2, 200))
        p = rng.dirichlet(np.full(size, rng.uniform(0.05, 3.0)))
        lo = 1.0 / size
        cap = float(rng.uniform(lo, max(p.max(), lo)))
        q, eps = oracle.cut_distribution(p, cap)
        worst_dist = max(worst_dist, abs(oracle.distinguishing_advantage(p, q) - eps))
        worst_over = max(worst_over, float(q.probs.max() - cap))
    ok = worst_dist <= 1e-12 and worst_over <= 1e-12
    return SuiteResult("cut-distribution", ok, trials, {"max_distance_error": worst_dist, "max_over_cap": worst_over})


def _wiretap2_code(n, k, seed=7) -> LinearCode:
    return random_linear_code(2, n, k, seed=seed)


@_timed
def wiretap2_suite(n: int = 6, k: int = 4, ells=(1, 2), qs=(1, 2, 3)) -> SuiteResult:
    """Exact secrecy against every choice of observed positions."""
    code = _wiretap2_code(n, k)
    per_case, checked, ok = {}, 0, True
    for ell in ells:
        ext = make_extractor("toeplitz", k, ell)
        for q in qs:
            cfg = SchemeConfig(ext, code, [noiseless()] * n, WiretapII(n, q))
            rep = exact_secrecy(cfg)
            bound = wiretap2_bound(ell, q, k).epsilon_rm
            checked += len(rep.per_strategy)
            per_case[f"ell={ell},q={q}"] = (rep.rm, bound)
            if rep.rm > bound + TOL:
                ok = False
    return SuiteResult("wiretap2", ok, checked, {"max_over_masks_vs_bound": per_case})


def bound_instances(n_max: int = 12):
    """Identity and repetition codes up to ``n_max`` with every message length."""
    for n in range(1, n_max + 1):
        for code in (identity_code(n), repetition_code(n)):
            if n == 1 and code.name.startswith("repetition"):
                continue  # same code as identity(1)
            for ell in range(1, code.k + 1):
                yield code, make_extractor("toeplitz", code.k, ell)


def _exact_rm(ext, code, adv) -> tuple[float, str]:
    if ext.n_messages * ext.n_seeds * 2**code.n <= MAX_SECRECY_ENTRIES:
        cfg = SchemeConfig(ext, code, [noiseless()] * code.n, Memoryless(adv))
        return exact_secrecy(cfg, pairwise=False).rm, "joint-table"
    if code == identity_code(code.n):
        return identity_code_secrecy(ext, adv), "noise-shift"
    raise ValueError(f"{code.name} with {ext!r} is beyond the exact-secrecy cap")


@_timed
def bound_soundness_suite(n_max: int = 12, p_A: float = 0.35) -> SuiteResult:
    """exact <= simple bound <= general bound cut at the top-K level."""
    violations, checked, rows, methods = 0, 0, [], {}
    for code, ext in bound_instances(n_max):
        n, ell = code.n, ext.lam
        adv = [bsc(p_A)] * n
        exact, method = _exact_rm(ext, code, adv)
        methods[method] = methods.get(method, 0) + 1
        cond = product_output_dist(adv, code.codebook()[0])
        simple = simple_bound(ell, cond, code.size, 2, n).epsilon_rm
        aep = exhaustive_cut_aep_bound(ell, cond, code.size, 2, n).epsilon_rm
        checked += 1
        rows.append((code.name, ell, exact, simple, aep))
        if not (exact <= simple + TOL and simple <= aep + TOL):
            violations += 1
    return SuiteResult(
        "bound-soundness", violations == 0, checked, {"violations": violations, "methods": methods, "instances": rows},
        None if violations == 0 else next(r for r in rows if not (r[2] <= r[3] + TOL and r[3] <= r[4] + TOL)),
    )


def avc_instances(n: int):
    """Schemes whose exact secrecy cannot depend on the state order."""
    # the repetition code is fixed by every coordinate permutation; for one
    # output bit the finite-field seeds run over every non-zero linear form
    yield repetition_code(n), make_extractor("toeplitz", 1, 1)
    yield identity_code(n), make_extractor("finite_field", n, 1)


@_timed
def avc_order_suite(n: int = 8, states=(0.1, 0.4), frequencies=(0.5, 0.5)) -> SuiteResult:
    """Exact secrecy is the same for every order of a fixed state type.

    Checked on schemes that are symmetric under coordinate permutations; for
    other schemes only the bound is order-free and exact <= bound is checked
    for every order instead.
    """
    spec = AvcSpec(tuple(bsc(p) for p in states), tuple(frequencies))
    adversary = TypeConstrainedAvc(spec, n)
    spreads, orders, sound = {}, 0, True
    for code, ext in avc_instances(n):
        rep = exact_secrecy(SchemeConfig(ext, code, [noiseless()] * n, adversary))
        vals = np.array([r[1] for r in rep.per_strategy])
        mts = np.array([r[2] for r in rep.per_strategy])
        orders = len(vals)
        spreads[f"{code.name}/{ext.family}"] = (float(np.ptp(vals)), float(np.ptp(mts)))
    # general linear code: exact <= simple bound for every order, and the
    # simple bound itself is order-free
    code = random_linear_code(2, n, 4, seed=11)
    ext = make_extractor("toeplitz", 4, 2)
    rep = exact_secrecy(SchemeConfig(ext, code, [noiseless()] * n, adversary))
    bounds = []
    for seq, rm, _ in rep.per_strategy:
        per_use = [spec.states[q] for q in seq]
        cond = product_output_dist(per_use, code.codebook()[0])
        b = simple_bound(ext.lam, cond, code.size, 2, n).epsilon_rm
        bounds.append(b)
        sound &= rm <= b + TOL
    bound_spread = float(np.ptp(bounds))
    # one state: log2|V| - n I(X;Z) against n (C_R - log2|Z| + H(Z|X)), |V| = 2^n
    lhs = avwtc_length(2**n, n, [1.0], [mutual_information(bsc(states[0]))])
    rhs = achievable_length(n, 1.0, 2, binary_entropy(states[0])).bits
    length_gap = abs(lhs - rhs)
    max_spread = max(max(v) for v in spreads.values())
    ok = max_spread <= TOL and sound and bound_spread <= TOL and length_gap <= TOL
    return SuiteResult(
        "avc-order-invariance", ok, orders,
        {"spread": spreads, "bound_spread": bound_spread, "sound_all_orders": sound, "length_gap": length_gap},
    )


def _strongly_symmetric_use(p: int, rng):
    if p == 2:
        return bsc(float(rng.uniform(0.01, 0.49)))
    return circulant_channel(rng.dirichlet(np.ones(p)))


def symmetry_instances(count: int = 50, n_max: int = 6, seed: int = 3):
    rng = np.random.default_rng(seed)
    for i in range(count):
        p = 2 if i % 2 == 0 else 3
        n = int(rng.integers(2, n_max + 1))
        k_max = min(n, 7 if p == 2 else 5)
        k = int(rng.integers(1, k_max + 1))
        code = random_linear_code(p, n, k, seed=int(rng.integers(2**31)))
        per_use = [_strongly_symmetric_use(p, rng) for _ in range(n)]
        lam = int(rng.integers(1, k + 1))
        yield code, per_use, lam


@_timed
def symmetry_suite(count: int = 50, n_max: int = 6, seed: int = 3) -> SuiteResult:
    """Channel classes, restricted symmetry, equidistance and mt <= 2 rm."""
    kinds = {
        "bsc": classify_symmetry(bsc(0.1)).kind,
        "bec": classify_symmetry(bec(0.2)).kind,
        "z": classify_symmetry(z_channel(0.3)).kind,
    }
    expected = {"bsc": "strongly_symmetric", "bec": "symmetric", "z": "asymmetric"}
    classes_ok = kinds == expected
    restricted = equidistant = reduction = 0
    worst_ratio, witness = 0.0, None
    for idx, (code, per_use, lam) in enumerate(symmetry_instances(count, n_max, seed)):
        if restricted_symmetry_check(per_use, code):
            restricted += 1
        elif witness is None:
            witness = ("restricted", idx)
        try:
            oracle.verify_equidistance(per_use, code)
            equidistant += 1
        except oracle.VerificationError as exc:
            witness = witness or ("equidistance", idx, exc.witness)
        ext = make_extractor("toeplitz", code.k, lam, code.p)
        rep = exact_secrecy(SchemeConfig(ext, code, [noiseless(code.p)] * code.n, Memoryless(per_use)))
        if rep.mt <= 2 * rep.rm + TOL:
            reduction += 1
        elif witness is None:
            witness = ("mt>2rm", idx, rep.mt, rep.rm)
        if rep.rm > 0:
            worst_ratio = max(worst_ratio, rep.mt / rep.rm)
    ok = classes_ok and restricted == equidistant == reduction == count
    return SuiteResult(
        "symmetry", ok, count,
        {"classes": kinds, "restricted": restricted, "equidistant": equidistant,
         "mt_le_2rm": reduction, "max_mt_over_rm": worst_ratio},
        witness,
    )


SCALES = {
    "small": dict(
        inverter={"l_max": 9},
        universality={"l_max": 6},
        lohl={"trials": 60},
        cut={"trials": 100},
        wiretap2={},
        bound={"n_max": 10},
        avc={"n": 6},
        symmetry={"count": 20, "n_max": 5},
    ),
    "full-desk": dict(
        inverter={"l_max": 12},
        universality={"l_max": 8},
        lohl={"trials": 200},
        cut={"trials": 100},
        wiretap2={},
        bound={"n_max": 12},
        avc={"n": 8},
        symmetry={"count": 50, "n_max": 6},
    ),
}


def run_suites(scale: str = "small", mutate_inverter: bool = False) -> list[SuiteResult]:
    cfg = SCALES[scale]
    inverter_kwargs = dict(cfg["inverter"])
    if mutate_inverter:
        inverter_kwargs = {"extractors": [CorruptedInverter(make_extractor("toeplitz", 4, 2), m=1)]}
    return [
        inverter_suite(**inverter_kwargs),
        universality_suite(**cfg["universality"]),
        lohl_suite(**cfg["lohl"]),
        cut_suite(**cfg["cut"]),
        wiretap2_suite(**cfg["wiretap2"]),
        symmetry_suite(**cfg["symmetry"]),
        bound_soundness_suite(**cfg["bound"]),
        avc_order_suite(**cfg["avc"]),
    ]
