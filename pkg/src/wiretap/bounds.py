"""Closed-form and semi-numeric secrecy bounds, secure-length formulas and
the message-length-versus-blocklength curves.

Large quantities (``2**n``, ``|Z|**n``) are handled in the log2 domain so the
formulas stay finite for ``n`` in the millions.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np
from scipy.special import gammaln

from .coremath import ProbVector, binary_entropy, entropy_stats, stable_sum

__all__ = [
    "BoundReport",
    "simple_bound",
    "wiretap2_bound",
    "bsc_smoothed_bound",
    "bsc_simple_bound",
    "bsc_top_mass_log2",
    "DeltaSearch",
    "optimize_delta",
    "general_aep_bound",
    "aep_iid_bound",
    "exhaustive_cut_aep_bound",
    "LengthResult",
    "achievable_length",
    "avwtc_length",
    "Composed",
    "unseeded_compose",
    "code_dimension",
    "max_length",
    "curve",
    "curve_table",
    "log_grid",
    "write_curve_csv",
    "CURVE_KINDS",
    "CSV_HEADER",
]

CURVE_KINDS = ("simple", "smoothed", "aep", "capacity", "wiretap2")
CSV_HEADER = ("n", "ell_simple", "ell_smoothed", "ell_aep", "ell_capacity")
_LN2 = math.log(2.0)


@dataclass
class BoundReport:
    epsilon_rm: float
    params: dict = field(default_factory=dict)
    source: str = ""
    epsilon_mt: float | None = None

    def __post_init__(self):
        if not self.epsilon_rm >= 0:
            raise ValueError(f"bound must be non-negative, got {self.epsilon_rm}")

    @property
    def vacuous(self) -> bool:
        """True when the bound exceeds 1/2 and says nothing useful."""
        return self.epsilon_rm > 0.5

    def to_json(self) -> dict:
        out = {
            "epsilon_sec_rm": self.epsilon_rm,
            "source": self.source,
            "vacuous": self.vacuous,
            "params": {k: _jsonable(v) for k, v in self.params.items()},
        }
        if self.epsilon_mt is not None:
            out["epsilon_sec_mt"] = self.epsilon_mt
        return out


def _jsonable(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, int) and v.bit_length() > 53:
        return float(v)
    return v


def _report(log2_inner: float, extra: float, params, source, symmetric) -> BoundReport:
    # 1/2 * sqrt(2**log2_inner) + extra
    rm = 0.5 * 2.0 ** (0.5 * log2_inner) + extra if log2_inner < 2000 else math.inf
    return BoundReport(rm, params, source, 2 * rm if symmetric else None)


def _log2(x) -> float:
    return math.log2(x) if x > 0 else -math.inf


def simple_bound(ell, sorted_cond, V_size: int, Z_size: int, n: int, symmetric: bool = False) -> BoundReport:
    """Guessing-probability bound from the top ``ceil(|Z|^n / |V|)`` outputs."""
    p = sorted_cond.sorted_view if isinstance(sorted_cond, ProbVector) else np.sort(np.asarray(sorted_cond, float))[::-1]
    top = -(-(Z_size**n) // V_size)
    if p.size < top:
        raise ValueError(f"only {p.size} probabilities given, the cutoff needs {top}")
    mass = stable_sum(p[:top])
    return _report(
        ell + _log2(mass), 0.0,
        {"ell": ell, "n": n, "Z_size": Z_size, "V_size": V_size, "top": top, "top_mass": mass},
        "simple", symmetric,
    )


def wiretap2_bound(ell, q, k) -> BoundReport:
    """Adversary reads ``q`` of the ``n`` positions of a dimension-``k`` code."""
    return _report(ell + q - k, 0.0, {"ell": ell, "q": q, "k": k}, "wiretap2", False)


def bsc_smoothed_bound(ell, k, n, p_A, delta, symmetric: bool = False) -> BoundReport:
    if not 0 < delta < p_A < 0.5:
        raise ValueError(f"need 0 < delta < p_A < 1/2, got delta={delta}, p_A={p_A}")
    log2_inner = ell + n - k - n * binary_entropy(p_A - delta)
    tail = math.exp(-2 * n * delta * delta)
    return _report(
        log2_inner, tail,
        {"ell": ell, "k": k, "n": n, "p_A": p_A, "delta": delta, "eps_smooth": tail},
        "bsc_smoothed", symmetric,
    )


def _log2_binom(n: int, j: np.ndarray) -> np.ndarray:
    if n <= 1000:
        return np.array([math.log2(math.comb(n, int(i))) for i in j])
    return (gammaln(n + 1) - gammaln(j + 1) - gammaln(n - j + 1)) / _LN2


@lru_cache(maxsize=4096)
def bsc_top_mass_log2(n: int, k: int, p_A: float) -> float:
    """log2 of the total probability of the ``2^(n-k)`` likeliest words of
    ``n`` independent Bernoulli(``p_A``) flips."""
    if not 0 <= p_A <= 1:
        raise ValueError("p_A must lie in [0, 1]")
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
    if n - k == n:
        return 0.0
    j = np.arange(n + 1)
    with np.errstate(divide="ignore"):
        log2_p = j * np.log2(p_A) + (n - j) * np.log2(1 - p_A) if 0 < p_A < 1 else np.where(
            j == (n if p_A == 1 else 0), 0.0, -np.inf
        )
    log2_count = _log2_binom(n, j)
    order = np.argsort(-log2_p, kind="stable")
    lc = log2_count[order]
    lp = log2_p[order]
    cum = np.logaddexp.accumulate(lc * _LN2) / _LN2
    target = float(n - k)
    t = int(np.searchsorted(cum, target - 1e-12))
    t = min(t, n)
    full = lc[:t] + lp[:t]
    if t == 0:
        left = target
    else:
        # log2(2^target - 2^cum[t-1])
        gap = cum[t - 1] - target
        left = target + math.log2(-math.expm1(gap * _LN2)) if gap < 0 else -math.inf
    terms = np.append(full, left + lp[t])
    terms = terms[np.isfinite(terms)]
    if terms.size == 0:
        return -math.inf
    return float(np.logaddexp.reduce(terms * _LN2) / _LN2)


def bsc_simple_bound(ell, k, n, p_A, symmetric: bool = False) -> BoundReport:
    """:func:`simple_bound` for a BSC adversary without enumerating words."""
    log2_top = bsc_top_mass_log2(int(n), int(k), float(p_A))
    return _report(
        ell + log2_top, 0.0,
        {"ell": ell, "k": k, "n": n, "p_A": p_A, "log2_top_mass": log2_top},
        "simple", symmetric,
    )


class DeltaSearch(NamedTuple):
    delta: float
    value: float
    constant: bool


def optimize_delta(fn: Callable[[float], float], lo: float, hi: float, rtol: float = 1e-6, grid: int = 65) -> DeltaSearch:
    """Minimise ``fn`` over ``[lo, hi]``: grid scan, then golden section.

    ``constant`` flags a function that is flat on the grid (any delta is
    then optimal and ``lo`` is returned).
    """
    if lo > hi:
        raise ValueError(f"empty delta range [{lo}, {hi}]")
    if lo == hi:
        return DeltaSearch(lo, fn(lo), True)
    xs = np.linspace(lo, hi, grid)
    ys = np.array([fn(float(x)) for x in xs])
    finite = ys[np.isfinite(ys)]
    if finite.size and np.ptp(finite) <= 1e-15 * max(1.0, abs(finite[0])) and finite.size == ys.size:
        return DeltaSearch(lo, float(ys[0]), True)
    i = int(np.argmin(ys))
    a = float(xs[max(i - 1, 0)])
    b = float(xs[min(i + 1, grid - 1)])
    g = (math.sqrt(5) - 1) / 2
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > rtol * max(abs(a), abs(b), 1e-300):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = fn(d)
    x = (a + b) / 2
    best = min((fn(x), x), (float(ys[i]), float(xs[i])))
    return DeltaSearch(best[1], best[0], False)


def general_aep_bound(
    M_size, Z_size, n, V_size, kappa=None, eps_smooth=0.0, *, log2_kappa=None, symmetric: bool = False
) -> BoundReport:
    """Bound from a cut-off level ``kappa`` above which the adversary's
    conditional output distribution carries at most ``eps_smooth`` mass."""
    if (kappa is None) == (log2_kappa is None):
        raise ValueError("give exactly one of kappa and log2_kappa")
    if log2_kappa is None:
        log2_kappa = _log2(kappa)
    if not 0 <= eps_smooth <= 1:
        raise ValueError(f"eps_smooth must lie in [0, 1], got {eps_smooth}")
    floor = -n * math.log2(Z_size)
    if log2_kappa < floor - 1e-9 * max(1.0, abs(floor)):
        raise ValueError("kappa is below the uniform level |Z|^-n")
    log2_inner = _log2(M_size) + n * math.log2(Z_size) - _log2(V_size) + log2_kappa
    return _report(
        log2_inner, eps_smooth,
        {"M_size": M_size, "Z_size": Z_size, "n": n, "V_size": V_size, "log2_kappa": log2_kappa, "eps_smooth": eps_smooth},
        "general_aep", symmetric,
    )


def aep_iid_bound(ell, k, n, per_use, delta, p: int = 2, symmetric: bool = False) -> BoundReport:
    """General bound with the Chebyshev form of the AEP for ``n`` i.i.d. uses.

    ``per_use`` is the output distribution of one channel use for a fixed
    input.  The Chebyshev term can exceed 1; it is clipped to 1, which only
    leaves a bound that is at least 1 and so still valid.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    stats = entropy_stats(per_use)
    z_size = len(per_use)
    eps = min(1.0, stats.variance_log / (n * delta * delta))
    log2_kappa = max(-n * (stats.entropy - delta), -n * math.log2(z_size))
    log2_inner = ell + n * math.log2(z_size) - k * math.log2(p) + log2_kappa
    return _report(
        log2_inner, eps,
        {"ell": ell, "k": k, "n": n, "delta": delta, "entropy": stats.entropy,
         "variance": stats.variance_log, "log2_kappa": log2_kappa, "eps_smooth": eps},
        "aep_iid", symmetric,
    )


def exhaustive_cut_aep_bound(ell, sorted_cond, V_size: int, Z_size: int, n: int, symmetric: bool = False) -> BoundReport:
    """General bound with the cut-off at the ``ceil(|Z|^n/|V|)``-th largest
    probability and the exact mass strictly above it as the smoothing error.

    The cut-off is raised to ``|Z|^-n`` when the level falls below it.
    """
    p = sorted_cond.sorted_view if isinstance(sorted_cond, ProbVector) else np.sort(np.asarray(sorted_cond, float))[::-1]
    top = -(-(Z_size**n) // V_size)
    if p.size < top:
        raise ValueError(f"only {p.size} probabilities given, the cutoff needs {top}")
    kappa = max(float(p[top - 1]), float(Z_size) ** -n)
    eps = stable_sum(p[p > kappa * (1 + 1e-12)])
    return general_aep_bound(2**ell, Z_size, n, V_size, kappa, min(eps, 1.0), symmetric=symmetric)


class LengthResult(NamedTuple):
    bits: float
    clamped: bool


def achievable_length(n, C_R, Z_size, H_Z_given_X) -> LengthResult:
    raw = n * (C_R - math.log2(Z_size) + H_Z_given_X)
    return LengthResult(max(raw, 0.0), raw < 0)


def avwtc_length(V_size, n, frequencies: Sequence[float], per_state_mutual_info: Sequence[float]) -> float:
    f = np.asarray(frequencies, dtype=float)
    if abs(f.sum() - 1) > 1e-9 or np.any(f < 0):
        raise ValueError("state frequencies must be a probability vector")
    if len(per_state_mutual_info) != f.size:
        raise ValueError("one mutual information per state is needed")
    return math.log2(V_size) - n * float(np.dot(f, per_state_mutual_info))


class Composed(NamedTuple):
    eps_rm: float
    eps_cor: float
    breakdown: dict


def unseeded_compose(eps_rm, eps_cor, t, seed_err=0.0) -> Composed:
    """Guarantees after ``t`` seeded rounds share one transmitted seed."""
    if t < 1:
        raise ValueError("t must be at least 1")
    rounds = t * eps_cor
    return Composed(t * eps_rm, rounds + seed_err, {"message_rounds": rounds, "seed_transmission": seed_err})


# curves


def code_dimension(n: int, p_R: float) -> int:
    return int(math.floor(n * (1 - binary_entropy(p_R)) + 1e-9))


def max_length(bound_of_ell: Callable[[int], float], eps: float, ell_max: int) -> int:
    """Largest integer ``ell`` in ``[0, ell_max]`` with bound <= eps, or -1."""
    if ell_max < 0 or bound_of_ell(0) > eps:
        return -1
    lo, hi = 0, ell_max
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if bound_of_ell(mid) <= eps:
            lo = mid
        else:
            hi = mid - 1
    return lo


def _smoothed_opt(ell, k, n, p_A):
    hi = p_A * (1 - 1e-9)
    return optimize_delta(lambda d: bsc_smoothed_bound(ell, k, n, p_A, d).epsilon_rm, p_A * 1e-9, hi).value


def _aep_opt(ell, k, n, p_A):
    per_use = [1 - p_A, p_A]
    h = binary_entropy(p_A)
    if h == 0:
        return math.inf
    return optimize_delta(lambda d: aep_iid_bound(ell, k, n, per_use, d).epsilon_rm, h * 1e-6, h).value


def _point(kind, n, p_R, p_A, eps, f, k):
    if k is None:
        k = code_dimension(n, p_R)
    if kind == "capacity":
        return n * max(binary_entropy(p_A) - binary_entropy(p_R), 0.0)
    if kind == "simple":
        fn = lambda ell: bsc_simple_bound(ell, k, n, p_A).epsilon_rm  # noqa: E731
    elif kind == "smoothed":
        fn = lambda ell: _smoothed_opt(ell, k, n, p_A)  # noqa: E731
    elif kind == "aep":
        fn = lambda ell: _aep_opt(ell, k, n, p_A)  # noqa: E731
    elif kind == "wiretap2":
        if f is None:
            raise ValueError("the wiretap2 curve needs the observed fraction f")
        q = math.ceil(f * n - 1e-9)
        fn = lambda ell: wiretap2_bound(ell, q, k).epsilon_rm  # noqa: E731
    else:
        raise ValueError(f"unknown bound kind {kind!r}; choose from {CURVE_KINDS}")
    return float(max(max_length(fn, eps, k), 0))


def curve(kind, p_R, p_A, eps_target, n_grid: Iterable[int], *, f=None, k=None, threads: int = 1) -> list[tuple[int, float]]:
    """``(n, largest ell with bound <= eps_target)`` for each ``n``.

    ``k`` defaults to ``floor(n (1 - h(p_R)))``; where no ``ell`` meets the
    target the length is 0.  The capacity row is ``n (h(p_A) - h(p_R))``.
    """
    if kind not in CURVE_KINDS:
        raise ValueError(f"unknown bound kind {kind!r}; choose from {CURVE_KINDS}")
    ns = [int(n) for n in n_grid]

    def one(n):
        return _point(kind, n, p_R, p_A, eps_target, f, k)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            vals = list(pool.map(one, ns))
    else:
        vals = [one(n) for n in ns]
    return list(zip(ns, vals))


def curve_table(kinds, p_R, p_A, eps_target, n_grid, *, threads: int = 1) -> list[dict]:
    """Rows keyed by the CSV header; kinds not requested stay ``None``."""
    ns = [int(n) for n in n_grid]
    rows = [{h: None for h in CSV_HEADER} | {"n": n} for n in ns]
    for kind in kinds:
        if kind not in ("simple", "smoothed", "aep", "capacity"):
            raise ValueError(f"kind {kind!r} has no CSV column")
        for row, (_, ell) in zip(rows, curve(kind, p_R, p_A, eps_target, ns, threads=threads)):
            row[f"ell_{kind}"] = ell
    return rows


def log_grid(n_min: int, n_max: int, steps: int) -> list[int]:
    if n_min < 1 or n_max < n_min or steps < 1:
        raise ValueError("need 1 <= n_min <= n_max and steps >= 1")
    if steps == 1:
        return [int(n_min)]
    pts = np.rint(np.geomspace(n_min, n_max, steps)).astype(np.int64)
    return sorted(set(int(x) for x in pts))


def write_curve_csv(rows: Sequence[dict], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for row in rows:
        out = [str(int(row["n"]))]
        for h in CSV_HEADER[1:]:
            v = row.get(h)
            out.append("" if v is None else f"{v:.6g}")
        w.writerow(out)
