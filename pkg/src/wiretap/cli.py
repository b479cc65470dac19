"""``wiretap`` command line: curves, single bounds, simulation, verification.

Exit status is 0 on success, 1 when a verification suite fails and 2 on a
usage error.  Every run writes a manifest (subcommand, flags, input digests,
seed, version) next to its result.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import (
    BoundReport,
    aep_iid_bound,
    bsc_simple_bound,
    bsc_smoothed_bound,
    curve_table,
    log_grid,
    optimize_delta,
    simple_bound,
    wiretap2_bound,
    write_curve_csv,
)
from .channels import MAX_OUTCOMES, TransitionMatrix, product_output_dist
from .coremath import binary_entropy, entropy_stats
from .protocol import exact_decoding_error, exact_secrecy, load_scheme, run_seeded_trials
from .verification import SCALES, run_suites

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _default_threads() -> int:
    raw = os.environ.get("WIRETAP_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _manifest(args, inputs=(), seed=None) -> dict:
    flags = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "command")}
    return {
        "subcommand": args.command,
        "flags": flags,
        "inputs": {str(p): _digest(p) for p in inputs},
        "seed": seed,
        "version": __version__,
    }


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"cannot serialise {type(o).__name__}")


def _emit_json(args, payload: dict, manifest: dict) -> None:
    out = dict(payload, manifest=manifest)
    text = _dump(out)
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
        Path(f"{args.out}.manifest.json").write_text(_dump(manifest))
    else:
        sys.stdout.write(text)


def _probability(name):
    def parse(text):
        try:
            v = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be a number, got {text!r}") from None
        if not 0 <= v <= 1 or math.isnan(v):
            raise argparse.ArgumentTypeError(f"{name} must lie in [0, 1], got {v}")
        return v

    return parse


# curve


def cmd_curve(args) -> int:
    kinds = [k.strip() for k in args.bounds.split(",") if k.strip()]
    allowed = ("simple", "smoothed", "aep", "capacity")
    bad = [k for k in kinds if k not in allowed]
    if bad or not kinds:
        raise UsageError(f"--bounds takes a comma list from {allowed}, got {args.bounds!r}")
    if not 0 < args.eps < 1:
        raise UsageError("--eps must lie in (0, 1)")
    if not (0 < args.p_r < 0.5 and 0 < args.p_a < 0.5):
        raise UsageError("--p-r and --p-a must lie strictly between 0 and 1/2")
    try:
        grid = log_grid(args.n_min, args.n_max, args.n_steps)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if {"smoothed", "aep"} & set(kinds) and args.p_a <= 0:
        raise UsageError("--p-a must be positive")
    rows = curve_table(kinds, args.p_r, args.p_a, args.eps, grid, threads=args.threads)
    manifest = _manifest(args)
    capacity = binary_entropy(args.p_a) - binary_entropy(args.p_r)
    if capacity <= 0:
        manifest["flags_raised"] = ["no secrecy capacity: the adversary's channel is at least as good"]
        print("warning: adversary channel is at least as good as the receiver's; all lengths are 0", file=sys.stderr)
    buf = io.StringIO()
    write_curve_csv(rows, buf)
    if args.out:
        Path(args.out).write_text(buf.getvalue())
        Path(f"{args.out}.manifest.json").write_text(_dump(manifest))
    else:
        sys.stdout.write(buf.getvalue())
        sys.stderr.write(_dump(manifest))
    return EXIT_OK


# bound


def _require(args, *names):
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"--kind {args.kind} needs {', '.join(missing)}")


def _channel_row(args) -> tuple[np.ndarray, list]:
    """Per-use output distribution for input symbol ``--input``."""
    if args.channel:
        w = TransitionMatrix.load(args.channel)
        if not 0 <= args.input < w.n_inputs:
            raise UsageError(f"--input must lie in [0, {w.n_inputs})")
        return w, [args.channel]
    if args.p_a is None:
        raise UsageError(f"--kind {args.kind} needs --channel or --p-a")
    from .channels import bsc

    return bsc(args.p_a), []


def cmd_bound(args) -> int:
    inputs: list = []
    if args.kind == "wiretap2":
        _require(args, "ell", "q", "k")
        rep = wiretap2_bound(args.ell, args.q, args.k)
    elif args.kind == "simple":
        _require(args, "ell", "k", "n")
        if args.channel is None:
            _require(args, "p_a")
            rep = bsc_simple_bound(args.ell, args.k, args.n, args.p_a)
        else:
            w, inputs = _channel_row(args)
            if w.n_outputs**args.n > MAX_OUTCOMES:
                raise UsageError(f"|Z|^n exceeds the enumeration cap {MAX_OUTCOMES}")
            cond = product_output_dist([w] * args.n, np.full(args.n, args.input))
            rep = simple_bound(args.ell, cond, w.n_inputs**args.k, w.n_outputs, args.n)
    elif args.kind == "bsc-smoothed":
        _require(args, "ell", "k", "n", "p_a")
        if not 0 < args.p_a < 0.5:
            raise UsageError("--p-a must lie in (0, 1/2)")
        if args.auto_delta:
            res = optimize_delta(
                lambda d: bsc_smoothed_bound(args.ell, args.k, args.n, args.p_a, d).epsilon_rm,
                args.p_a * 1e-9, args.p_a * (1 - 1e-9),
            )
            rep = bsc_smoothed_bound(args.ell, args.k, args.n, args.p_a, res.delta)
            rep.params["delta_flat"] = res.constant
        else:
            _require(args, "delta")
            rep = bsc_smoothed_bound(args.ell, args.k, args.n, args.p_a, args.delta)
    elif args.kind == "aep":
        _require(args, "ell", "k", "n")
        w, inputs = _channel_row(args)
        row = w.entries[args.input]
        h = entropy_stats(row).entropy
        if args.auto_delta or args.delta is None:
            if h == 0:
                raise UsageError("the channel output is deterministic; the AEP bound needs entropy")
            res = optimize_delta(lambda d: aep_iid_bound(args.ell, args.k, args.n, row, d).epsilon_rm, h * 1e-6, h)
            delta = res.delta
        else:
            delta = args.delta
        rep = aep_iid_bound(args.ell, args.k, args.n, row, delta, p=w.n_inputs)
    else:  # argparse restricts choices
        raise UsageError(f"unknown kind {args.kind}")
    _emit_json(args, {"bound": rep.to_json()}, _manifest(args, inputs))
    return EXIT_OK


# simulate


def cmd_simulate(args) -> int:
    cfg = load_scheme(args.config)
    rng = np.random.default_rng(args.seed)
    trials = run_seeded_trials(cfg, args.trials, rng)
    payload = {"correctness": trials.to_json(), "rate": cfg.rate}
    if cfg.code.size <= 1 << 12 and all(w.n_outputs == cfg.code.p for w in cfg.receiver) and cfg.code.p**cfg.code.n <= MAX_OUTCOMES:
        avg, worst = exact_decoding_error(cfg.code, cfg.receiver)
        payload["exact_block_error"] = {"average": avg, "worst": worst}
    if args.exact:
        if cfg.adversary is None:
            raise UsageError("--exact needs an adversary in the scheme config")
        sec = exact_secrecy(cfg)
        payload["secrecy"] = sec.to_json()
        payload["secrecy"]["worst_strategy"] = sec.worst_rm_strategy
    _emit_json(args, payload, _manifest(args, [args.config], args.seed))
    return EXIT_OK


# verify


def cmd_verify(args) -> int:
    results = run_suites(args.scale, mutate_inverter=args.mutate_inverter)
    for r in results:
        print(r.line())
    failed = [r for r in results if not r.passed]
    if args.json:
        Path(args.json).write_text(_dump({"suites": [r.to_json() for r in results], "manifest": _manifest(args)}))
    for r in failed:
        print(f"counterexample in {r.name}: {r.witness!r}", file=sys.stderr)
    return EXIT_FAIL if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wiretap", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("curve", help="secure message length against block length (CSV)")
    c.add_argument("--p-r", type=_probability("--p-r"), required=True, help="receiver BSC crossover")
    c.add_argument("--p-a", type=_probability("--p-a"), required=True, help="adversary BSC crossover")
    c.add_argument("--eps", type=float, default=1e-2)
    c.add_argument("--n-min", type=int, default=10)
    c.add_argument("--n-max", type=int, default=10**6)
    c.add_argument("--n-steps", type=int, default=50)
    c.add_argument("--bounds", default="simple,smoothed,aep,capacity")
    c.add_argument("--out")
    c.add_argument("--threads", type=int, default=_default_threads())
    c.set_defaults(func=cmd_curve)

    b = sub.add_parser("bound", help="evaluate one secrecy bound (JSON)")
    b.add_argument("--kind", choices=["simple", "wiretap2", "bsc-smoothed", "aep"], required=True)
    b.add_argument("--ell", type=int)
    b.add_argument("--k", type=int)
    b.add_argument("--n", type=int)
    b.add_argument("--q", type=int)
    b.add_argument("--p-a", type=_probability("--p-a"))
    b.add_argument("--delta", type=float)
    b.add_argument("--auto-delta", action="store_true")
    b.add_argument("--channel", help="transition matrix JSON for one channel use")
    b.add_argument("--input", type=int, default=0, help="input symbol whose output row is used")
    b.add_argument("--out")
    b.set_defaults(func=cmd_bound)

    s = sub.add_parser("simulate", help="run a scheme config (JSON)")
    s.add_argument("--config", required=True)
    s.add_argument("--trials", type=int, default=10_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--exact", action="store_true", help="also compute exact secrecy")
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser("verify", help="run the exhaustive invariant suites")
    v.add_argument("--scale", choices=sorted(SCALES), default="small")
    v.add_argument("--json", help="also write the results as JSON")
    v.add_argument("--mutate-inverter", action="store_true", help=argparse.SUPPRESS)
    v.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "trials", 1) is not None and getattr(args, "trials", 1) < 1:
        parser.print_usage(sys.stderr)
        print("wiretap: error: --trials must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, ValueError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"wiretap {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
