"""Command-line entry point.

Exit codes: 0 success / feasible, 1 infeasible or failed check, 2 usage,
parse, domain or budget error.  Human-readable tables and machine-readable
``key,index,field,value`` lines both go to stdout; timings go to stderr so
stdout is reproducible for a fixed command line and seed.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Sequence

from . import extremal
from .allocator import DEFAULT_NODE_BUDGET, feasibility_report
from .errors import DomainError, FairShareError, InstanceFormatError
from .instance import Instance, parse_instance
from .model import members
from .repro import CASES, run_case
from .shares import (
    ShareValue,
    compute_share,
    exact_distribution,
    mc_quantile_bracket,
    mms,
    rmms,
    thinning_budget,
)
from .verify import SUITES, run_suite


def fmt(x: float) -> str:
    x = float(x)
    return str(int(x)) if x.is_integer() else repr(x)


def fmt_bundle(mask: int) -> str:
    return " ".join(str(g) for g in members(mask))


def _load(path: str) -> Instance:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InstanceFormatError(f"cannot read {path}: {exc.strerror}") from None
    return parse_instance(text)


def _threads(args: argparse.Namespace) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    try:
        return max(1, int(os.environ.get("FAIRSHARE_THREADS", "1")))
    except ValueError:
        return 1


def _print_shares(label: str, shares: Sequence[ShareValue]) -> None:
    print(f"{'agent':<6} {label}")
    for i, s in enumerate(shares, 1):
        print(f"{i:<6} {fmt(s.value)}")
    for i, s in enumerate(shares, 1):
        print(f"agent,{i},{label},{fmt(s.value)}")


def _quantile_spec(inst: Instance):
    if inst.share.kind != "thinned_quantile":
        raise DomainError(f"Monte Carlo brackets apply to thinned quantile shares, not {inst.share.kind!r}")
    return inst.share


def _print_brackets(inst: Instance, epsilon: float, delta: float, seed: int, threads: int) -> None:
    spec = _quantile_spec(inst)
    brackets = [
        mc_quantile_bracket(v, inst.n, spec.c, spec.q, epsilon, delta, seed, threads) for v in inst.valuations
    ]
    print(f"{'agent':<6} {'lo':<12} {'hi':<12} samples")
    for i, b in enumerate(brackets, 1):
        print(f"{i:<6} {fmt(b.lo):<12} {fmt(b.hi):<12} {b.samples}")
    for i, b in enumerate(brackets, 1):
        print(f"agent,{i},share_lo,{fmt(b.lo)}")
        print(f"agent,{i},share_hi,{fmt(b.hi)}")
    print(f"mc,0,samples,{brackets[0].samples}")
    print(f"mc,0,seed,{seed}")


def cmd_share(args: argparse.Namespace) -> int:
    inst = _load(args.instance)
    if args.mc is not None:
        if len(args.mc) not in (2, 3):
            raise DomainError("--mc takes EPSILON DELTA [SEED]")
        seed = int(args.mc[2]) if len(args.mc) == 3 else args.seed
        _print_brackets(inst, float(args.mc[0]), float(args.mc[1]), seed, _threads(args))
        return 0
    _print_shares("share", [compute_share(v, inst.n, inst.share) for v in inst.valuations])
    return 0


def cmd_mc(args: argparse.Namespace) -> int:
    inst = _load(args.instance)
    _print_brackets(inst, args.epsilon, args.delta, args.seed, _threads(args))
    return 0


def cmd_allocate(args: argparse.Namespace) -> int:
    inst = _load(args.instance)
    rep = feasibility_report(inst, args.budget)
    _print_shares("share", rep.shares)
    print(f"search,0,nodes,{rep.nodes_explored}")
    print(f"elapsed {rep.elapsed:.3f}s", file=sys.stderr)
    if rep.allocation is None:
        print("INFEASIBLE")
        print("result,0,status,INFEASIBLE")
        return 1
    print("FEASIBLE")
    print(f"{'agent':<6} {'value':<10} bundle")
    for i, (v, b) in enumerate(zip(inst.valuations, rep.allocation.bundles), 1):
        print(f"{i:<6} {fmt(v.value(b)):<10} {{{fmt_bundle(b)}}}")
    print("result,0,status,FEASIBLE")
    for i, b in enumerate(rep.allocation.bundles, 1):
        print(f"agent,{i},bundle,{fmt_bundle(b)}")
    return 0


def cmd_dist(args: argparse.Namespace) -> int:
    inst = _load(args.instance)
    if not 1 <= args.agent <= inst.n:
        raise DomainError(f"agent must lie in [1, {inst.n}], got {args.agent}")
    if args.p is not None:
        p = args.p
    elif inst.share.kind == "thinned_quantile":
        p = inst.share.c / inst.n
    else:
        p = 1.0 / inst.n
    sys.stdout.write(exact_distribution(inst.valuations[args.agent - 1], p).to_csv())
    return 0


def cmd_mms(args: argparse.Namespace) -> int:
    inst = _load(args.instance)
    _print_shares("mms", [mms(v, inst.n) for v in inst.valuations])
    return 0


def cmd_rmms(args: argparse.Namespace) -> int:
    inst = _load(args.instance)
    _print_shares("rmms", [rmms(v, inst.n) for v in inst.valuations])
    return 0


def cmd_thinning(args: argparse.Namespace) -> int:
    b = thinning_budget(args.n, args.c)
    print(f"n={b.n} c_max={b.c_max:.6g} c={b.c:.6g} q_c={b.q_c:.12g} fallback_c={b.fallback_c}")
    for key in ("c_max", "c", "q_c", "fallback_c"):
        print(f"thinning,{b.n},{key},{getattr(b, key)!r}")
    return 0


def _params(tokens: Sequence[str], names: Sequence[str]) -> dict[str, int]:
    """Accept ``2 2 5`` or ``n=2 k=2 M=5``."""
    out: dict[str, int] = {}
    positional = [t for t in tokens if "=" not in t]
    for t in tokens:
        if "=" in t:
            key, val = t.split("=", 1)
            if key not in names:
                raise InstanceFormatError(f"unknown parameter {key!r}; expected {', '.join(names)}")
            out[key] = val  # type: ignore[assignment]
    for name in names:
        if name not in out and positional:
            out[name] = positional.pop(0)  # type: ignore[assignment]
    if positional or set(out) != set(names):
        raise InstanceFormatError(f"expected parameters {' '.join(names)}")
    try:
        return {k: int(v) for k, v in out.items()}
    except ValueError:
        raise InstanceFormatError("parameters must be integers") from None


def cmd_extremal(args: argparse.Namespace) -> int:
    what, rest = args.what, args.args
    if what == "shadow":
        if not rest:
            raise InstanceFormatError("shadow needs a family literal and a level t")
        fams = extremal.parse_families(rest[0])
        t = _params(rest[1:], ["t"])["t"]
        for i, F in enumerate(fams, 1):
            sh = extremal.shadow(F, t)
            print(extremal.format_family(sh))
            print(f"family,{i},shadow_size,{len(sh)}")
            print(f"family,{i},kk_bound,{fmt(extremal.kk_lower_bound(len(F), F.k, t)) if len(F) else 0}")
        return 0
    if what == "bound":
        p = _params(rest, ["n", "k", "M"])
        print(extremal.emc_bound(p["n"], p["k"], p["M"]))
        return 0
    if what == "cross":
        if len(rest) != 1:
            raise InstanceFormatError("cross needs exactly one family literal")
        fams = extremal.parse_families(rest[0])
        check = extremal.is_cross_dependent(fams, args.budget or extremal.DEFAULT_CROSS_BUDGET)
        if check.dependent:
            print("CROSS-DEPENDENT")
        else:
            print("NOT CROSS-DEPENDENT")
            print("witness " + ";".join(extremal.format_set(s) for s in check.witness))
        return 0
    p = _params(rest, ["n", "k", "M"])
    best = extremal.max_min_cross_dependent(p["n"], p["k"], p["M"], args.budget or extremal.DEFAULT_MAXMIN_BUDGET)
    print(best)
    print(f"maxmin,0,emc_bound,{extremal.emc_bound(p['n'], p['k'], p['M'])}")
    return 0


def cmd_repro(args: argparse.Namespace) -> int:
    ids = list(CASES) if args.case == "all" else [args.case]
    if any(i not in CASES for i in ids):
        raise InstanceFormatError(f"unknown repro case {args.case!r}; known: {', '.join(CASES)}, all")
    ok = True
    for case_id in ids:
        case = run_case(case_id)
        ok &= case.passed
        print(f"[{'PASS' if case.passed else 'FAIL'}] {case.id}: {case.description}")
        for key in case.expected:
            print(f"    {key}: expected {case.expected[key]!r}, actual {case.actual.get(key)!r}")
        print(f"repro,{case.id},status,{'pass' if case.passed else 'fail'}")
    return 0 if ok else 1


def cmd_verify(args: argparse.Namespace) -> int:
    if args.suite not in SUITES:
        raise InstanceFormatError(f"unknown suite {args.suite!r}; known: {', '.join(SUITES)}")
    rep = run_suite(args.suite, seed=args.seed, cases=args.cases, budget=args.budget)
    print(f"[{'PASS' if rep.passed else 'FAIL'}] {rep.suite}: {rep.cases} checks, {rep.failures} failures, seed {rep.seed}")
    for note in rep.notes:
        print(f"    {note}")
    print(f"suite,{rep.suite},cases,{rep.cases}")
    print(f"suite,{rep.suite},failures,{rep.failures}")
    print(f"suite,{rep.suite},seed,{rep.seed}")
    print(f"wall time {rep.wall_time:.2f}s", file=sys.stderr)
    return 0 if rep.passed else 1


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # exit code 2 with a one-line message
        self.print_usage(sys.stderr)
        raise SystemExit(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="RNG seed (unsigned 64-bit)")
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker threads (env FAIRSHARE_THREADS)")
    common.add_argument("--budget", type=int, default=argparse.SUPPRESS, help="search node budget")

    parser = _Parser(prog="fairshare", description="Fair-division share benchmarks and extremal set-theory checks.")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=None)
    parser.add_argument("--budget", type=int, default=None)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("share", parents=[common], help="per-agent shares of an instance")
    p.add_argument("instance")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", help="exact computation (default)")
    mode.add_argument("--mc", nargs="+", metavar="X", help="EPSILON DELTA [SEED]: Monte Carlo brackets")
    p.set_defaults(func=cmd_share)

    p = sub.add_parser("allocate", parents=[common], help="shares plus a fair allocation or INFEASIBLE")
    p.add_argument("instance")
    p.set_defaults(func=cmd_allocate)

    p = sub.add_parser("dist", parents=[common], help="CSV of the exact value distribution")
    p.add_argument("instance")
    p.add_argument("--agent", type=int, default=1)
    p.add_argument("--p", type=float, default=None, help="inclusion probability (default c/n)")
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("mc", parents=[common], help="Monte Carlo quantile brackets")
    p.add_argument("instance")
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--delta", type=float, default=0.001)
    p.set_defaults(func=cmd_mc)

    for name, func in (("mms", cmd_mms), ("rmms", cmd_rmms)):
        p = sub.add_parser(name, parents=[common], help=f"per-agent {name.upper()}")
        p.add_argument("instance")
        p.set_defaults(func=func)

    p = sub.add_parser("thinning", parents=[common], help="feasible thinning constants for n agents")
    p.add_argument("n", type=int)
    p.add_argument("--c", type=float, default=None)
    p.set_defaults(func=cmd_thinning)

    p = sub.add_parser("extremal", parents=[common], help="shadows, EMC bound, cross-dependence, max-min search")
    p.add_argument("what", choices=["shadow", "bound", "cross", "maxmin"])
    p.add_argument("args", nargs="*")
    p.set_defaults(func=cmd_extremal)

    p = sub.add_parser("repro", parents=[common], help="run a scripted worked example")
    p.add_argument("case", help=f"one of: {', '.join(CASES)}, all")
    p.set_defaults(func=cmd_repro)

    p = sub.add_parser("verify", parents=[common], help="run a seeded property suite")
    p.add_argument("suite", help=f"one of: {', '.join(SUITES)}")
    p.add_argument("--cases", type=int, default=None, help="override the suite's case count")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code in (0, None):
            return 0
        if isinstance(exc.code, str):
            print(exc.code, file=sys.stderr)
        return 2
    if args.budget is not None and args.budget < 1:
        print("fairshare: error: --budget must be positive", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except FairShareError as exc:
        print(f"fairshare: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # keep the exit-code contract total
        print(f"fairshare: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
