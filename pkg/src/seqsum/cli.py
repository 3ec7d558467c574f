"""Command-line front end.

Subcommands::

    seqsum norm CLASS SPACE SEQFILE      evaluate a class norm
    seqsum check PROPERTY CLASS...       falsify a class property
    seqsum search OPFILE                 lower-bound a summing norm
    seqsum repro ID|all                  run reproduction cases

Exit codes: 0 success / no counterexample / PASS, 2 counterexample or FAIL,
1 usage or runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import numpy as np

from .errors import SeqSumError
from .multilinear import MultilinearOp, lower_bound_search
from .propcheck import (CHECKERS, SamplerConfig, check_scalar_condition, fin_leq_falsify)
from .repro import REGISTRY, Context, run_cases
from .seqclasses import FiniteSeq, parse_class
from .spaces import Space, parse_exponent

DEFAULTS = dict(seed=0, tol=None, budget=None, kmax=4096)


def _global_flags(parser, suppress: bool):
    kw = dict(default=argparse.SUPPRESS) if suppress else {}
    parser.add_argument("--seed", type=int, help="base seed (default 0)", **kw)
    parser.add_argument("--tol", type=float, help="tolerance override", **kw)
    parser.add_argument("--budget", type=int, help="sample / evaluation budget", **kw)
    parser.add_argument("--kmax", type=int, help="largest prefix length for probes (default 4096)", **kw)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="seqsum", description="Sequence-class norms and summing-operator probes.")
    _global_flags(p, suppress=False)
    p.set_defaults(**DEFAULTS)
    sub = p.add_subparsers(dest="command", required=True)

    n = sub.add_parser("norm", help="evaluate a class norm of a sequence file")
    _global_flags(n, suppress=True)
    n.add_argument("cls", help="class spec, e.g. lp:2, lpw:2, rad, fd(lpw:2)")
    n.add_argument("space", help="space literal lp:<p>:<d> (overrides the file's space)")
    n.add_argument("seqfile", help='JSON file {"space": ..., "items": [[...], ...]}')

    c = sub.add_parser("check", help="falsify a property on random samples")
    _global_flags(c, suppress=True)
    c.add_argument("property", choices=sorted(CHECKERS) + ["scalar", "finleq"])
    c.add_argument("classes", nargs="+",
                   help="one class; for scalar X1 .. Xn Y; for finleq X Y")
    c.add_argument("--samples", type=int, default=None, help="number of samples (default: budget or 200)")
    c.add_argument("--dims", default="1,2,3")
    c.add_argument("--exponents", default="1,3/2,2,3,inf")
    c.add_argument("--lengths", default="1,6", help="min,max sequence length")
    c.add_argument("--json", action="store_true", help="print only the machine-readable report")

    s = sub.add_parser("search", help="adversarial lower bound for a summing norm")
    _global_flags(s, suppress=True)
    s.add_argument("opfile", help="operator JSON file")
    s.add_argument("--classes", required=True, help="comma-separated input classes, one per slot")
    s.add_argument("--target", required=True, help="output class Y")
    s.add_argument("--ks", default="1,2,4", help="comma-separated prefix lengths")
    s.add_argument("--restarts", type=int, default=64)
    s.add_argument("--witness-out", default=None, help="write the best witnesses as JSON")

    r = sub.add_parser("repro", help="run reproduction cases")
    _global_flags(r, suppress=True)
    r.add_argument("id", choices=list(REGISTRY) + ["all"])
    r.add_argument("--outdir", default="repro_out")
    r.add_argument("--parallel", action="store_true", help="run cases in worker processes")
    return p


def _split_classes(text: str) -> list:
    """Split on top-level commas so ``fd(lp:2),lpw:2`` gives two specs."""
    out, depth, cur = [], 0, ""
    for ch in text:
        if ch == "," and depth == 0:
            out.append(cur)
            cur = ""
            continue
        depth += ch == "("
        depth -= ch == ")"
        cur += ch
    out.append(cur)
    return [parse_class(t) for t in out if t.strip()]


def cmd_norm(a) -> int:
    X = parse_class(a.cls)
    E = Space.parse(a.space)
    s = FiniteSeq.load(a.seqfile, space=E)
    r = X.evaluate(s)
    print(f"value: {r.value!r}")
    print(f"backend: {r.backend} ({'exact' if r.exact else 'lower bound'})")
    if r.upper is not None:
        print(f"upper: {r.upper!r}")
    if r.certificate is not None:
        print(f"certificate: {json.dumps(np.asarray(r.certificate).tolist())}")
    return 0


def cmd_check(a) -> int:
    samples = a.samples or a.budget or 200
    cfg = SamplerConfig(
        dims=tuple(int(d) for d in a.dims.split(",")),
        exponents=tuple(parse_exponent(e) for e in a.exponents.split(",")),
        lengths=tuple(int(v) for v in a.lengths.split(",")),
        samples=samples, seed=a.seed, tol=a.tol,
    )
    classes = [parse_class(t) for t in a.classes]
    if a.property == "scalar":
        if len(classes) < 2:
            raise SeqSumError("scalar needs X1 .. Xn Y")
        rep = check_scalar_condition(classes[:-1], classes[-1], cfg)
    elif a.property == "finleq":
        if len(classes) != 2:
            raise SeqSumError("finleq needs exactly two classes X Y")
        rep = fin_leq_falsify(classes[0], classes[1], cfg)
    else:
        if len(classes) != 1:
            raise SeqSumError(f"{a.property} takes exactly one class")
        rep = CHECKERS[a.property](classes[0], cfg)
    if not a.json:
        print(rep.summary())
    print(rep.to_json())
    return 2 if rep.found else 0


def cmd_search(a) -> int:
    A = MultilinearOp.load(a.opfile)
    classes = _split_classes(a.classes)
    Y = parse_class(a.target)
    ks = tuple(int(k) for k in a.ks.split(","))
    est = lower_bound_search(A, classes, Y, budget=a.budget or 2000, ks=ks, restarts=a.restarts, seed=a.seed)
    print(f"lower bound: {est.value!r}")
    for k, rho in est.trace:
        print(f"k={k} rho={rho!r}")
    if a.witness_out:
        with open(a.witness_out, "w") as fh:
            json.dump([w.to_dict() for w in est.witness], fh)
    return 0


def cmd_repro(a) -> int:
    ctx = Context(seed=a.seed, tol=1e-12 if a.tol is None else a.tol, budget=a.budget or 200, kmax=a.kmax)
    results = run_cases(a.id, ctx, a.outdir, parallel=a.parallel)
    print(f"# seqsum repro seed={ctx.seed} tol={ctx.tol!r} budget={ctx.budget} kmax={ctx.kmax}")
    for r in results:
        print(r.line())
    return 0 if all(r.passed for r in results) else 2


COMMANDS = {"norm": cmd_norm, "check": cmd_check, "search": cmd_search, "repro": cmd_repro}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        return COMMANDS[a.command](a)
    except (SeqSumError, OSError, KeyError, ValueError) as exc:
        print(f"seqsum: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
