"""Registry of reproducible numerical cases.

Each case is a function ``run(ctx) -> CaseResult`` that builds everything
from ``ctx.seed`` alone, writes its trace as ``<id>.csv`` and returns a
PASS/FAIL verdict with a one-line detail.  Floats are written with ``repr``
so reruns are byte-identical.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import permutations
from pathlib import Path
from typing import Callable

import numpy as np

from .multilinear import (MultilinearOp, divergence_probe, permute, rank_one_bilinear, summing_ratio,
                          symmetrize, transpose)
from .optimize import restart_rng
from .seqclasses import (Constant, FiniteSeq, LInfSup, LpAbs, LpWeak, Rad, ScaledPattern, U, UnitVectors,
                         class_norm, cohen_norm_result, dual_norm_result, fd_norm, u_tail_trace)
from .spaces import INF, Space


@dataclass(frozen=True)
class Context:
    seed: int = 0
    tol: float = 1e-12
    budget: int = 200
    kmax: int = 4096


@dataclass
class CaseResult:
    id: str
    passed: bool
    detail: str
    csv: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.id}: {self.detail}"


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def harmonic(k: int) -> float:
    return math.fsum(1.0 / j for j in range(1, k + 1))


def root_inverse_squares(k: int) -> float:
    return math.sqrt(math.fsum(1.0 / (j * j) for j in range(1, k + 1)))


# --------------------------------------------------------------------------
# cases

def case_ex36(ctx: Context) -> CaseResult:
    """A(x, y) = e_1*(x) y on l_inf^K, weak l1 x weak l2 -> l1, witnesses
    (e_j) and (e_1 / j); the transpose grows like log k, A stays bounded."""
    E = Space(ctx.kmax, INF)
    A = rank_one_bilinear(E.dual().basis(0))
    fams = [UnitVectors(ctx.kmax), ScaledPattern(1, E.basis(0))]
    classes, Y = [LpWeak(1), LpWeak(2)], LpAbs(1)
    rows, dev = [], 0.0
    pt = divergence_probe(transpose(A), classes, Y, fams, ctx.kmax)
    for (k, rho), norms in zip(pt.trace, pt.witness_norms):
        formula = harmonic(k) / root_inverse_squares(k)
        dev = max(dev, abs(rho - formula) / formula)
        rows.append(("A^t", k, rho, norms[0], norms[1], formula))
    pa = divergence_probe(A, classes, Y, fams, ctx.kmax)
    for (k, rho), norms in zip(pa.trace, pa.witness_norms):
        rows.append(("A", k, rho, norms[0], norms[1], 1.0 / root_inverse_squares(k)))
    bounded = max(pa.values()) <= 1.0 + 1e-12
    ok = pt.verdict == "diverging" and dev <= 1e-9 and bounded
    detail = (f"A^t {pt.verdict} (rho_{pt.trace[-1][0]}/rho_{pt.trace[0][0]} = {pt.growth:.4f}, "
              f"formula dev {dev:.1e}); A {pa.verdict}, max rho {max(pa.values()):.6f}")
    return CaseResult("ex36", ok, detail, _csv(["operator", "k", "rho", "norm_x1", "norm_x2", "formula"], rows))


def case_p34(ctx: Context) -> CaseResult:
    """A(x, y) = e_1*(x) y, slots weak l1 x linf -> l1, witnesses (e_j) and
    the constant e_1; A^t(e_j, e_1) = e_j so rho_k = k."""
    E = Space(ctx.kmax, INF)
    A = rank_one_bilinear(E.dual().basis(0))
    fams = [UnitVectors(ctx.kmax), Constant(E.basis(0))]
    pt = divergence_probe(transpose(A), [LpWeak(1), LInfSup()], LpAbs(1), fams, ctx.kmax)
    rows, dev = [], 0.0
    for (k, rho), norms in zip(pt.trace, pt.witness_norms):
        dev = max(dev, abs(rho - k) / k)
        rows.append((k, rho, norms[0], norms[1], float(k)))
    ok = pt.verdict == "diverging" and dev <= 1e-12
    detail = f"A^t {pt.verdict}, rho_{pt.trace[-1][0]} = {pt.trace[-1][1]!r}, formula dev {dev:.1e}"
    return CaseResult("p34", ok, detail, _csv(["k", "rho", "norm_x1", "norm_x2", "formula"], rows))


def case_radlemma(ctx: Context) -> CaseResult:
    """Zero insertion leaves the Rad norm unchanged; dropping an item never raises it."""
    rows, worst_ins, worst_drop = [], 0.0, 0.0
    for i in range(ctx.budget):
        rng = restart_rng(ctx.seed, i)
        d = int(rng.integers(1, 7))
        k = int(rng.integers(1, 11))
        s = FiniteSeq(Space(d, [1, 2, 3, INF][int(rng.integers(4))]), rng.standard_normal((k, d)))
        base = class_norm(Rad(), s)
        pos = int(rng.integers(k + 1))
        ins = class_norm(Rad(), s.insert_zero(pos))
        drop_at = int(rng.integers(k))
        dropped = class_norm(Rad(), s.drop(drop_at))
        worst_ins = max(worst_ins, abs(ins - base))
        worst_drop = max(worst_drop, dropped - base)
        rows.append((i, str(s.space), k, base, pos, ins, drop_at, dropped))
    ok = worst_ins <= ctx.tol and worst_drop <= ctx.tol
    detail = f"max |insert - base| = {worst_ins:.1e}, max (drop - base)_+ = {max(worst_drop, 0.0):.1e}"
    header = ["sample", "space", "k", "rad", "insert_at", "rad_inserted", "drop_at", "rad_dropped"]
    return CaseResult("radlemma", ok, detail, _csv(header, rows))


def _fd_subjects():
    return [
        (LpAbs(1), (1, 2, INF)), (LpAbs(2), (1, 2, INF)), (LInfSup(), (1, 2, INF)),
        (LpWeak(2), (2,)), (LpWeak(1), (1,)), (LpWeak(3), (INF,)), (Rad(), (1, 2, INF)),
    ]


def case_fdprefix(ctx: Context) -> CaseResult:
    """fd_norm = class_norm for finitely shrinking classes (exact backends)."""
    rows, worst = [], 0.0
    subjects = _fd_subjects()
    for i in range(ctx.budget):
        rng = restart_rng(ctx.seed, i)
        X, exps = subjects[i % len(subjects)]
        E = Space(int(rng.integers(1, 4)), exps[int(rng.integers(len(exps)))])
        s = FiniteSeq(E, rng.standard_normal((int(rng.integers(1, 8)), E.dim)))
        a, b = fd_norm(X, s), class_norm(X, s)
        worst = max(worst, abs(a - b))
        rows.append((i, str(X), str(E), len(s), a, b, abs(a - b)))
    ok = worst <= ctx.tol
    return CaseResult("fdprefix", ok, f"max |fd - X| = {worst:.1e} over {ctx.budget} samples",
                      _csv(["sample", "class", "space", "k", "fd", "norm", "deviation"], rows))


def _oracle():
    try:
        from .oracles import cohen_projective
    except ImportError:  # pragma: no cover
        return None
    try:
        import cvxpy  # noqa: F401
    except ImportError:
        return None
    return cohen_projective


def case_dualcohen(ctx: Context) -> CaseResult:
    """dual_norm over the weak-2 ball vs the Cohen 2-norm on Euclidean samples,
    plus the projective-norm oracle on d <= 2, k <= 3."""
    oracle = _oracle()
    n = max(4, ctx.budget // 25)
    rows, worst_rel, worst_orc = [], 0.0, 0.0
    for i in range(n):
        rng = restart_rng(ctx.seed, i)
        tiny = i % 2 == 0
        d = int(rng.integers(1, 3 if tiny else 4))
        k = int(rng.integers(1, 4 if tiny else 5))
        s = FiniteSeq(Space(d, 2), rng.standard_normal((k, d)))
        c = cohen_norm_result(s, 2)
        cut = cohen_norm_result(s, 2, backend="cutting")
        dv = dual_norm_result(LpWeak(2), s, seed=ctx.seed).value
        rel = abs(dv - c.value) / c.value
        worst_rel = max(worst_rel, rel)
        o = float("nan")
        if tiny and oracle is not None:
            o = oracle(s.items, s.space, 2)
            worst_orc = max(worst_orc, abs(dv - o), abs(cut.value - o))
        rows.append((i, d, k, c.value, cut.value, dv, o, rel))
    ok = worst_rel <= 0.05 and worst_orc <= 1e-3
    detail = f"max rel |dual - cohen| = {worst_rel:.1e}"
    detail += f", max |. - oracle| = {worst_orc:.1e}" if oracle else ", oracle skipped (cvxpy missing)"
    return CaseResult("dualcohen", ok, detail,
                      _csv(["sample", "d", "k", "cohen_nuclear", "cohen_cutting", "dual_weak", "oracle",
                            "rel_dev"], rows))


def _ratio_trace(T, X, Y, s):
    return [(k, summing_ratio(T, [X], Y, [s], k)) for k in range(1, len(s) + 1)]


def case_ucoincide(ctx: Context) -> CaseResult:
    """Prefix-ratio traces of a linear map under X and X^u agree exactly."""
    rng = restart_rng(ctx.seed, 0)
    E = Space(3, 2)
    T = MultilinearOp((E,), E, rng.standard_normal((3, 3)))
    s = FiniteSeq(E, rng.standard_normal((12, 3)))
    traces = {}
    for X in (LpWeak(1), U(LpWeak(1))):
        traces[str(X)] = _csv(["k", "rho"], _ratio_trace(T, X, LpAbs(1), s))
    a, b = traces.values()
    ok = a == b
    rows = [(name, k, rho) for name, X in (("X", LpWeak(1)), ("X^u", U(LpWeak(1))))
            for k, rho in _ratio_trace(T, X, LpAbs(1), s)]
    return CaseResult("ucoincide", ok, "traces identical" if ok else "traces differ",
                      _csv(["class", "k", "rho"], rows))


def case_symavg(ctx: Context) -> CaseResult:
    """rho_k(A_s; W) <= max_sigma rho_k(A o sigma; W) for equal classes."""
    rows, violations, worst = [], 0, -math.inf
    subjects = [(LpAbs(2), 2), (LpWeak(2), 2), (LInfSup(), INF), (Rad(), 1), (LpAbs(1), 3)]
    for i in range(ctx.budget):
        rng = restart_rng(ctx.seed, i)
        n = 2 + int(rng.integers(2))
        X, p = subjects[i % len(subjects)]
        E = Space(int(rng.integers(1, 4)), p)
        F = Space(int(rng.integers(1, 4)), 2)
        A = MultilinearOp((E,) * n, F, rng.standard_normal((E.dim,) * n + (F.dim,)))
        Y = LpAbs(1 + int(rng.integers(2)))
        k = int(rng.integers(1, 6))
        W = [FiniteSeq(E, rng.standard_normal((k, E.dim))) for _ in range(n)]
        lhs = summing_ratio(symmetrize(A), [X] * n, Y, W)
        rhs = max(summing_ratio(permute(A, sg), [X] * n, Y, W) for sg in permutations(range(n)))
        slack = lhs - rhs
        worst = max(worst, slack)
        violations += slack > 1e-9
        rows.append((i, n, str(X), str(E), str(Y), k, lhs, rhs, slack))
    ok = violations == 0
    return CaseResult("symavg", ok, f"{violations} violations in {ctx.budget}, max slack {worst:.3e}",
                      _csv(["sample", "n", "class", "space", "Y", "k", "rho_sym", "max_perm", "slack"], rows))


def case_radtail(ctx: Context) -> CaseResult:
    """Rad tail traces: j^-2 e_1 has vanishing tails, unit vectors do not."""
    N = 16
    E = Space(N, INF)
    decaying = u_tail_trace(Rad(), ScaledPattern(2, E.basis(0)), N)
    units = u_tail_trace(Rad(), UnitVectors(N), N)
    rows = [(name, n, v) for name, tr in (("scaled", decaying), ("unit", units)) for n, v in tr.points]
    ok = decaying.verdict == "tail->0 evidence" and units.verdict == "non-null tail evidence"
    return CaseResult("radtail", ok, f"scaled: {decaying.verdict}; unit vectors: {units.verdict}",
                      _csv(["family", "n", "tail_norm"], rows))


REGISTRY: dict[str, Callable[[Context], CaseResult]] = {
    "ex36": case_ex36,
    "p34": case_p34,
    "radlemma": case_radlemma,
    "fdprefix": case_fdprefix,
    "dualcohen": case_dualcohen,
    "ucoincide": case_ucoincide,
    "symavg": case_symavg,
    "radtail": case_radtail,
}


def run_case(case_id: str, ctx: Context) -> CaseResult:
    if case_id not in REGISTRY:
        raise KeyError(f"unknown repro case {case_id!r}; known: {', '.join(REGISTRY)}")
    return REGISTRY[case_id](ctx)


def _run_one(args):
    return run_case(*args)


def run_cases(ids, ctx: Context, outdir, parallel: bool = False) -> list:
    """Run cases, write ``<id>.csv`` and ``summary.txt`` under ``outdir``."""
    if isinstance(ids, str):
        ids = [ids]
    ids = list(REGISTRY) if list(ids) == ["all"] else list(ids)
    for i in ids:
        if i not in REGISTRY:
            raise KeyError(f"unknown repro case {i!r}; known: {', '.join(REGISTRY)}")
    if parallel and len(ids) > 1:
        with ProcessPoolExecutor() as ex:
            results = list(ex.map(_run_one, [(i, ctx) for i in ids]))
    else:
        results = [run_case(i, ctx) for i in ids]
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    for r in results:
        (out / f"{r.id}.csv").write_text(r.csv)
    header = f"# seqsum repro seed={ctx.seed} tol={ctx.tol!r} budget={ctx.budget} kmax={ctx.kmax}"
    (out / "summary.txt").write_text("\n".join([header] + [r.line() for r in results]) + "\n")
    return results
