"""Randomized falsifiers for sequence-class properties.

Each checker draws samples from a :class:`SamplerConfig`, evaluates both
sides of an inequality (or an equality, as ``|a - b| <= 0``) and stops at the
first violation beyond tolerance.  A clean run is reported as
"no-counterexample": bounded random search cannot prove a universal
statement.

Tolerances: ``cfg.tol`` when given, otherwise 1e-12 when every evaluation is
exact and 1e-6 when an optimized (lower-bound) backend is involved; the test
is ``lhs > rhs + tol * max(1, |rhs|)``.  In the inequality checkers the
optimized value appears on both sides, so an under-estimated right-hand side
is the only possible source of a false alarm; the looser tolerance covers it.

Sample ``i`` is drawn from ``default_rng([seed, i])`` alone, so reports do not
depend on evaluation order and identical configs give identical reports.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .optimize import restart_rng
from .seqclasses import FiniteSeq, LInfSup, LpAbs, NormResult, SeqClass
from .spaces import INF, Space, format_exponent, operator_norm, parse_exponent

EXACT_TOL = 1e-12
OPT_TOL = 1e-6


@dataclass(frozen=True)
class SamplerConfig:
    dims: tuple = (1, 2, 3)
    exponents: tuple = (1, Fraction(3, 2), 2, 3, INF)
    lengths: tuple = (1, 6)
    samples: int = 200
    seed: int = 0
    tol: Optional[float] = None

    def rng(self, i: int) -> np.random.Generator:
        return restart_rng(self.seed, i)

    def space(self, rng) -> Space:
        d = int(rng.choice(self.dims))
        p = self.exponents[int(rng.integers(len(self.exponents)))]
        return Space(d, p)

    def length(self, rng) -> int:
        lo, hi = self.lengths
        return int(rng.integers(lo, hi + 1))

    def sequence(self, rng, space: Space | None = None, k: int | None = None) -> FiniteSeq:
        """Gaussian items; each item is zeroed with probability 0.15."""
        space = space or self.space(rng)
        k = self.length(rng) if k is None else k
        items = rng.standard_normal((k, space.dim))
        items[rng.random(k) < 0.15] = 0.0
        return FiniteSeq(space, items)


@dataclass
class PropertyReport:
    property: str
    subject: str
    verdict: str
    samples: int
    seed: int
    tolerance: Optional[float]
    declared: Optional[object] = None
    counterexample: Optional[dict] = None

    @property
    def found(self) -> bool:
        return self.verdict == "counterexample"

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, default=_jsonable)

    def summary(self) -> str:
        head = f"{self.property} [{self.subject}]: {self.verdict} after {self.samples} samples (seed {self.seed})"
        if self.declared is not None:
            head += f"; declared {self.declared}"
        if self.counterexample:
            c = self.counterexample
            head += f"\n  sample {c['sample']}: lhs={c['lhs']!r} rhs={c['rhs']!r}"
        return head


def _jsonable(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, Fraction):
        return format_exponent(o)
    return str(o)


def _violates(lhs, rhs, tol) -> bool:
    return lhs > rhs + tol * max(1.0, abs(rhs))


def _tol(cfg, exact: bool) -> float:
    if cfg.tol is not None:
        return cfg.tol
    return EXACT_TOL if exact else OPT_TOL


def _eval(X: SeqClass, s: FiniteSeq) -> NormResult:
    return X.evaluate(s)


def _seq_payload(s: FiniteSeq) -> dict:
    return s.to_dict()


def _run(name: str, subject: str, cfg: SamplerConfig, case: Callable, declared=None) -> PropertyReport:
    """``case(i, rng)`` returns ``(lhs, rhs, exact, inputs)``."""
    tol_used = cfg.tol
    for i in range(cfg.samples):
        lhs, rhs, exact, inputs = case(i, cfg.rng(i))
        tol = _tol(cfg, exact)
        tol_used = tol if tol_used is None else max(tol_used, tol)
        if _violates(lhs, rhs, tol):
            payload = dict(sample=i, lhs=float(lhs), rhs=float(rhs), tolerance=tol, **inputs)
            return PropertyReport(name, subject, "counterexample", i + 1, cfg.seed, tol, declared, payload)
    return PropertyReport(name, subject, "no-counterexample", cfg.samples, cfg.seed, tol_used, declared)


# --------------------------------------------------------------------------
# single-class checkers

def check_seqclass_axioms(X: SeqClass, cfg: SamplerConfig) -> PropertyReport:
    """``max_j ||x_j|| <= ||(x_j)||_X`` and ``||e_j||_{X(K)} = 1``.

    Even samples test the l_inf embedding on a random sequence, odd samples
    the norm of a canonical scalar unit vector (as ``| ||e_j|| - 1 | <= 0``).
    """
    def case(i, rng):
        if i % 2 == 0:
            s = cfg.sequence(rng)
            r = _eval(X, s)
            sup = float(s.vector_norms().max()) if len(s) else 0.0
            return sup, r.value, r.exact, dict(kind="embedding", seq=_seq_payload(s))
        k = cfg.length(rng)
        j = int(rng.integers(k))
        e = np.zeros(k)
        e[j] = 1.0
        s = FiniteSeq.scalars(e)
        r = _eval(X, s)
        return abs(r.value - 1.0), 0.0, r.exact, dict(kind="scalar-unit", seq=_seq_payload(s))

    return _run("axioms", str(X), cfg, case)


def check_finitely_shrinking(X: SeqClass, cfg: SamplerConfig) -> PropertyReport:
    """``||(x_j)_{j != i}||_X <= ||(x_j)||_X``."""
    def case(i, rng):
        s = cfg.sequence(rng)
        pos = int(rng.integers(len(s)))
        a, b = _eval(X, s.drop(pos)), _eval(X, s)
        return a.value, b.value, a.exact and b.exact, dict(seq=_seq_payload(s), drop=pos)

    return _run("finitely_shrinking", str(X), cfg, case, X.finitely_shrinking)


def check_zero_invariant(X: SeqClass, cfg: SamplerConfig) -> PropertyReport:
    """Inserting a zero item anywhere leaves the norm unchanged."""
    def case(i, rng):
        s = cfg.sequence(rng)
        pos = int(rng.integers(len(s) + 1))
        a, b = _eval(X, s.insert_zero(pos)), _eval(X, s)
        return abs(a.value - b.value), 0.0, a.exact and b.exact, dict(seq=_seq_payload(s), insert=pos)

    return _run("zero_invariant", str(X), cfg, case, X.finitely_zero_invariant)


def check_subsequence_invariant(X: SeqClass, cfg: SamplerConfig) -> PropertyReport:
    """Every order-preserving selection has norm at most the original."""
    def case(i, rng):
        s = cfg.sequence(rng)
        keep = np.flatnonzero(rng.random(len(s)) < 0.6)
        if keep.size == 0:
            keep = np.array([int(rng.integers(len(s)))])
        a, b = _eval(X, s.select(keep)), _eval(X, s)
        return a.value, b.value, a.exact and b.exact, dict(seq=_seq_payload(s), keep=keep.tolist())

    return _run("subsequence_invariant", str(X), cfg, case, X.subsequence_invariant)


def check_contraction(X: SeqClass, cfg: SamplerConfig) -> PropertyReport:
    """``||(a_j x_j)||_X <= C max|a_j| ||(x_j)||_X`` with the declared C.

    Multipliers are uniform in [-1, 1]; every third sample uses signs.
    """
    C = float(X.contraction_constant)

    def case(i, rng):
        s = cfg.sequence(rng)
        a = rng.choice([-1.0, 1.0], len(s)) if i % 3 == 0 else rng.uniform(-1, 1, len(s))
        lhs, rhs = _eval(X, s.scaled(a)), _eval(X, s)
        bound = C * float(np.abs(a).max()) * rhs.value
        return lhs.value, bound, lhs.exact and rhs.exact, dict(seq=_seq_payload(s), alpha=a.tolist())

    return _run("contraction", str(X), cfg, case, C)


def check_spherical_completeness(X: SeqClass, cfg: SamplerConfig) -> PropertyReport:
    """``||(a_j x_j)||_X = ||(x_j)||_X`` whenever ``|a_j| = 1``."""
    def case(i, rng):
        s = cfg.sequence(rng)
        a = rng.choice([-1.0, 1.0], len(s))
        lhs, rhs = _eval(X, s.scaled(a)), _eval(X, s)
        return abs(lhs.value - rhs.value), 0.0, lhs.exact and rhs.exact, dict(seq=_seq_payload(s),
                                                                               alpha=a.tolist())

    return _run("spherical_completeness", str(X), cfg, case, X.spherically_complete)


def check_linear_stability(X: SeqClass, cfg: SamplerConfig, *, maps: str = "gaussian") -> PropertyReport:
    """``||(T x_j)||_X <= ||T|| ||(x_j)||_X`` for random T: E -> E.

    Only exponents with an exact operator norm backend (1, 2, inf) are drawn,
    so ``||T||`` itself is exact.  ``maps="identity"`` uses T = I.
    """
    exps = tuple(p for p in cfg.exponents if parse_exponent(p) in (1, 2, INF)) or (2,)

    def case(i, rng):
        d = int(rng.choice(cfg.dims))
        E = Space(d, exps[int(rng.integers(len(exps)))])
        s = cfg.sequence(rng, space=E)
        T = np.eye(d) if maps == "identity" else rng.standard_normal((d, d))
        t = operator_norm(T, E, E)
        lhs, rhs = _eval(X, s.mapped(T, E)), _eval(X, s)
        return lhs.value, t.value * rhs.value, lhs.exact and rhs.exact and t.exact, dict(
            seq=_seq_payload(s), T=T.tolist())

    return _run("linear_stability", str(X), cfg, case)


# --------------------------------------------------------------------------
# multi-class checkers

def check_scalar_condition(Xs: Sequence[SeqClass], Y: SeqClass, cfg: SamplerConfig) -> PropertyReport:
    """``||(l_j^1 ... l_j^n)_j||_{Y(K)} <= prod_i ||(l_j^i)_j||_{X_i(K)}``."""
    def case(i, rng):
        k = cfg.length(rng)
        lams = [FiniteSeq.scalars(rng.standard_normal(k)) for _ in Xs]
        prod = FiniteSeq.scalars(np.prod([l.items[:, 0] for l in lams], axis=0))
        lhs = _eval(Y, prod)
        rs = [_eval(X, l) for X, l in zip(Xs, lams)]
        rhs = math.prod(r.value for r in rs)
        exact = lhs.exact and all(r.exact for r in rs)
        return lhs.value, rhs, exact, dict(scalars=[l.items[:, 0].tolist() for l in lams])

    subject = f"({', '.join(map(str, Xs))}; {Y})"
    return _run("scalar_condition", subject, cfg, case)


def fin_leq_falsify(X: SeqClass, Y: SeqClass, cfg: SamplerConfig) -> PropertyReport:
    """``||s||_X <= ||s||_Y`` on finite sequences."""
    def case(i, rng):
        s = cfg.sequence(rng)
        a, b = _eval(X, s), _eval(Y, s)
        return a.value, b.value, a.exact and b.exact, dict(seq=_seq_payload(s))

    return _run("fin_leq", f"{X} <= {Y}", cfg, case)


def jointly_dominated_check(Xs: Sequence[SeqClass], X: SeqClass, cfg: SamplerConfig) -> list:
    """Finite part of joint domination by X: X is flagged finitely determined
    and ``X_i <=fin X`` survives falsification for every i.

    Returns one report per X_i (the continuous inclusions cannot be sampled).
    """
    reports = []
    for Xi in Xs:
        r = fin_leq_falsify(Xi, X, cfg)
        r.declared = X.finitely_determined
        reports.append(r)
    return reports


CHECKERS = {
    "axioms": check_seqclass_axioms,
    "shrinking": check_finitely_shrinking,
    "zero": check_zero_invariant,
    "subsequence": check_subsequence_invariant,
    "contraction": check_contraction,
    "spherical": check_spherical_completeness,
    "linear": check_linear_stability,
}


def replay(report: PropertyReport, X, cfg: SamplerConfig) -> bool:
    """Re-run the sample that produced ``report``'s counterexample.

    Returns True when the violation reproduces.
    """
    if not report.found:
        return False
    i = report.counterexample["sample"]
    one = SamplerConfig(cfg.dims, cfg.exponents, cfg.lengths, i + 1, cfg.seed, cfg.tol)
    if report.property == "scalar_condition":
        Xs, Y = X
        again = check_scalar_condition(Xs, Y, one)
    elif report.property == "fin_leq":
        again = fin_leq_falsify(X[0], X[1], one)
    else:
        again = _BY_PROPERTY[report.property](X, one)
    return again.found and again.counterexample["sample"] == i


_BY_PROPERTY = {
    "axioms": check_seqclass_axioms,
    "finitely_shrinking": check_finitely_shrinking,
    "zero_invariant": check_zero_invariant,
    "subsequence_invariant": check_subsequence_invariant,
    "contraction": check_contraction,
    "spherical_completeness": check_spherical_completeness,
    "linear_stability": check_linear_stability,
}


# --------------------------------------------------------------------------
# deliberately broken classes (mutation oracles for the falsifiers)

@dataclass(frozen=True)
class Scaled(SeqClass):
    """``c * ||.||_inner``; with c < 1 the l_inf embedding fails."""

    inner: SeqClass = field(default_factory=lambda: LpAbs(2))
    factor: float = 0.5

    def evaluate(self, s):
        r = self.inner.evaluate(s)
        return NormResult(self.factor * r.value, "scaled", r.exact)

    def __str__(self):
        return f"{self.factor}*{self.inner}"


@dataclass(frozen=True)
class LengthPenalty(SeqClass):
    """``||.||_inner + (ref - k)_+``: removing items raises the value."""

    inner: SeqClass = field(default_factory=lambda: LpAbs(2))
    ref: int = 64

    def evaluate(self, s):
        r = self.inner.evaluate(s)
        return NormResult(r.value + max(0, self.ref - len(s)), "length-penalty", r.exact)

    def __str__(self):
        return f"penalty({self.inner})"


@dataclass(frozen=True)
class Counting(SeqClass):
    """``(1 + 0.01 k) ||.||_inner``: padding with zeros changes the value."""

    inner: SeqClass = field(default_factory=lambda: LpAbs(2))

    def evaluate(self, s):
        r = self.inner.evaluate(s)
        return NormResult((1 + 0.01 * len(s)) * r.value, "counting", r.exact)

    def __str__(self):
        return f"counting({self.inner})"


@dataclass(frozen=True)
class DeclaredConstant(SeqClass):
    """The inner class with a contraction constant it does not satisfy."""

    inner: SeqClass = field(default_factory=lambda: LpAbs(2))
    constant: float = 0.5

    @property
    def contraction_constant(self):
        return self.constant

    def evaluate(self, s):
        return self.inner.evaluate(s)

    def __str__(self):
        return f"C={self.constant}:{self.inner}"


@dataclass(frozen=True)
class SignedSum(SeqClass):
    """``||.||_inner + ||sum_j x_j||``: sensitive to the signs of the items."""

    inner: SeqClass = field(default_factory=lambda: LpAbs(2))

    def evaluate(self, s):
        r = self.inner.evaluate(s)
        tot = float(s.space.norm(s.items.sum(axis=0))) if len(s) else 0.0
        return NormResult(r.value + tot, "signed-sum", r.exact)

    def __str__(self):
        return f"signedsum({self.inner})"


@dataclass(frozen=True)
class CoordinateWeighted(SeqClass):
    """``(sum_j ||w * x_j||^2)^(1/2)`` with coordinate weights ``1, base, base^2, ...``.

    A norm on sequences, but not compatible with the operator norm of E.
    """

    base: float = 10.0

    def evaluate(self, s):
        w = self.base ** np.arange(s.space.dim)
        v = s.space.norm(s.items * w, axis=1) if len(s) else np.zeros(0)
        return NormResult(float(np.sqrt(np.dot(v, v))), "weighted", True)

    def __str__(self):
        return f"weighted({self.base})"


def mutations() -> dict:
    """Checker name -> (mutated subject, extra args) designated to fail it."""
    return {
        "axioms": Scaled(),
        "shrinking": LengthPenalty(),
        "zero": Counting(),
        "subsequence": LengthPenalty(),
        "contraction": DeclaredConstant(),
        "spherical": SignedSum(),
        "linear": CoordinateWeighted(),
        "scalar": ((LInfSup(), LInfSup()), LpAbs(1)),
    }
