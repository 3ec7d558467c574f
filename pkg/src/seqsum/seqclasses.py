"""Sequence classes evaluated on finite sequences.

Every class maps a :class:`FiniteSeq` (k vectors of one lp space) to the
norm of the eventually-null sequence ``(x_1, ..., x_k, 0, 0, ...)`` in
``X(E)``.  Built-in classes::

    LpAbs(p)    absolutely p-summable           (sum ||x_j||^p)^(1/p)
    LInfSup()   bounded / null / convergent     max ||x_j||
    LpWeak(p)   weakly p-summable               sup_{f in B_E*} (sum |f(x_j)|^p)^(1/p)
    Rad()       almost unconditionally summable (2^-k sum_eps ||sum eps_j x_j||^2)^(1/2)
    Cohen(p)    Cohen strongly p-summable       sup_{||(f_j)||_{w,p*} <= 1} sum |f_j(x_j)|

and the derived wrappers ``Fd(X)`` (supremum over prefixes) and ``Dual(X)``
(supremum of ``sum |f_j(x_j)|`` over the unit ball of ``X(E*)``).  The
c0/c/c0^w classes share LInfSup's finite sections.

Capability flags record what is known about each class; they are metadata
for the falsifiers in :mod:`seqsum.propcheck` and are never inferred from
one another.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import ClassVar, Optional

import numpy as np

from .errors import EnumerationCapError, ParseError, SpaceMismatchError, UnsupportedError
from .optimize import DEFAULT_RESTARTS, maximize_operator_norm
from .spaces import (ENUM_CAP, INF, Space, Vector, conjugate, format_exponent, lp_norm,
                     norming_coords, operator_norm, parse_exponent)

RAD_CAP = 20


# --------------------------------------------------------------------------
# finite sequences

@dataclass(frozen=True, eq=False)
class FiniteSeq:
    """``k`` vectors of one space, stored as a read-only ``(k, dim)`` array."""

    space: Space
    items: np.ndarray = None

    def __post_init__(self):
        d = self.space.dim
        a = np.zeros((0, d)) if self.items is None else np.array(self.items, dtype=float)
        if a.ndim == 1:
            if a.size == 0:
                a = a.reshape(0, d)
            elif d == 1:
                a = a.reshape(-1, 1)
        if a.ndim != 2 or a.shape[1] != d:
            raise SpaceMismatchError(f"items of shape {a.shape} do not live in {self.space}")
        a.setflags(write=False)
        object.__setattr__(self, "items", a)

    @classmethod
    def from_vectors(cls, vectors, space: Space | None = None) -> "FiniteSeq":
        vectors = list(vectors)
        if space is None:
            if not vectors:
                raise ValueError("an empty sequence needs an explicit space")
            space = vectors[0].space
        for v in vectors:
            if v.space != space:
                raise SpaceMismatchError(f"mixed spaces {v.space} and {space}")
        return cls(space, np.array([v.coords for v in vectors]).reshape(len(vectors), space.dim))

    @classmethod
    def scalars(cls, values) -> "FiniteSeq":
        """A sequence in the scalar field, modelled as lp:2:1 (all lp^1 agree)."""
        return cls(Space(1, 2), np.asarray(values, dtype=float).reshape(-1, 1))

    def __len__(self) -> int:
        return self.items.shape[0]

    def __iter__(self):
        return (Vector(row, self.space) for row in self.items)

    def __repr__(self) -> str:
        return f"FiniteSeq({self.space}, {self.items.tolist()})"

    def vector_norms(self) -> np.ndarray:
        return self.space.norm(self.items, axis=1) if len(self) else np.zeros(0)

    def prefix(self, m: int) -> "FiniteSeq":
        return FiniteSeq(self.space, self.items[:m])

    def tail(self, n: int) -> "FiniteSeq":
        """``(x_n, ..., x_k)`` with the 1-based index used in the literature."""
        return FiniteSeq(self.space, self.items[n - 1:])

    def drop(self, i: int) -> "FiniteSeq":
        return FiniteSeq(self.space, np.delete(self.items, i, axis=0))

    def insert_zero(self, i: int) -> "FiniteSeq":
        return FiniteSeq(self.space, np.insert(self.items, i, 0.0, axis=0))

    def select(self, indices) -> "FiniteSeq":
        return FiniteSeq(self.space, self.items[np.asarray(indices, dtype=int)])

    def scaled(self, alpha) -> "FiniteSeq":
        alpha = np.asarray(alpha, dtype=float).reshape(-1, 1)
        return FiniteSeq(self.space, alpha * self.items)

    def mapped(self, T, codomain: Space) -> "FiniteSeq":
        return FiniteSeq(codomain, self.items @ np.asarray(T, dtype=float).T)

    def is_zero(self) -> bool:
        return not np.any(self.items)

    def to_dict(self) -> dict:
        return {"space": str(self.space), "items": self.items.tolist()}

    @classmethod
    def from_dict(cls, data: dict, space: Space | None = None) -> "FiniteSeq":
        if space is None:
            if "space" not in data:
                raise ParseError("sequence record has no 'space' field")
            space = Space.parse(data["space"])
        items = data.get("items", [])
        return cls(space, np.array(items, dtype=float).reshape(len(items), space.dim))

    @classmethod
    def load(cls, path, space: Space | None = None) -> "FiniteSeq":
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}: {exc}") from exc
        return cls.from_dict(data, space)


# --------------------------------------------------------------------------
# evaluation results

@dataclass
class NormResult:
    """A class norm with the backend that produced it.

    ``exact`` is False when ``value`` is only a lower bound certified by
    ``certificate`` (a maximizing functional or functional tuple).  ``upper``
    is an upper bound when the backend provides one.
    """

    value: float
    backend: str
    exact: bool
    certificate: Optional[np.ndarray] = None
    upper: Optional[float] = None
    iterations: int = 0


# --------------------------------------------------------------------------
# backends

def weak_norm_result(s: FiniteSeq, p, *, backend: str = "auto", restarts: int = DEFAULT_RESTARTS,
                     seed: int = 0, cap: int = ENUM_CAP) -> NormResult:
    """Weak lp norm ``sup_{f in B_E*} ||(f(x_j))_j||_p``.

    It is the norm of ``f -> (f(x_j))_j`` from E* to lp^k, so the exact
    operator-norm backends apply: extreme points of B_E* when E* is l1 or
    l_inf (E = l_inf or l1), the top singular value for p = 2 on l2, and the
    multistart ascent otherwise.  The certificate is the maximizing
    functional.
    """
    p = parse_exponent(p)
    if len(s) == 0 or s.is_zero():
        return NormResult(0.0, "zero", True, np.eye(s.space.dim)[0])
    if p == INF:
        norms = s.vector_norms()
        j = int(np.argmax(norms))
        return NormResult(float(norms[j]), "max", True, norming_coords(s.items[j], s.space.exponent))
    estar = s.space.dual()
    exact_available = (estar.exponent == 1 or (estar.exponent == INF and estar.dim <= cap)
                       or (p == 2 and estar.exponent == 2))
    if backend == "ascent" or (backend == "auto" and not exact_available):
        warm = norming_coords(s.items, s.space.exponent)
        res = maximize_operator_norm(s.items, estar.exponent, p, restarts=restarts, seed=seed, warm=warm)
    else:
        res = operator_norm(s.items, estar, Space(len(s), p), backend=backend, cap=cap)
    return NormResult(res.value, res.backend, res.exact, res.argmax, None, res.iterations)


def weak_norm(s: FiniteSeq, p, **kw) -> float:
    return weak_norm_result(s, p, **kw).value


def rad_norm(s: FiniteSeq, cap: int = RAD_CAP) -> float:
    """``(2^-k sum_{eps in {+-1}^k} ||sum_j eps_j x_j||^2)^(1/2)`` by exact enumeration.

    The pattern and its negative have the same norm, so only the 2^(k-1)
    patterns with eps_1 = +1 are visited.
    """
    k = len(s)
    if k == 0:
        return 0.0
    if k > cap:
        raise EnumerationCapError(f"Rad norm of length {k} exceeds the enumeration cap {cap}")
    X = s.items
    rest = k - 1
    total = 0.0
    chunk = 1 << 14
    bits = np.arange(rest)
    for start in range(0, 1 << rest, chunk):
        idx = np.arange(start, min(start + chunk, 1 << rest))
        signs = 1.0 - 2.0 * ((idx[:, None] >> bits) & 1)
        sums = X[0] + signs @ X[1:]
        nrm = s.space.norm(sums, axis=1)
        total += float(np.dot(nrm, nrm))
    return math.sqrt(total / (1 << rest))


def cohen_norm_result(s: FiniteSeq, p, *, backend: str = "auto", tol: float = 1e-7,
                      max_cuts: int = 400, seed: int = 0) -> NormResult:
    """Cohen strongly p-summing norm of a finite sequence.

    ``sup { sum_j |f_j(x_j)| : ||(f_j)||_{weak p*} <= 1 }``.  For p = 1 the
    constraint is ``max_j ||f_j|| <= 1`` and the value is ``sum ||x_j||``.
    For p = 2 on l2 the constraint is ``sigma_max(F) <= 1`` and the value is
    the nuclear norm of the item matrix.  Otherwise (or with
    ``backend="cutting"``) a cutting-plane method alternates between a linear
    program over the cuts collected so far (an upper bound) and a weak-norm
    evaluation of its solution, whose rescaling is feasible (a lower bound).
    The returned value is the best lower bound, with ``upper`` set.
    """
    from ._duality import cohen_cutting_plane

    p = parse_exponent(p)
    if len(s) == 0 or s.is_zero():
        return NormResult(0.0, "zero", True, np.zeros((len(s), s.space.dim)))
    if backend not in ("auto", "cutting", "exact"):
        raise UnsupportedError(f"unknown Cohen backend {backend!r}")
    if backend != "cutting":
        if p == 1:
            F = norming_coords(s.items, s.space.exponent)
            return NormResult(float(s.vector_norms().sum()), "l1-closed-form", True, F)
        if p == 2 and s.space.exponent == 2:
            u, sv, vt = np.linalg.svd(s.items, full_matrices=False)
            return NormResult(float(sv.sum()), "nuclear", True, u @ vt)
        if backend == "exact":
            raise UnsupportedError(f"no exact Cohen backend for p={format_exponent(p)} on {s.space}")
    return cohen_cutting_plane(s, p, tol=tol, max_cuts=max_cuts, seed=seed)


def cohen_norm(s: FiniteSeq, p, **kw) -> float:
    return cohen_norm_result(s, p, **kw).value


# --------------------------------------------------------------------------
# class registry

class SeqClass:
    """Base for sequence-class descriptors.

    Subclasses implement :meth:`evaluate`.  ``contraction_constant`` is the
    constant C in ``||(a_j x_j)|| <= C sup|a_j| ||(x_j)||`` that the class
    declares (an artifact convention used by the contraction falsifier).
    """

    finitely_determined: bool = True
    finitely_shrinking: bool = False
    finitely_zero_invariant: bool = False
    subsequence_invariant: bool = False
    spherically_complete: bool = False
    contraction_constant: float = 1.0
    scalar_component: str = ""

    def evaluate(self, s: FiniteSeq) -> NormResult:
        raise NotImplementedError

    def norm(self, s: FiniteSeq) -> float:
        return self.evaluate(s).value

    def __call__(self, s: FiniteSeq) -> float:
        return self.evaluate(s).value

    def is_exact(self, space: Space) -> bool:
        """Whether the backend used on ``space`` returns exact values."""
        return True

    def flags(self) -> dict:
        return {
            "finitely_determined": self.finitely_determined,
            "finitely_shrinking": self.finitely_shrinking,
            "finitely_zero_invariant": self.finitely_zero_invariant,
            "subsequence_invariant": self.subsequence_invariant,
            "spherically_complete": self.spherically_complete,
            "contraction_constant": self.contraction_constant,
        }


_FULL_FLAGS = dict(finitely_determined=True, finitely_shrinking=True, finitely_zero_invariant=True,
                   subsequence_invariant=True, spherically_complete=True)


@dataclass(frozen=True)
class LpAbs(SeqClass):
    p: Fraction | float = Fraction(1)

    finitely_determined: ClassVar[bool] = True
    finitely_shrinking: ClassVar[bool] = True
    finitely_zero_invariant: ClassVar[bool] = True
    subsequence_invariant: ClassVar[bool] = True
    spherically_complete: ClassVar[bool] = True

    def __post_init__(self):
        object.__setattr__(self, "p", parse_exponent(self.p))

    @property
    def scalar_component(self):
        return f"l_{format_exponent(self.p)}"

    def evaluate(self, s):
        return NormResult(float(lp_norm(s.vector_norms(), self.p)) if len(s) else 0.0, "lp", True)

    def __str__(self):
        return f"lp:{format_exponent(self.p)}"


@dataclass(frozen=True)
class LInfSup(SeqClass):
    finitely_shrinking: ClassVar[bool] = True
    finitely_zero_invariant: ClassVar[bool] = True
    subsequence_invariant: ClassVar[bool] = True
    spherically_complete: ClassVar[bool] = True
    scalar_component: ClassVar[str] = "l_inf"

    def evaluate(self, s):
        return NormResult(float(s.vector_norms().max()) if len(s) else 0.0, "max", True)

    def __str__(self):
        return "linf"


@dataclass(frozen=True)
class LpWeak(SeqClass):
    p: Fraction | float = Fraction(1)
    backend: str = field(default="auto", compare=False)
    restarts: int = field(default=DEFAULT_RESTARTS, compare=False)
    seed: int = field(default=0, compare=False)

    finitely_shrinking: ClassVar[bool] = True
    finitely_zero_invariant: ClassVar[bool] = True
    subsequence_invariant: ClassVar[bool] = True
    spherically_complete: ClassVar[bool] = True

    def __post_init__(self):
        object.__setattr__(self, "p", parse_exponent(self.p))

    @property
    def scalar_component(self):
        return f"l_{format_exponent(self.p)}"

    def evaluate(self, s):
        return weak_norm_result(s, self.p, backend=self.backend, restarts=self.restarts, seed=self.seed)

    def is_exact(self, space):
        if self.backend == "ascent":
            return False
        es = space.dual()
        return (self.p == INF or es.exponent == 1 or (es.exponent == INF and es.dim <= ENUM_CAP)
                or (self.p == 2 and es.exponent == 2))

    def __str__(self):
        return f"lpw:{format_exponent(self.p)}"


@dataclass(frozen=True)
class Rad(SeqClass):
    """Rademacher class; RAD and Rad share these finite-section norms."""

    cap: int = field(default=RAD_CAP, compare=False)

    finitely_shrinking: ClassVar[bool] = True
    finitely_zero_invariant: ClassVar[bool] = True
    # not among the subsequence invariant classes listed for the real case
    subsequence_invariant: ClassVar[bool] = False
    spherically_complete: ClassVar[bool] = True
    scalar_component: ClassVar[str] = "l_2"

    def evaluate(self, s):
        return NormResult(rad_norm(s, self.cap), "sign-enumeration", True)

    def __str__(self):
        return "rad"


@dataclass(frozen=True)
class Cohen(SeqClass):
    p: Fraction | float = Fraction(2)
    backend: str = field(default="auto", compare=False)

    finitely_shrinking: ClassVar[bool] = True
    finitely_zero_invariant: ClassVar[bool] = True
    subsequence_invariant: ClassVar[bool] = True
    spherically_complete: ClassVar[bool] = True

    def __post_init__(self):
        object.__setattr__(self, "p", parse_exponent(self.p))
        if self.p == INF:
            raise UnsupportedError("Cohen classes are defined for 1 <= p < inf")

    @property
    def scalar_component(self):
        return f"l_{format_exponent(self.p)}"

    def evaluate(self, s):
        return cohen_norm_result(s, self.p, backend=self.backend)

    def is_exact(self, space):
        return self.backend != "cutting" and (self.p == 1 or (self.p == 2 and space.exponent == 2))

    def __str__(self):
        return f"cohen:{format_exponent(self.p)}"


@dataclass(frozen=True)
class Fd(SeqClass):
    """``X^fd``: the supremum of the X-norms of the prefixes."""

    inner: SeqClass = None

    finitely_determined: ClassVar[bool] = True

    @property
    def finitely_shrinking(self):
        return self.inner.finitely_shrinking

    @property
    def finitely_zero_invariant(self):
        return self.inner.finitely_zero_invariant

    @property
    def spherically_complete(self):
        return self.inner.spherically_complete

    @property
    def contraction_constant(self):
        return self.inner.contraction_constant

    @property
    def scalar_component(self):
        return f"({self.inner.scalar_component})^fd"

    def evaluate(self, s):
        return fd_norm_result(self.inner, s)

    def is_exact(self, space):
        return self.inner.is_exact(space)

    def __str__(self):
        return f"fd({self.inner})"


@dataclass(frozen=True)
class U(SeqClass):
    """``X^u``: the sequences of X whose tails tend to zero in X.

    Finite sequences always qualify, so the finite-section norms are those
    of X; the difference only shows asymptotically (see :func:`u_tail_trace`).
    """

    inner: SeqClass = None

    @property
    def finitely_determined(self):
        return self.inner.finitely_determined

    @property
    def finitely_shrinking(self):
        return self.inner.finitely_shrinking

    @property
    def finitely_zero_invariant(self):
        return self.inner.finitely_zero_invariant

    @property
    def subsequence_invariant(self):
        return self.inner.subsequence_invariant

    @property
    def spherically_complete(self):
        return self.inner.spherically_complete

    @property
    def contraction_constant(self):
        return self.inner.contraction_constant

    @property
    def scalar_component(self):
        return f"({self.inner.scalar_component})^u"

    def evaluate(self, s):
        return self.inner.evaluate(s)

    def is_exact(self, space):
        return self.inner.is_exact(space)

    def __str__(self):
        return f"u({self.inner})"


@dataclass(frozen=True)
class Dual(SeqClass):
    """``X^dual``: sup of ``sum |f_j(x_j)|`` over the unit ball of ``X(E*)``.

    Only LpAbs and LpWeak inner classes are supported.  Values are lower
    bounds from a multistart ascent over functional tuples.
    """

    inner: SeqClass = None
    restarts: int = field(default=16, compare=False)
    seed: int = field(default=0, compare=False)

    finitely_determined: ClassVar[bool] = True
    spherically_complete: ClassVar[bool] = True

    def __post_init__(self):
        if not isinstance(self.inner, (LpAbs, LpWeak)):
            raise UnsupportedError(f"dual of {self.inner} is not supported (need lp or lpw)")

    @property
    def scalar_component(self):
        return f"dual({self.inner.scalar_component})"

    def evaluate(self, s):
        return dual_norm_result(self.inner, s, restarts=self.restarts, seed=self.seed)

    def is_exact(self, space):
        return False

    def __str__(self):
        return f"dual({self.inner})"


def class_norm(X: SeqClass, s: FiniteSeq) -> float:
    return X.evaluate(s).value


def fd_norm_result(X: SeqClass, s: FiniteSeq) -> NormResult:
    """``max_{1 <= m <= k} ||(x_1..x_m)||_X`` (0 for the empty sequence)."""
    if len(s) == 0:
        return NormResult(0.0, f"fd/{type(X).__name__}", True)
    best = None
    exact = True
    for m in range(1, len(s) + 1):
        r = X.evaluate(s.prefix(m))
        exact &= r.exact
        if best is None or r.value > best.value:
            best = r
    return NormResult(best.value, f"fd/{best.backend}", exact, best.certificate, None, best.iterations)


def fd_norm(X: SeqClass, s: FiniteSeq) -> float:
    return fd_norm_result(X, s).value


def dual_norm_result(X: SeqClass, s: FiniteSeq, *, restarts: int = 16, seed: int = 0) -> NormResult:
    from ._duality import dual_ratio_ascent

    if not isinstance(X, (LpAbs, LpWeak)):
        raise UnsupportedError(f"dual norm over the ball of {X} is not supported (need lp or lpw)")
    if len(s) == 0 or s.is_zero():
        return NormResult(0.0, "zero", True, np.zeros((len(s), s.space.dim)))
    return dual_ratio_ascent(X, s, restarts=restarts, seed=seed)


def dual_norm(X: SeqClass, s: FiniteSeq, **kw) -> float:
    return dual_norm_result(X, s, **kw).value


# --------------------------------------------------------------------------
# families and tail traces

@dataclass(frozen=True)
class UnitVectors:
    """``x_j = e_j`` in lp^dim (l_inf by default); ``dim=None`` means dim = horizon."""

    dim: Optional[int] = None
    exponent: Fraction | float = INF

    def take(self, n: int) -> FiniteSeq:
        dim = n if self.dim is None else self.dim
        if n > dim:
            raise ValueError(f"{n} unit vectors do not fit in dimension {dim}")
        return FiniteSeq(Space(max(dim, 1), self.exponent), np.eye(max(dim, 1))[:n])


@dataclass(frozen=True, eq=False)
class ScaledPattern:
    """``x_j = j^(-s) z``."""

    s: float
    z: Vector

    def __post_init__(self):
        if not self.s > 0:
            raise ValueError("the decay exponent s must be positive")

    def coefficients(self, n: int) -> np.ndarray:
        return np.arange(1, n + 1, dtype=float) ** (-float(self.s))

    def take(self, n: int) -> FiniteSeq:
        return FiniteSeq(self.z.space, np.outer(self.coefficients(n), self.z.coords))


@dataclass(frozen=True, eq=False)
class Constant:
    """``x_j = z`` for every j (a bounded, non weakly null family)."""

    z: Vector

    def take(self, n: int) -> FiniteSeq:
        return FiniteSeq(self.z.space, np.tile(self.z.coords, (n, 1)))


@dataclass(frozen=True, eq=False)
class Explicit:
    seq: FiniteSeq

    def take(self, n: int) -> FiniteSeq:
        if n > len(self.seq):
            raise ValueError(f"explicit family has only {len(self.seq)} items, {n} requested")
        return self.seq.prefix(n)


@dataclass
class TailTrace:
    """``(n, ||(x_n, ..., x_N)||_X)`` for n = 1..N plus a verdict.

    With ``r_n`` the tail norms: ``r_ceil(N/2) <= threshold * r_1`` is
    evidence that the tails go to zero; ``min_n r_n >= threshold * r_1`` (no
    tail ever becomes small, down to the last single item) is evidence that
    they do not.  Truncations can never prove either.
    """

    points: list
    verdict: str
    horizon: int

    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.points])


def u_tail_trace(X: SeqClass, family, N: int, threshold: float = 0.1) -> TailTrace:
    if not X.finitely_shrinking:
        raise UnsupportedError(f"{X} is not flagged finitely shrinking; its tails need not be in X")
    if N < 1:
        raise ValueError("horizon must be at least 1")
    s = family.take(N)
    points = [(n, X.norm(s.tail(n))) for n in range(1, N + 1)]
    first = points[0][1]
    mid = points[(N + 1) // 2 - 1][1]
    if first == 0 or mid <= threshold * first:
        verdict = "tail->0 evidence"
    elif min(v for _, v in points) >= threshold * first:
        verdict = "non-null tail evidence"
    else:
        verdict = "inconclusive"
    return TailTrace(points, verdict, N)


# --------------------------------------------------------------------------
# class spec grammar

_SIMPLE = {
    "lp": lambda a: LpAbs(a),
    "lpw": lambda a: LpWeak(a),
    "cohen": lambda a: Cohen(a),
}


def parse_class(text: str) -> SeqClass:
    """Parse ``lp:<p>``, ``lpw:<p>``, ``linf``, ``rad``, ``cohen:<p>``,
    ``fd(<spec>)``, ``dual(<spec>)`` and ``u(<spec>)``."""
    t = text.strip()
    m = re.fullmatch(r"(fd|dual|u)\((.*)\)", t)
    if m:
        inner = parse_class(m.group(2))
        return {"fd": Fd, "dual": Dual, "u": U}[m.group(1)](inner)
    if t == "linf":
        return LInfSup()
    if t == "rad":
        return Rad()
    m = re.fullmatch(r"(lp|lpw|cohen):([^:()]+)", t)
    if m:
        return _SIMPLE[m.group(1)](parse_exponent(m.group(2)))
    raise ParseError(f"unknown sequence class {text!r}")
