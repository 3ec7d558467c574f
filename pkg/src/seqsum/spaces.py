"""Finite-dimensional real lp spaces.

A :class:`Space` is ``lp^d`` with an exponent stored exactly (a
:class:`fractions.Fraction` or ``math.inf``), so that conjugate exponents
round-trip without drift.  Vectors and functionals are thin wrappers around
1-d numpy arrays; most of the library works on 2-d arrays of stacked items
and uses the array-level helpers (:func:`lp_norm`, :func:`norming_coords`).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Union

import numpy as np

from .errors import EnumerationCapError, ParseError, SpaceMismatchError, UnsupportedError

INF = math.inf
Exponent = Union[Fraction, float]

#: Default cap on the dimension for which the 2**dim sign vectors of the
#: l_inf ball are enumerated.
ENUM_CAP = 20


def parse_exponent(p) -> Exponent:
    """Normalize an exponent to a Fraction >= 1 or ``math.inf``.

    Accepts ints, Fractions, floats, and strings such as ``"2"``, ``"1.5"``,
    ``"4/3"`` or ``"inf"``.  Floats go through their shortest decimal repr,
    so ``1.5`` becomes ``Fraction(3, 2)``.
    """
    if isinstance(p, str):
        s = p.strip().lower()
        if s in ("inf", "infinity", "oo"):
            return INF
        try:
            q = Fraction(s)
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"bad exponent {p!r}") from exc
    elif isinstance(p, Fraction):
        q = p
    elif isinstance(p, (int, np.integer)):
        q = Fraction(int(p))
    elif isinstance(p, (float, np.floating)):
        if math.isinf(p) and p > 0:
            return INF
        if math.isnan(p):
            raise ParseError("exponent is NaN")
        q = Fraction(repr(float(p)))
    else:
        raise ParseError(f"bad exponent {p!r}")
    if q < 1:
        raise ParseError(f"exponent must be >= 1, got {q}")
    return q


def conjugate(p) -> Exponent:
    """Hölder conjugate: 1/p + 1/p* = 1, with 1 <-> inf."""
    p = parse_exponent(p)
    if p == INF:
        return Fraction(1)
    if p == 1:
        return INF
    return p / (p - 1)


def format_exponent(p) -> str:
    """Inverse of :func:`parse_exponent`: ``"inf"``, ``"2"``, ``"1.5"``, ``"4/3"``."""
    p = parse_exponent(p)
    if p == INF:
        return "inf"
    if p.denominator == 1:
        return str(p.numerator)
    den = p.denominator
    for f in (2, 5):
        while den % f == 0:
            den //= f
    if den == 1:
        return str(Decimal(p.numerator) / Decimal(p.denominator))
    return f"{p.numerator}/{p.denominator}"


def _pfloat(p) -> float:
    """Exponent as a float, skipping the exact parse for plain floats."""
    if type(p) is float and p >= 1.0:
        return p
    return float(parse_exponent(p))


def lp_norm(a, p, axis=-1) -> np.ndarray:
    """lp norm of ``a`` along ``axis`` (max of absolute values for p = inf).

    Empty reductions give 0.  Exponents other than 1 and inf are evaluated
    after scaling by the largest entry, so huge or tiny entries neither
    overflow nor underflow.
    """
    a = np.asarray(a, dtype=float)
    p = _pfloat(p)
    if a.shape[axis] == 0:
        return np.zeros(np.delete(a.shape, axis if axis >= 0 else a.ndim + axis))
    absa = np.abs(a)
    if p == 1.0:
        return absa.sum(axis=axis)
    if p == INF:
        return absa.max(axis=axis)
    m = absa.max(axis=axis, keepdims=True)
    safe = np.where(m > 0, m, 1.0)
    r = absa / safe
    if p == 2.0:
        out = safe * np.sqrt((r * r).sum(axis=axis, keepdims=True))
    else:
        out = safe * (r ** p).sum(axis=axis, keepdims=True) ** (1.0 / p)
    return np.squeeze(np.where(m > 0, out, 0.0), axis=axis)


def norming_coords(g, p) -> np.ndarray:
    """Unit vectors of l_{p*} attaining the norm of ``g`` in l_p.

    Row-wise for 2-d input: returns ``f`` with ``||f||_{p*} = 1`` and
    ``<f, g> = ||g||_p``.  This is also the maximizer of ``<g, .>`` over the
    unit ball of l_{p*}, i.e. the linear maximization step of the ascent
    engine.  For p = inf the first index attaining the maximum is used; for
    p = 1 zero entries get sign +1 so the result is a vertex of the cube.  A
    zero row is mapped to e_1.
    """
    g = np.asarray(g, dtype=float)
    squeeze = g.ndim == 1
    G = np.atleast_2d(g)
    p = _pfloat(p)
    m, d = G.shape
    out = np.zeros_like(G)
    if d == 0:
        return out[0] if squeeze else out
    if p == 1.0:
        out = np.where(G < 0, -1.0, 1.0)
    elif p == INF:
        idx = np.argmax(np.abs(G), axis=1)
        rows = np.arange(m)
        out[rows, idx] = np.where(G[rows, idx] < 0, -1.0, 1.0)
    else:
        nrm = lp_norm(G, p, axis=1)[:, None]
        safe = np.where(nrm > 0, nrm, 1.0)
        out = np.sign(G) * np.abs(G / safe) ** (p - 1.0)
    zero = ~np.any(G != 0, axis=1)
    if p != 1.0 and np.any(zero):
        out[zero] = 0.0
        out[zero, 0] = 1.0
    return out[0] if squeeze else out


@dataclass(frozen=True)
class Space:
    """The real space lp^dim."""

    dim: int
    exponent: Exponent = Fraction(2)

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ParseError(f"dim must be a positive integer, got {self.dim!r}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "exponent", parse_exponent(self.exponent))

    @property
    def p(self) -> float:
        return float(self.exponent)

    @classmethod
    def parse(cls, text: str) -> "Space":
        """Parse ``lp:<p>:<d>``, e.g. ``lp:2:3`` or ``lp:inf:4``."""
        parts = text.strip().split(":")
        if len(parts) != 3 or parts[0] != "lp":
            raise ParseError(f"space literal must look like lp:<p>:<d>, got {text!r}")
        try:
            dim = int(parts[2])
        except ValueError as exc:
            raise ParseError(f"bad dimension in {text!r}") from exc
        return cls(dim, parse_exponent(parts[1]))

    def __str__(self) -> str:
        return f"lp:{format_exponent(self.exponent)}:{self.dim}"

    def dual(self) -> "Space":
        return Space(self.dim, conjugate(self.exponent))

    def norm(self, coords, axis=-1):
        return lp_norm(coords, self.exponent, axis=axis)

    def vector(self, coords) -> "Vector":
        return Vector(np.asarray(coords, dtype=float), self)

    def basis(self, i: int) -> "Vector":
        """Canonical unit vector e_i (0-based index)."""
        e = np.zeros(self.dim)
        e[i] = 1.0
        return Vector(e, self)

    def zero(self) -> "Vector":
        return Vector(np.zeros(self.dim), self)


@dataclass(frozen=True, eq=False)
class Vector:
    """A point of a :class:`Space`; a functional is a Vector of the dual space."""

    coords: np.ndarray
    space: Space

    def __post_init__(self):
        c = np.array(self.coords, dtype=float).reshape(-1)
        if c.shape[0] != self.space.dim:
            raise SpaceMismatchError(f"{c.shape[0]} coordinates for a space of dim {self.space.dim}")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    def norm(self) -> float:
        return float(self.space.norm(self.coords))

    def __repr__(self) -> str:
        return f"Vector({self.coords.tolist()}, {self.space})"


Functional = Vector


def dual(s: Space) -> Space:
    return s.dual()


def vec_norm(x: Vector) -> float:
    return x.norm()


def pair(f: Functional, x: Vector) -> float:
    """Evaluate the functional ``f`` at ``x``."""
    if f.space != x.space.dual():
        raise SpaceMismatchError(f"functional in {f.space} cannot act on {x.space}")
    return float(np.dot(f.coords, x.coords))


def radial_retract(x: Vector) -> Vector:
    n = x.norm()
    if n == 0:
        raise ValueError("cannot retract the zero vector to the unit sphere")
    return Vector(x.coords / n, x.space)


def norming(x: Vector) -> Functional:
    """A norm-one functional f with f(x) = ||x||."""
    return Vector(norming_coords(x.coords, x.space.exponent), x.space.dual())


def extreme_points(s: Space, cap: int = ENUM_CAP) -> np.ndarray:
    """Extreme points of the unit ball of lp^d for p in {1, inf}, one per row.

    For p = 1 these are +-e_i (2d rows: e_1..e_d then -e_1..-e_d); for
    p = inf the 2**d sign vectors, which requires ``d <= cap``.
    """
    if s.exponent == 1:
        eye = np.eye(s.dim)
        return np.vstack([eye, -eye])
    if s.exponent == INF:
        if s.dim > cap:
            raise EnumerationCapError(f"2**{s.dim} sign vectors exceed the cap 2**{cap}")
        return np.array(list(itertools.product((1.0, -1.0), repeat=s.dim)))
    raise UnsupportedError(f"extreme points are only enumerated for p in {{1, inf}}, not {s}")


def operator_norm(T, domain: Space, codomain: Space, *, restarts: int = 64, seed: int = 0,
                  backend: str = "auto", cap: int = ENUM_CAP):
    """Norm of the matrix ``T`` (codomain.dim x domain.dim) as a map domain -> codomain.

    Returns an :class:`~seqsum.optimize.AscentResult`.  Exact backends: domain
    p = 1 (columns), domain p = inf with dim <= cap (sign vectors) and the
    Euclidean case (largest singular value).  Anything else, or
    ``backend="ascent"``, runs the multistart ascent and yields a lower bound
    certified by the returned maximizer.
    """
    from .optimize import AscentResult, maximize_operator_norm

    T = np.asarray(T, dtype=float)
    if T.shape != (codomain.dim, domain.dim):
        raise SpaceMismatchError(f"matrix of shape {T.shape} is not a map {domain} -> {codomain}")
    if backend not in ("auto", "enum", "svd", "ascent"):
        raise UnsupportedError(f"unknown backend {backend!r}")
    enumerable = domain.exponent == 1 or (domain.exponent == INF and domain.dim <= cap)
    if backend == "enum" or (backend == "auto" and enumerable):
        if domain.exponent == 1:
            # images of +-e_i are the columns; no need to form the 2d x d identity
            vals = codomain.norm(T, axis=0)
            i = int(np.argmax(vals))
            return AscentResult(float(vals[i]), np.eye(domain.dim)[i], "enum", True, i, 0)
        pts = extreme_points(domain, cap)
        vals = codomain.norm(pts @ T.T, axis=1)
        i = int(np.argmax(vals))
        return AscentResult(float(vals[i]), pts[i].copy(), "enum", True, i, 0)
    if backend in ("auto", "svd") and domain.exponent == 2 and codomain.exponent == 2:
        if T.size == 0:
            return AscentResult(0.0, np.eye(domain.dim)[0], "svd", True, 0, 0)
        u, s, vt = np.linalg.svd(T)
        return AscentResult(float(s[0]), vt[0].copy(), "svd", True, 0, 0)
    if backend in ("enum", "svd"):
        raise UnsupportedError(f"backend {backend!r} does not apply to {domain} -> {codomain}")
    return maximize_operator_norm(T, domain.exponent, codomain.exponent, restarts=restarts, seed=seed)
