"""Multilinear operators between lp spaces and prefix-ratio lower bounds.

Operators come in two flavours sharing one interface (``arity``,
``domains``, ``codomain``, :meth:`apply`, :meth:`apply_batch`):

* :class:`MultilinearOp` stores the dense coefficient tensor of shape
  ``(d_1, ..., d_n, d_F)``.
* :class:`ProductOp` stores ``A(x_1, ..., x_n) = prod_{i != m} f_i(x_i) L(x_m)``
  in factored form (or ``prod_i f_i(x_i) y`` with no linear slot).  The
  divergence probes run in l_inf^4096, where a dense bilinear map would hold
  4096^3 coefficients.

For classes ``X_1..X_n`` and ``Y`` and witness sequences ``W_i`` the prefix
ratio ::

    rho_k = ||(A(w_j^1, ..., w_j^n))_{j<=k}||_Y / prod_i ||(w_j^i)_{j<=k}||_{X_i}

is a lower bound for the (X_1..X_n; Y)-summing norm of A.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ParseError, SpaceMismatchError, ZeroDenominatorError
from .optimize import restart_rng
from .seqclasses import FiniteSeq, SeqClass
from .spaces import Space, Vector


def _check_args(domains, args):
    if len(args) != len(domains):
        raise SpaceMismatchError(f"{len(args)} arguments for an operator of arity {len(domains)}")
    out = []
    for a, E in zip(args, domains):
        c = a.coords if isinstance(a, Vector) else np.asarray(a, dtype=float)
        if isinstance(a, Vector) and a.space != E:
            raise SpaceMismatchError(f"argument in {a.space}, slot expects {E}")
        if c.shape != (E.dim,):
            raise SpaceMismatchError(f"argument of shape {c.shape}, slot expects {E}")
        out.append(c)
    return out


def _check_batch(domains, seqs):
    if len(seqs) != len(domains):
        raise SpaceMismatchError(f"{len(seqs)} witness slots for an operator of arity {len(domains)}")
    arrays = []
    for s, E in zip(seqs, domains):
        a = s.items if isinstance(s, FiniteSeq) else np.asarray(s, dtype=float)
        if isinstance(s, FiniteSeq) and s.space != E:
            raise SpaceMismatchError(f"witness in {s.space}, slot expects {E}")
        if a.ndim != 2 or a.shape[1] != E.dim:
            raise SpaceMismatchError(f"witness of shape {a.shape}, slot expects {E}")
        arrays.append(a)
    k = min(a.shape[0] for a in arrays)
    return [a[:k] for a in arrays]


def _equal_domains(domains):
    if any(E != domains[0] for E in domains):
        raise SpaceMismatchError("permutation needs all domain spaces equal")


def _check_perm(sigma, n):
    sigma = tuple(int(i) for i in sigma)
    if sorted(sigma) != list(range(n)):
        raise ValueError(f"{sigma} is not a permutation of 0..{n - 1}")
    return sigma


@dataclass(frozen=True, eq=False)
class MultilinearOp:
    """Dense n-linear map ``E_1 x ... x E_n -> F``."""

    domains: tuple
    codomain: Space
    coeffs: np.ndarray

    def __post_init__(self):
        doms = tuple(self.domains)
        if not doms:
            raise ValueError("arity must be at least 1")
        c = np.array(self.coeffs, dtype=float)
        shape = tuple(E.dim for E in doms) + (self.codomain.dim,)
        if c.shape != shape:
            raise SpaceMismatchError(f"coefficients of shape {c.shape}, spaces need {shape}")
        c.setflags(write=False)
        object.__setattr__(self, "domains", doms)
        object.__setattr__(self, "coeffs", c)

    @property
    def arity(self) -> int:
        return len(self.domains)

    def apply(self, *args) -> Vector:
        out = self.coeffs
        for c in reversed(_check_args(self.domains, args)):
            out = np.tensordot(out, c, axes=([out.ndim - 2], [0]))
        return Vector(out, self.codomain)

    def apply_batch(self, *seqs) -> FiniteSeq:
        """``(A(x_j^1, ..., x_j^n))_j`` for witness sequences of equal length."""
        arrays = _check_batch(self.domains, seqs)
        letters = "abcdefghijklmnopqrstuvw"[: self.arity]
        spec = ",".join(f"z{c}" for c in letters) + f",{letters}y->zy"
        return FiniteSeq(self.codomain, np.einsum(spec, *arrays, self.coeffs, optimize=True))

    def to_dense(self) -> "MultilinearOp":
        return self

    def to_dict(self) -> dict:
        return {"arity": self.arity, "domains": [str(E) for E in self.domains],
                "codomain": str(self.codomain), "coeffs": self.coeffs.ravel().tolist(),
                "shape": list(self.coeffs.shape)}

    @classmethod
    def from_dict(cls, data: dict) -> "MultilinearOp":
        try:
            doms = tuple(Space.parse(t) for t in data["domains"])
            cod = Space.parse(data["codomain"])
            coeffs = np.array(data["coeffs"], dtype=float).reshape(data["shape"])
        except (KeyError, ValueError) as exc:
            raise ParseError(f"bad operator record: {exc}") from exc
        if int(data.get("arity", len(doms))) != len(doms):
            raise ParseError("arity does not match the number of domains")
        return cls(doms, cod, coeffs)

    @classmethod
    def load(cls, path) -> "MultilinearOp":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True, eq=False)
class ProductOp:
    """``A(x_1..x_n) = prod_{i != m} f_i(x_i) * L(x_m)`` in factored form.

    ``factors[i]`` is the coefficient vector of ``f_i`` (a functional on
    ``domains[i]``), or ``None`` for the single linear slot ``m``.  ``linear``
    is the matrix of ``L`` (``None`` means the identity, which needs
    ``domains[m] == codomain``).  With no ``None`` slot the value is
    ``prod_i f_i(x_i) * target``.
    """

    domains: tuple
    codomain: Space
    factors: tuple
    linear: Optional[np.ndarray] = None
    target: Optional[np.ndarray] = None

    def __post_init__(self):
        doms = tuple(self.domains)
        facs = tuple(None if f is None else np.array(f.coords if isinstance(f, Vector) else f, dtype=float)
                     for f in self.factors)
        if len(facs) != len(doms) or not doms:
            raise SpaceMismatchError("one factor per domain slot is required")
        free = [i for i, f in enumerate(facs) if f is None]
        if len(free) > 1:
            raise ValueError("at most one linear slot")
        for f, E in zip(facs, doms):
            if f is not None and f.shape != (E.dim,):
                raise SpaceMismatchError(f"functional of shape {f.shape} on {E}")
        lin = None if self.linear is None else np.array(self.linear, dtype=float)
        tgt = None if self.target is None else np.array(
            self.target.coords if isinstance(self.target, Vector) else self.target, dtype=float)
        if free:
            m = free[0]
            if lin is None and doms[m] != self.codomain:
                raise SpaceMismatchError("identity linear slot needs domain == codomain")
            if lin is not None and lin.shape != (self.codomain.dim, doms[m].dim):
                raise SpaceMismatchError(f"linear map of shape {lin.shape} is not {doms[m]} -> {self.codomain}")
        elif tgt is None or tgt.shape != (self.codomain.dim,):
            raise SpaceMismatchError("a target vector in the codomain is required without a linear slot")
        object.__setattr__(self, "domains", doms)
        object.__setattr__(self, "factors", facs)
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "target", tgt)

    @property
    def arity(self) -> int:
        return len(self.domains)

    @property
    def linear_slot(self) -> Optional[int]:
        return next((i for i, f in enumerate(self.factors) if f is None), None)

    def _combine(self, arrays):
        k = arrays[0].shape[0]
        scale = np.ones(k)
        for f, a in zip(self.factors, arrays):
            if f is not None:
                scale = scale * (a @ f)
        m = self.linear_slot
        if m is None:
            return scale[:, None] * self.target
        img = arrays[m] if self.linear is None else arrays[m] @ self.linear.T
        return scale[:, None] * img

    def apply(self, *args) -> Vector:
        cs = _check_args(self.domains, args)
        return Vector(self._combine([c[None, :] for c in cs])[0], self.codomain)

    def apply_batch(self, *seqs) -> FiniteSeq:
        return FiniteSeq(self.codomain, self._combine(_check_batch(self.domains, seqs)))

    def to_dense(self) -> MultilinearOp:
        n = self.arity
        m = self.linear_slot
        out = np.ones(())
        for i, (f, E) in enumerate(zip(self.factors, self.domains)):
            out = np.multiply.outer(out, f if f is not None else np.ones(E.dim))
        if m is None:
            return MultilinearOp(self.domains, self.codomain, np.multiply.outer(out, self.target))
        L = np.eye(self.codomain.dim) if self.linear is None else self.linear
        # coefficient (i_1..i_n, o) = prod f * L[o, i_m]
        Lm = L.T.reshape((1,) * m + (self.domains[m].dim,) + (1,) * (n - m - 1) + (self.codomain.dim,))
        return MultilinearOp(self.domains, self.codomain, out[..., None] * Lm)


def rank_one_bilinear(f: Vector, u=None, *, domain: Space | None = None) -> ProductOp:
    """``A(x, y) = f(x) u(y)``.

    ``u`` may be ``None`` (the identity, so ``A(x, y) = f(x) y``), a matrix,
    or a :class:`MultilinearOp` of arity 1.  ``f`` is a functional, i.e. a
    Vector of the dual of the first domain.
    """
    E1 = f.space.dual()
    if u is None:
        E2 = domain or E1
        return ProductOp((E1, E2), E2, (f.coords, None))
    if isinstance(u, MultilinearOp):
        if u.arity != 1:
            raise SpaceMismatchError("u must be linear (arity 1)")
        return ProductOp((E1, u.domains[0]), u.codomain, (f.coords, None), linear=u.coeffs.T)
    if domain is None:
        raise ValueError("a matrix u needs its domain space")
    u = np.asarray(u, dtype=float)
    cod = Space(u.shape[0], domain.exponent)
    return ProductOp((E1, domain), cod, (f.coords, None), linear=u)


def rank_one(functionals: Sequence[Vector], y: Vector) -> ProductOp:
    """``(x_1..x_n) -> f_1(x_1) ... f_n(x_n) y``."""
    doms = tuple(f.space.dual() for f in functionals)
    return ProductOp(doms, y.space, tuple(f.coords for f in functionals), target=y.coords)


def permute(A, sigma):
    """``B(x_1..x_n) = A(x_sigma(1), ..., x_sigma(n))`` (0-based ``sigma``)."""
    n = A.arity
    sigma = _check_perm(sigma, n)
    _equal_domains(A.domains)
    if isinstance(A, ProductOp):
        facs = [None] * n
        for i in range(n):
            facs[sigma[i]] = A.factors[i]
        return ProductOp(A.domains, A.codomain, tuple(facs), A.linear, A.target)
    inv = np.argsort(sigma)
    return MultilinearOp(A.domains, A.codomain, np.transpose(A.coeffs, tuple(inv) + (n,)))


def transpose(A):
    """``A^t(x, y) = A(y, x)`` for bilinear A."""
    if A.arity != 2:
        raise ValueError("transpose is defined for bilinear operators")
    return permute(A, (1, 0))


def symmetrize(A) -> MultilinearOp:
    """``(1/n!) sum_sigma A o sigma`` as a dense operator."""
    D = A.to_dense()
    _equal_domains(D.domains)
    n = D.arity
    acc = np.zeros_like(D.coeffs)
    for sigma in itertools.permutations(range(n)):
        acc += permute(D, sigma).coeffs
    return MultilinearOp(D.domains, D.codomain, acc / math.factorial(n))


# --------------------------------------------------------------------------
# prefix ratios

def _as_seq(w, E: Space) -> FiniteSeq:
    return w if isinstance(w, FiniteSeq) else FiniteSeq(E, w)


def summing_ratio(A, classes: Sequence[SeqClass], Y: SeqClass, witnesses, k: int | None = None) -> float:
    """The prefix ratio rho_k (k = full witness length when omitted)."""
    if len(classes) != A.arity or len(witnesses) != A.arity:
        raise SpaceMismatchError("need one class and one witness per slot")
    ws = [_as_seq(w, E) for w, E in zip(witnesses, A.domains)]
    n = min(len(w) for w in ws)
    k = n if k is None else int(k)
    if k > n or k < 0:
        raise ValueError(f"k = {k} exceeds the witness length {n}")
    ws = [w.prefix(k) for w in ws]
    den = 1.0
    for X, w in zip(classes, ws):
        den *= X.norm(w)
    if den == 0:
        raise ZeroDenominatorError("a witness slot has zero class norm")
    return Y.norm(A.apply_batch(*ws)) / den


@dataclass
class SummingEstimate:
    """A certified lower estimate of a summing norm.

    ``trace`` holds ``(k, rho_k)`` pairs, each reproducible from ``witness``
    (one FiniteSeq per slot, truncated to k).
    """

    value: float
    witness: list
    trace: list = field(default_factory=list)


def _canonical_witnesses(A, k, rng):
    """Unit vectors, constant first basis vector and a Gaussian draw, per slot."""
    out = []
    for E in A.domains:
        eye = np.eye(E.dim)
        unit = eye[np.arange(k) % E.dim]
        const = np.tile(eye[0], (k, 1))
        out.append([unit, const, rng.standard_normal((k, E.dim))])
    return out


def lower_bound_search(A, classes, Y, *, budget: int = 2000, ks=(1, 2, 4), restarts: int = 64,
                       seed: int = 0) -> SummingEstimate:
    """Hill-climbing search over witness entries for large prefix ratios.

    Each restart picks, per slot, one canonical start (unit vectors, a
    constant vector or Gaussian) and then repeatedly perturbs one slot by a
    Gaussian step scaled to the slot's current size, keeping the move when
    rho improves.  Slots are rescaled to unit Euclidean size after each
    accepted move (rho is homogeneous in each slot).  ``budget`` is the number
    of ratio evaluations per restart and per k.  Ties go to the lowest
    (k, restart) pair.
    """
    best_val, best_w = 0.0, None
    trace = []
    for k in ks:
        best_k, w_k = -1.0, None
        for r in range(restarts):
            rng = restart_rng(seed, 1000 * k + r)
            cands = _canonical_witnesses(A, k, rng)
            W = [c[(r + i) % len(c)].copy() for i, c in enumerate(cands)]
            W = [w / (np.linalg.norm(w) or 1.0) for w in W]

            def rho(W):
                try:
                    return summing_ratio(A, classes, Y, W)
                except ZeroDenominatorError:
                    return -1.0

            cur = rho(W)
            step = 0.5
            for t in range(budget):
                i = int(rng.integers(A.arity))
                trial = list(W)
                trial[i] = W[i] + step * rng.standard_normal(W[i].shape) / math.sqrt(W[i].size)
                nrm = np.linalg.norm(trial[i])
                if nrm == 0:
                    continue
                trial[i] = trial[i] / nrm
                v = rho(trial)
                if v > cur:
                    W, cur = trial, v
                elif t % 50 == 49:
                    step = max(step * 0.7, 1e-6)
            if cur > best_k:
                best_k, w_k = cur, W
        trace.append((k, best_k))
        if best_k > best_val:
            best_val = best_k
            best_w = [FiniteSeq(E, w) for E, w in zip(A.domains, w_k)]
    if best_w is None:
        best_w = [FiniteSeq(E, np.zeros((0, E.dim))) for E in A.domains]
    return SummingEstimate(best_val, best_w, trace)


@dataclass
class ProbeResult:
    """Prefix ratios along k = k_min, 2 k_min, ..., k_max.

    ``verdict`` is "diverging" when the trace strictly increases and its
    last increment is at least half its first (growth that does not stall),
    else "bounded".  ``growth`` is the last-to-first ratio.
    """

    trace: list
    verdict: str
    growth: float
    witness_norms: list = field(default_factory=list)

    def values(self) -> np.ndarray:
        return np.array([r for _, r in self.trace])


def probe_ks(k_max: int, k_min: int = 16) -> list:
    ks = []
    k = k_min
    while k <= k_max:
        ks.append(k)
        k *= 2
    return ks


def divergence_verdict(values) -> str:
    v = np.asarray(values, dtype=float)
    if v.size < 3:
        return "bounded"
    inc = np.diff(v)
    if np.all(inc > 0) and inc[-1] >= 0.5 * inc[0]:
        return "diverging"
    return "bounded"


def divergence_probe(A, classes, Y, families, k_max: int = 4096, k_min: int = 16) -> ProbeResult:
    """rho_k for the witnesses ``families[i].take(k_max)`` at doubling k."""
    ws = [f.take(k_max) for f in families]
    trace, norms = [], []
    for k in probe_ks(k_max, k_min):
        pre = [w.prefix(k) for w in ws]
        rho = summing_ratio(A, classes, Y, pre)
        trace.append((k, rho))
        norms.append([X.norm(w) for X, w in zip(classes, pre)])
    vals = [r for _, r in trace]
    growth = vals[-1] / vals[0] if vals and vals[0] > 0 else math.inf
    return ProbeResult(trace, divergence_verdict(vals), growth, norms)
