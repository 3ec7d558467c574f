"""Optimizers for suprema over balls of functional tuples.

Both problems maximize ``sum_j |f_j(x_j)|`` over tuples ``F = (f_j)`` in the
unit ball of some class norm on E*.  Flipping the sign of a single ``f_j``
changes neither constraint considered here, so the objective may be replaced
by the linear form ``<F, M> = sum_j f_j(x_j)`` (``M`` the item matrix): a
linear function over a convex ball.

* :func:`cohen_cutting_plane` handles the weak-p* ball.  Each weak-norm
  evaluation at a point ``F`` returns a maximizing ``g`` in B_E and the cut
  ``a^T F g <= 1`` (``a`` norming ``F g`` in l_p), valid on the whole ball.
  The LP over the collected cuts bounds the supremum from above; its solution
  rescaled onto the ball bounds it from below.
* :func:`dual_ratio_ascent` maximizes the ratio ``<F, M> / C(F)`` for a
  constraint norm C (lp or weak lp on E*) with L-BFGS on a subgradient,
  from an aligned start and seeded random starts, each followed by a
  restart from its own optimum to move off kinks.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linprog, minimize

from .optimize import maximize_operator_norm, restart_rng
from .spaces import ENUM_CAP, INF, Space, conjugate, lp_norm, norming_coords

INNER_RESTARTS = 8


def _tuple_weak(F, estar: Space, q, restarts=64, seed=0, warm=None):
    """Weak-q norm of the functional tuple F with its maximizing g in B_E.

    ``warm`` (a previous maximizer) is only used by the ascent backend.
    """
    from .seqclasses import FiniteSeq, weak_norm_result

    s = FiniteSeq(estar, F)
    if warm is not None and not weak_exact(estar, q) and np.any(F):
        rows = np.vstack([warm, norming_coords(F, estar.exponent)])
        r = maximize_operator_norm(F, conjugate(estar.exponent), q, restarts=restarts, seed=seed, warm=rows)
        return r.value, r.argmax, False
    r = weak_norm_result(s, q, restarts=restarts, seed=seed)
    return r.value, np.asarray(r.certificate, dtype=float), r.exact


def weak_exact(estar: Space, q) -> bool:
    """Whether the weak norm of tuples in ``estar`` has an exact backend."""
    return (q == INF or estar.dual().exponent == 1 or (estar.dual().exponent == INF and estar.dim <= ENUM_CAP)
            or (q == 2 and estar.exponent == 2))


def _aligned_start(M, space: Space, weight_exponent):
    """f_j proportional to a norming functional of x_j, weights norming ||x_j|| in l_{weight_exponent}."""
    norms = space.norm(M, axis=1)
    return norming_coords(norms, weight_exponent)[:, None] * norming_coords(M, space.exponent)


def cohen_cutting_plane(s, p, *, tol: float = 1e-7, max_cuts: int = 400, seed: int = 0):
    from .seqclasses import NormResult

    M = s.items
    k, d = M.shape
    E = s.space
    estar = E.dual()
    pstar = conjugate(p)

    cuts = []
    for j in range(k):
        for i in range(d):
            for sign in (1.0, -1.0):
                A = np.zeros((k, d))
                A[j, i] = sign
                cuts.append(A.ravel())

    exact_w = True
    F0 = _aligned_start(M, E, p)
    w, g, ex = _tuple_weak(F0, estar, pstar, seed=seed)
    exact_w &= ex
    best_F = F0 / w
    best = float(np.abs((best_F * M).sum(axis=1)).sum())
    cuts.append(np.outer(norming_coords(F0 @ g, pstar), g).ravel())

    upper = np.inf
    n = 0
    for n in range(1, max_cuts + 1):
        res = linprog(-M.ravel(), A_ub=np.array(cuts), b_ub=np.ones(len(cuts)), bounds=(None, None),
                      method="highs")
        if res.status != 0:
            break
        F = res.x.reshape(k, d)
        upper = min(upper, -float(res.fun))
        w, g, ex = _tuple_weak(F, estar, pstar, restarts=INNER_RESTARTS, seed=seed, warm=g)
        exact_w &= ex
        if w > 0:
            val = float(np.abs((F * M).sum(axis=1)).sum()) / w
            if val > best:
                best, best_F = val, F / w
        if upper - best <= tol * best:
            break
        cuts.append(np.outer(norming_coords(F @ g, pstar), g).ravel())
    if not exact_w:
        # the witness was scaled with cheap inner solves; rescale it with a full one
        w, _, _ = _tuple_weak(best_F, estar, pstar, seed=seed)
        best_F = best_F / max(w, 1.0)
        best = float(np.abs((best_F * M).sum(axis=1)).sum())
    return NormResult(best, "cutting-plane", False, best_F, max(upper, best), n)


def _constraint(X, F, estar: Space, inner_restarts: int, seed: int, state=None):
    """Value and a subgradient (w.r.t. F) of the class norm of the tuple F in X(E*)."""
    from .seqclasses import LpAbs

    if isinstance(X, LpAbs):
        r = estar.norm(F, axis=1)
        C = float(lp_norm(r, X.p))
        if C == 0:
            return 0.0, np.zeros_like(F)
        w = norming_coords(r, X.p) if X.p != INF else norming_coords(r, INF)
        w = np.where(r > 0, w, 0.0)
        return C, w[:, None] * norming_coords(F, estar.exponent)
    warm = None if state is None else state.get("g")
    C, g, _ = _tuple_weak(F, estar, X.p, restarts=inner_restarts, seed=seed, warm=warm)
    if state is not None:
        state["g"] = g
    if C == 0:
        return 0.0, np.zeros_like(F)
    u = norming_coords(F @ g, X.p)
    return C, np.outer(u, g)


def dual_ratio_ascent(X, s, *, restarts: int = 16, seed: int = 0, inner_restarts: int = INNER_RESTARTS,
                      max_iter: int = 2000):
    from .seqclasses import NormResult

    M = s.items
    k, d = M.shape
    E = s.space
    estar = E.dual()

    state = {}

    def neg_ratio(x):
        F = x.reshape(k, d)
        C, G = _constraint(X, F, estar, inner_restarts, seed, state)
        if C == 0:
            return 0.0, -M.ravel()
        R = float((F * M).sum()) / C
        return -R, -((M - R * G) / C).ravel()

    def run(x0):
        r = minimize(neg_ratio, x0, jac=True, method="L-BFGS-B",
                     options=dict(maxiter=max_iter, gtol=1e-12, ftol=1e-15))
        return r.x, -r.fun, r.nit

    starts = [_aligned_start(M, E, conjugate(X.p)).ravel()]
    starts += [restart_rng(seed, i).standard_normal(k * d) for i in range(1, restarts)]
    best_val, best_x, best_i, iters = -np.inf, None, 0, 0
    for i, x0 in enumerate(starts):
        x, val, nit = run(x0)
        iters += nit
        x2, val2, nit2 = run(x + 1e-3 * np.linalg.norm(x) * restart_rng(seed, 10_000 + i).standard_normal(k * d))
        iters += nit2
        if val2 > val:
            x, val = x2, val2
        if val > best_val:
            best_val, best_x, best_i = val, x, i
    F = best_x.reshape(k, d)
    C, _ = _constraint(X, F, estar, 64, seed)
    F = F / C
    value = float(np.abs((F * M).sum(axis=1)).sum())
    return NormResult(value, "ratio-ascent", False, F, None, iters)
