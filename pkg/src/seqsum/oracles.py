"""Brute-force reference values for tiny instances.

These routines are deliberately independent of the optimizers they check:

* :func:`weak_norm_grid` evaluates the weak-p norm on a dense grid of the
  dual unit sphere (d <= 3), then zooms in around the best grid point.
* :func:`cohen_projective` computes the Cohen norm through its primal
  description as a projective tensor norm: the smallest ``sum_i ||a_i||_p``
  over decompositions ``M = sum_i a_i b_i^T`` with ``b_i`` on a grid of the
  unit sphere of E (d <= 2).  It is a convex program, solved with cvxpy, and
  restricting ``b_i`` to a grid can only raise the optimum, so the result is
  an upper bound that converges as the grid is refined.

cvxpy is an optional dependency used only here.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import UnsupportedError
from .spaces import INF, Space, lp_norm


def _sphere_points(d: int, n: int) -> np.ndarray:
    """Roughly uniform points on the Euclidean unit sphere of R^d, d <= 3."""
    if d == 1:
        return np.array([[1.0], [-1.0]])
    if d == 2:
        t = np.linspace(0.0, 2 * math.pi, n, endpoint=False)
        return np.column_stack([np.cos(t), np.sin(t)])
    if d == 3:
        i = np.arange(n) + 0.5
        z = 1 - 2 * i / n
        r = np.sqrt(1 - z * z)
        phi = math.pi * (1 + math.sqrt(5)) * i
        return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    raise UnsupportedError(f"sphere grids are only built for d <= 3, not {d}")


def _with_vertices(P: np.ndarray) -> np.ndarray:
    """Append +-e_i and all sign vectors, where the l1 and l_inf maxima can sit."""
    d = P.shape[1]
    eye = np.eye(d)
    signs = np.array(np.meshgrid(*[[1.0, -1.0]] * d)).reshape(d, -1).T
    return np.vstack([P, eye, -eye, signs])


def weak_norm_grid(items, space: Space, p, *, n: int = 200_000, zoom: int = 6) -> float:
    """Weak-p norm of the rows of ``items`` in ``space`` by dual-sphere gridding.

    The coarse grid is refined ``zoom`` times by gridding a shrinking
    neighbourhood of the incumbent (radially retracted to the sphere).
    """
    M = np.asarray(items, dtype=float)
    d = space.dim
    if M.size == 0:
        return 0.0
    estar = space.dual()
    P = _with_vertices(_sphere_points(d, n if d == 3 else min(n, 100_000)))
    P = P / estar.norm(P, axis=1)[:, None]

    def value(F):
        return lp_norm(F @ M.T, p, axis=1)

    vals = value(P)
    best = P[int(np.argmax(vals))]
    top = float(vals.max())
    if d == 1:
        return top
    h = 4 * math.sqrt(4 * math.pi / n) if d == 3 else 4 * 2 * math.pi / min(n, 100_000)
    rng = np.random.default_rng(0)
    for _ in range(zoom):
        Q = best + h * rng.uniform(-1, 1, size=(20_000, d))
        Q = np.vstack([Q, best])
        Q = Q / estar.norm(Q, axis=1)[:, None]
        v = value(Q)
        i = int(np.argmax(v))
        if v[i] > top:
            top, best = float(v[i]), Q[i]
        h /= 4
    return top


def cohen_projective(items, space: Space, p, *, resolution: float = 1e-3) -> float:
    """Cohen strongly p-summing norm as a projective tensor norm (d <= 2).

    Solves ``min sum_i ||a_i||_p  s.t.  sum_i a_i b_i^T = M`` with ``b_i``
    ranging over a grid of the unit sphere of E of angular step
    ``resolution`` (half circle suffices by symmetry).
    """
    import cvxpy as cp

    M = np.asarray(items, dtype=float)
    k, d = M.shape if M.ndim == 2 else (0, space.dim)
    if k == 0 or not np.any(M):
        return 0.0
    if d > 2:
        raise UnsupportedError("the projective oracle is limited to d <= 2")
    p = float(p) if p != INF else INF
    if d == 1:
        return float(lp_norm(M[:, 0], p))
    m = int(math.ceil(math.pi / resolution))
    t = np.linspace(0.0, math.pi, m, endpoint=False)
    B = np.column_stack([np.cos(t), np.sin(t)])
    B = _with_vertices(B)
    B = B / space.norm(B, axis=1)[:, None]
    n = B.shape[0]
    A = cp.Variable((k, n))
    cons = [A @ B == M]
    if p == 1:
        cost = cp.sum(cp.abs(A))
    elif p == 2:
        cost = cp.sum(cp.norm(A, 2, axis=0))
    elif p == INF:
        s = cp.Variable(n)
        cons.append(cp.abs(A) <= np.ones((k, 1)) @ cp.reshape(s, (1, n), order="C"))
        cost = cp.sum(s)
    else:
        # ||a||_p <= s  iff  |a_j| <= r_j^(1/p) s^(1-1/p) with sum_j r_j = s
        s = cp.Variable(n)
        R = cp.Variable((k, n), nonneg=True)
        S = np.ones((k, 1)) @ cp.reshape(s, (1, n), order="C")
        cons += [cp.sum(R, axis=0) == s,
                 cp.PowCone3D(cp.vec(R, order="C"), cp.vec(S, order="C"), cp.vec(A, order="C"), 1.0 / p)]
        cost = cp.sum(s)
    prob = cp.Problem(cp.Minimize(cost), cons)
    prob.solve(solver=cp.CLARABEL)
    return float(prob.value)


def singleton_dual_grid(x, space: Space, *, n: int = 100_000) -> float:
    """``sup |f(x)|`` over a grid of the dual unit sphere (d <= 3)."""
    x = np.asarray(x, dtype=float)
    P = _with_vertices(_sphere_points(space.dim, n))
    P = P / space.dual().norm(P, axis=1)[:, None]
    return float(np.abs(P @ x).max())
