"""Multistart ascent for maximizing norms of linear images over lp balls.

The objective ``x -> ||T x||_r`` is convex and positively homogeneous, so its
maximum over the unit ball of lp sits on the sphere (and, for p in {1, inf},
at an extreme point).  Each iteration takes a subgradient ``G`` and jumps to
the maximizer of ``<G, .>`` over the ball, which never decreases a convex
homogeneous objective.  A jump is kept while the value strictly increases and
either gains a relative ``RTOL`` or still moves the iterate by more than
``XTOL``; when it stalls, a radially retracted gradient step with step halving
is tried before the restart is declared converged.

Restarts are independent and seeded deterministically from ``(seed, index)``;
results are merged by maximum value with ties going to the lowest index, so
the outcome does not depend on evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spaces import conjugate, lp_norm, norming_coords

DEFAULT_RESTARTS = 64
MAX_ITER = 10_000
RTOL = 1e-10
XTOL = 1e-9
HALVINGS = 24


@dataclass
class AscentResult:
    value: float
    argmax: np.ndarray
    backend: str
    exact: bool
    restart: int
    iterations: int


def restart_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(index)])


def random_starts(dim: int, count: int, seed: int, offset: int = 0) -> np.ndarray:
    """One standard Gaussian row per restart, each from its own stream."""
    if count <= 0:
        return np.zeros((0, dim))
    return np.vstack([restart_rng(seed, offset + i).standard_normal(dim) for i in range(count)])


def _retract(X, p):
    n = lp_norm(X, p, axis=1)[:, None]
    return np.where(n > 0, X / np.where(n > 0, n, 1.0), X)


def maximize_operator_norm(T, p_dom, r_cod, *, restarts: int = DEFAULT_RESTARTS, seed: int = 0,
                           warm=None, max_iter: int = MAX_ITER, rtol: float = RTOL) -> AscentResult:
    """Lower bound for ``sup {||T x||_r : ||x||_p <= 1}`` with its maximizer.

    ``warm`` rows (if any) are tried before the ``restarts`` random starts and
    count as the lowest restart indices.
    """
    T = np.asarray(T, dtype=float)
    n_out, d = T.shape
    q_dom = float(conjugate(p_dom))
    p_dom, r_cod = float(p_dom), float(r_cod)
    starts = [np.zeros((0, d))]
    if warm is not None:
        starts.append(np.atleast_2d(np.asarray(warm, dtype=float)))
    starts.append(random_starts(d, restarts, seed))
    X = np.vstack(starts)
    X = X[np.any(X != 0, axis=1)]
    if X.shape[0] == 0:
        X = np.eye(d)[:1]
    X = _retract(X, p_dom)
    if n_out == 0 or not np.any(T):
        return AscentResult(0.0, X[0].copy(), "ascent", False, 0, 0)

    def value(Z):
        return lp_norm(Z @ T.T, r_cod, axis=1)

    vals = value(X)
    active = np.ones(X.shape[0], dtype=bool)
    it = 0
    while it < max_iter and active.any():
        it += 1
        idx = np.flatnonzero(active)
        Xa, va = X[idx], vals[idx]
        G = norming_coords(Xa @ T.T, r_cod) @ T
        cand = norming_coords(G, q_dom)
        vc = value(cand)
        # a slow power-type iteration can gain less than rtol per step while
        # still far from the top; keep going while it strictly gains and moves
        moved = np.abs(cand - Xa).max(axis=1) > XTOL
        better = (vc > va * (1 + rtol)) | ((vc > va) & moved)
        stalled = ~better
        if stalled.any():
            sidx = np.flatnonzero(stalled)
            step = G[sidx] / np.where((gn := lp_norm(G[sidx], p_dom, axis=1)[:, None]) > 0, gn, 1.0)
            base = Xa[sidx]
            eta = 1.0
            found = np.zeros(sidx.size, dtype=bool)
            for _ in range(HALVINGS):
                trial = _retract(base + eta * step, p_dom)
                vt = value(trial)
                ok = (~found) & (vt > va[sidx] * (1 + rtol))
                if ok.any():
                    cand[sidx[ok]] = trial[ok]
                    vc[sidx[ok]] = vt[ok]
                    found |= ok
                if found.all():
                    break
                eta *= 0.5
            better[sidx] = found
        X[idx[better]] = cand[better]
        vals[idx[better]] = vc[better]
        active[idx[~better]] = False
    best = int(np.argmax(vals))
    return AscentResult(float(vals[best]), X[best].copy(), "ascent", False, best, it)
