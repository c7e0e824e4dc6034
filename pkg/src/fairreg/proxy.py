"""Training with convex surrogates of the one-threshold parity gap.

Both surrogates work with the shifted scores ``v - b`` for a single
threshold ``b``.

* linear: ``|mean_{a=0} v - mean_{a=1} v|``.
* convex: hinge bounds on the two group rates.  With ``p = v - b`` on the
  protected rows and ``q = -(v - b)`` on the others, the gap
  ``P(p > 0) + P(q >= 0) - 1`` is at most ``mean max(0, p + 1) +
  mean max(0, q + 1) - 1`` and at least ``mean min(1, p) + mean min(1, q) -
  1``.  Penalizing the upper bound and the negated lower bound keeps the
  problem convex.  The two rows always sum to at least 2, so the
  two-sided surrogate never drops below 1 and a budget ``eps < 1`` on it
  is infeasible.
"""

from __future__ import annotations

import cvxpy as cp
import numpy as np

from .losses import LossKind
from .problem import FairProblem
from .relax import SolveOptions


def convex_proxy_terms(v, a: np.ndarray, b: float, sided: str) -> list:
    """Surrogate rows for scores ``v`` (a numpy array or a cvxpy expression)."""
    one, zero = a == 1, a == 0
    n1, n0 = int(one.sum()), int(zero.sum())
    p, q = v[np.flatnonzero(one)] - b, -(v[np.flatnonzero(zero)] - b)
    if isinstance(v, np.ndarray):
        hinge = lambda x: np.sum(np.maximum(0.0, x + 1.0))  # noqa: E731
        cap = lambda x: np.sum(np.minimum(1.0, x))  # noqa: E731
    else:
        hinge = lambda x: cp.sum(cp.pos(x + 1.0))  # noqa: E731
        cap = lambda x: cp.sum(cp.minimum(1.0, x))  # noqa: E731
    upper = hinge(p) / n1 + hinge(q) / n0 - 1.0
    lower = 1.0 - cap(p) / n1 - cap(q) / n0
    return [upper] if sided == "one" else [upper, lower]


def fit_proxy(problem: FairProblem, kind: str, opts: SolveOptions | None = None) -> np.ndarray:
    """Minimize loss plus ``lam`` times a surrogate, or subject to surrogate ``<= eps``."""
    if problem.ell != 1:
        raise ValueError("surrogate methods use a single threshold")
    if problem.a is None:
        raise ValueError("surrogate methods need the sensitive attribute")
    opts = opts or SolveOptions()
    X, y, a = problem.X, problem.y, problem.a
    b = float(problem.bks[0])
    w = cp.Variable(problem.n)
    v = X @ w
    if problem.loss is LossKind.SQUARED:
        obj = cp.sum_squares(v - y)
    else:
        obj = cp.sum(cp.logistic(cp.multiply(-y, v)))
    cons = []
    reg = problem.reg
    if reg.active:
        if reg.kind == "ridge":
            obj += reg.mu * cp.sum_squares(w)
        elif reg.kind == "l1":
            obj += reg.mu * cp.norm1(w)
        else:
            zr, h = cp.Variable(problem.n), cp.Variable(problem.n)
            cons += [zr <= 1, cp.SOC(h + zr, cp.vstack([2 * w, h - zr]), axis=0)]
            obj += reg.mu * (cp.sum(h) + reg.d * cp.sum(zr))
    if kind == "linear":
        i0, i1 = np.flatnonzero(a == 0), np.flatnonzero(a == 1)
        gap = cp.sum(v[i0]) / i0.size - cp.sum(v[i1]) / i1.size
        rows = [cp.abs(gap)]
    elif kind == "convex":
        rows = convex_proxy_terms(v, a, b, problem.sided)
    else:
        raise ValueError(f"unknown surrogate {kind!r}")
    if problem.constrained:
        cons += [r <= problem.spec.eps for r in rows]
    else:
        t = cp.Variable()
        cons += [r <= t for r in rows]
        obj += problem.lam * t
    prob = cp.Problem(cp.Minimize(obj), cons)
    prob.solve(solver=cp.CLARABEL, tol_gap_abs=opts.tol, tol_gap_rel=opts.tol,
               tol_feas=opts.tol, max_iter=opts.max_iter)
    if w.value is None:
        raise RuntimeError(f"surrogate fit failed: {prob.status}")
    return np.asarray(w.value, dtype=float)
