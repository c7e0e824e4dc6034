"""Continuous relaxations of the big-M and strong models.

Relaxations are solved as conic programs with cvxpy and the Clarabel
interior-point solver.  Squared-error perspective terms are rotated
second-order cones and logistic perspective terms are pairs of exponential
cones.  Bounds on ``z`` (and optionally a fixed ``w``) are cvxpy parameters,
so branch-and-bound nodes and fixed-``w`` sweeps re-solve one compiled
problem.

Every returned objective is recomputed from the primal point, not read from
the solver.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass

import cvxpy as cp
import numpy as np
import scipy.sparse as sp

from .fairness import dp1_convex_proxy, dp1_linear_proxy
from .formulations import (ModelIR, build_strong, derive_bigM, model_t, ridge_bigM, strong_loss,
                           strong_violation)
from .losses import LossKind, eval_loss, reg_value

BOUND_ABS_SLACK = 1e-7
BOUND_REL_SLACK = 1e-7


@dataclass(frozen=True)
class SolveOptions:
    tol: float = 1e-10
    max_iter: int = 400
    time_limit: float | None = None
    verbose: bool = False


@dataclass
class RelaxSolution:
    w: np.ndarray
    z: np.ndarray
    p: np.ndarray | None
    s: np.ndarray
    t: float | None
    objective: float
    solver_objective: float
    primal_residual: float
    status: str
    solve_time: float

    @property
    def ok(self) -> bool:
        return self.status in ("optimal", "inaccurate")

    def bound(self) -> float:
        """Conservative lower bound on the relaxation optimum."""
        if self.status == "infeasible":
            return np.inf
        lo = min(self.objective, self.solver_objective)
        return lo - (BOUND_ABS_SLACK + BOUND_REL_SLACK * abs(lo))


_STATUS = {cp.OPTIMAL: "optimal", cp.OPTIMAL_INACCURATE: "inaccurate",
           cp.INFEASIBLE: "infeasible", cp.INFEASIBLE_INACCURATE: "infeasible",
           cp.UNBOUNDED: "unbounded", cp.UNBOUNDED_INACCURATE: "unbounded",
           cp.USER_LIMIT: "limit"}


class RelaxationEngine:
    """Compiled relaxation of one model.

    ``solve`` accepts elementwise bounds on ``z`` and, when the engine was
    built with ``fixed_w=True``, the value of ``w``.
    """

    def __init__(self, model: ModelIR, opts: SolveOptions | None = None, fixed_w: bool = False):
        self.model = model
        self.opts = opts or SolveOptions()
        self.fixed_w = fixed_w
        self._build()

    def _build(self):
        model = self.model
        pr = model.problem
        m, n, ell = pr.m, pr.n, pr.ell
        b = pr.bks
        X, y, c = pr.X, pr.y, pr.coef
        mz, mp = m * ell, m * (ell + 1)

        # z is stored row-major: entry (i, j) sits at i * ell + j
        w = cp.Variable(n, name="w")
        z = cp.Variable(mz, name="z")
        zlo = cp.Parameter(mz, name="zlo", value=np.zeros(mz))
        zhi = cp.Parameter(mz, name="zhi", value=np.ones(mz))
        cons = [z >= zlo, z <= zhi]
        self.w_fix = None
        if self.fixed_w:
            self.w_fix = cp.Parameter(n, name="w_fix", value=np.zeros(n))
            cons.append(w == self.w_fix)
        v = X @ w
        obj = 0

        if model.kind == "nat":
            M = model.big_m
            rep = np.repeat(X, ell, axis=0)          # row i * ell + j is x_i
            brep = np.tile(b, m)
            cons += [rep @ w - brep <= M * z, rep @ w - brep >= -M * (1 - z)]
            if pr.loss is LossKind.SQUARED:
                obj += cp.sum_squares(v - y)
            else:
                obj += cp.sum(cp.logistic(cp.multiply(-y, v)))
            self.p = None
        else:
            ops = _strong_operators(m, ell, b, y)
            p = cp.Variable(mp, name="p")
            q = cp.Variable(mp, name="q")
            cons += [v + ops["link"] @ p == b[0], ops["p_ends"] @ p >= 0]
            if ell > 1:
                cons += [ops["cpl_p"] @ p >= ops["cpl_lo"] @ z,
                         ops["cpl_p"] @ p <= ops["cpl_hi"] @ z]
            zeta = ops["zeta0"] + ops["zeta_z"] @ z
            u = ops["u_p"] @ p + ops["u_z"] @ z
            if pr.loss is LossKind.SQUARED:
                r = ops["resid"] @ zeta + u
                cons.append(cp.SOC(q + zeta, cp.vstack([2 * r, q - zeta]), axis=0))
            else:
                arg = ops["neg_y_shift"] @ zeta + ops["neg_y"] @ u
                e1 = cp.Variable(mp)
                e2 = cp.Variable(mp)
                cons += [cp.constraints.ExpCone(-q, zeta, e1),
                         cp.constraints.ExpCone(arg - q, zeta, e2),
                         e1 + e2 <= zeta]
            if model.big_m is not None:
                cons += [ops["first_p"] @ p <= model.big_m * (1 - ops["first_z"] @ z),
                         ops["last_p"] @ p <= model.big_m * (ops["last_z"] @ z)]
            obj += cp.sum(q)
            self.p = p

        if model.chain_cuts and ell > 1:
            cons.append(_chain_operator(m, ell) @ z <= 0)

        C = sp.csr_matrix((np.repeat(c, ell), (np.tile(np.arange(ell), m), np.arange(mz))),
                          shape=(ell, mz))
        d = C @ z
        absolute = pr.spec.variant.absolute
        self.t = None
        self.lam = cp.Parameter(nonneg=True, name="lam", value=float(pr.lam))
        self.eps = cp.Parameter(nonneg=True, name="eps",
                                value=0.0 if pr.spec.eps is None else float(pr.spec.eps))
        if model.has_t:
            self.t = cp.Variable(name="t")
            cons.append(d <= self.t)
            if absolute:
                cons.append(-d <= self.t)
            obj += self.lam * self.t
        else:
            cons.append(d <= self.eps)
            if absolute:
                cons.append(-d <= self.eps)

        reg = pr.reg
        if reg.active:
            if reg.kind == "ridge":
                obj += reg.mu * cp.sum_squares(w)
            elif reg.kind == "l1":
                obj += reg.mu * cp.norm1(w)
            else:
                zr = cp.Variable(n)
                h = cp.Variable(n)
                cons += [zr <= 1, cp.SOC(h + zr, cp.vstack([2 * w, h - zr]), axis=0)]
                obj += reg.mu * (cp.sum(h) + reg.d * cp.sum(zr))

        self.w, self.z, self.zlo, self.zhi = w, z, zlo, zhi
        self.prob = cp.Problem(cp.Minimize(obj), cons)

    def set_weight(self, lam: float | None = None, eps: float | None = None) -> None:
        """Change the penalty or the constraint level without recompiling."""
        if lam is not None:
            self.lam.value = float(lam)
        if eps is not None:
            self.eps.value = float(eps)

    def solve(self, z_lo=None, z_hi=None, w=None) -> RelaxSolution:
        pr = self.model.problem
        shape = (pr.m, pr.ell)
        mz = pr.m * pr.ell
        self.zlo.value = np.zeros(mz) if z_lo is None else np.asarray(z_lo, dtype=float).ravel()
        self.zhi.value = np.ones(mz) if z_hi is None else np.asarray(z_hi, dtype=float).ravel()
        if self.fixed_w:
            if w is None:
                raise ValueError("this engine needs a fixed w")
            self.w_fix.value = np.asarray(w, dtype=float)
        o = self.opts
        kw = dict(tol_gap_abs=o.tol, tol_gap_rel=o.tol, tol_feas=o.tol, tol_ktratio=1e-8,
                  max_iter=o.max_iter)
        if o.time_limit is not None:
            kw["time_limit"] = float(o.time_limit)
        t0 = time.perf_counter()
        try:
            with warnings.catch_warnings():
                # an inaccurate solve is reported through the status instead
                warnings.simplefilter("ignore", UserWarning)
                self.prob.solve(solver=cp.CLARABEL, verbose=o.verbose, **kw)
            status = _STATUS.get(self.prob.status, "error")
        except cp.error.SolverError:
            status = "error"
        elapsed = time.perf_counter() - t0
        if status in ("infeasible", "unbounded", "error") or self.w.value is None:
            nan = np.full(pr.n, np.nan)
            return RelaxSolution(nan, np.full(shape, np.nan), None, np.full(pr.m, np.nan), None,
                                 np.inf if status == "infeasible" else np.nan,
                                 np.inf if status == "infeasible" else np.nan,
                                 np.inf, "infeasible" if status == "infeasible" else status, elapsed)
        return self._package(status, elapsed)

    def _package(self, status: str, elapsed: float) -> RelaxSolution:
        model = self.model
        pr = model.problem
        w = np.asarray(self.w.value, dtype=float)
        if self.fixed_w:
            w = np.asarray(self.w_fix.value, dtype=float)
        shape = (pr.m, pr.ell)
        z = np.clip(np.asarray(self.z.value, dtype=float), self.zlo.value,
                    self.zhi.value).reshape(shape)
        bks = pr.spec.breakpoints
        if model.kind == "strong":
            p = np.asarray(self.p.value, dtype=float).reshape(pr.m, pr.ell + 1)
            s = strong_loss(pr.loss, pr.y, z, p, bks)
            resid = strong_violation(model, w, z, p)
        else:
            p = None
            v = pr.X @ w
            s = eval_loss(pr.loss, v, pr.y)
            M = model.big_m
            dv = v[:, None] - bks.values[None, :]
            resid = float(max(0.0, np.max(dv - M * z), np.max(-M * (1 - z) - dv)))
        t = model_t(model, z) if model.has_t else None
        objective = float(np.sum(s)) + reg_value(pr.reg, w)
        if t is not None:
            objective += float(self.lam.value) * t
        else:
            d = pr.coef @ z
            worst = float(np.max(np.abs(d)) if pr.spec.variant.absolute else np.max(d))
            resid = max(resid, worst - float(self.eps.value))
        return RelaxSolution(w, z, p, s, t, objective, float(self.prob.value), resid, status,
                             elapsed)


def solve_relaxation(model: ModelIR, opts: SolveOptions | None = None) -> RelaxSolution:
    """Solve the continuous relaxation of ``model`` (integrality dropped)."""
    return RelaxationEngine(model, opts).solve()


def relaxation_bound(model: ModelIR, opts: SolveOptions | None = None) -> float:
    """Valid lower bound: the smaller of the recomputed and solver objectives
    minus a small absolute plus relative slack."""
    return solve_relaxation(model, opts).bound()


def _strong_operators(m: int, ell: int, b: np.ndarray, y: np.ndarray) -> dict:
    """Sparse maps from the flattened ``p`` and ``z`` to the strong model's rows.

    ``p`` entry (i, k) sits at ``i * (ell + 1) + k`` and ``z`` entry (i, j) at
    ``i * ell + j``.  Perspective term (i, k) uses the same index as ``p``.
    """
    gaps = np.diff(b)
    shift = np.concatenate(([b[0]], b))
    mz, mp = m * ell, m * (ell + 1)
    P = lambda i, k: i * (ell + 1) + k  # noqa: E731
    Z = lambda i, j: i * ell + j  # noqa: E731

    link = sp.lil_matrix((m, mp))
    ends = sp.lil_matrix((2 * m, mp))
    first_p, last_p = sp.lil_matrix((m, mp)), sp.lil_matrix((m, mp))
    first_z, last_z = sp.lil_matrix((m, mz)), sp.lil_matrix((m, mz))
    ncpl = m * (ell - 1)
    cpl_p, cpl_lo, cpl_hi = (sp.lil_matrix((ncpl, mp)), sp.lil_matrix((ncpl, mz)),
                             sp.lil_matrix((ncpl, mz)))
    zeta0 = np.zeros(mp)
    zeta_z, u_z, u_p = sp.lil_matrix((mp, mz)), sp.lil_matrix((mp, mz)), sp.lil_matrix((mp, mp))
    for i in range(m):
        # v_i = b_1 - p_i0 + sum_k p_ik, written as v_i + p_i0 - sum_k p_ik = b_1
        link[i, P(i, 0)] = 1.0
        for k in range(1, ell + 1):
            link[i, P(i, k)] = -1.0
        ends[2 * i, P(i, 0)] = 1.0
        ends[2 * i + 1, P(i, ell)] = 1.0
        first_p[i, P(i, 0)] = 1.0
        last_p[i, P(i, ell)] = 1.0
        first_z[i, Z(i, 0)] = 1.0
        last_z[i, Z(i, ell - 1)] = 1.0
        for k in range(1, ell):
            r = i * (ell - 1) + k - 1
            cpl_p[r, P(i, k)] = 1.0
            cpl_lo[r, Z(i, k)] = gaps[k - 1]
            cpl_hi[r, Z(i, k - 1)] = gaps[k - 1]
        zeta0[P(i, 0)] = 1.0
        zeta_z[P(i, 0), Z(i, 0)] = -1.0
        u_p[P(i, 0), P(i, 0)] = -1.0
        for k in range(1, ell):
            zeta_z[P(i, k), Z(i, k - 1)] = 1.0
            zeta_z[P(i, k), Z(i, k)] = -1.0
            u_p[P(i, k), P(i, k)] = 1.0
            u_z[P(i, k), Z(i, k)] = -gaps[k - 1]
        zeta_z[P(i, ell), Z(i, ell - 1)] = 1.0
        u_p[P(i, ell), P(i, ell)] = 1.0
    yy = np.repeat(y, ell + 1)
    ss = np.tile(shift, m)
    return {"link": link.tocsr(), "p_ends": ends.tocsr(), "cpl_p": cpl_p.tocsr(),
            "cpl_lo": cpl_lo.tocsr(), "cpl_hi": cpl_hi.tocsr(), "zeta0": zeta0,
            "zeta_z": zeta_z.tocsr(), "u_p": u_p.tocsr(), "u_z": u_z.tocsr(),
            "resid": sp.diags(ss - yy), "neg_y_shift": sp.diags(-yy * ss), "neg_y": sp.diags(-yy),
            "first_p": first_p.tocsr(), "last_p": last_p.tocsr(),
            "first_z": first_z.tocsr(), "last_z": last_z.tocsr()}


def _chain_operator(m: int, ell: int) -> sp.csr_matrix:
    """Rows ``z_i,j+1 - z_ij`` for the chain inequalities."""
    rows = sp.lil_matrix((m * (ell - 1), m * ell))
    for i in range(m):
        for j in range(ell - 1):
            r = i * (ell - 1) + j
            rows[r, i * ell + j + 1] = 1.0
            rows[r, i * ell + j] = -1.0
    return rows.tocsr()


def default_big_m(problem) -> float | None:
    """``M`` for the strong model: none for squared error, a ridge-derived
    bound when a ridge penalty makes one available, else the heuristic."""
    if problem.loss is LossKind.SQUARED:
        return None
    if problem.reg.kind == "ridge" and problem.reg.mu > 0:
        try:
            return ridge_bigM(problem)
        except ValueError:
            pass
    return derive_bigM(problem, problem.spec.breakpoints, problem.loss)


def relaxed_weights(problem, opts: SolveOptions | None = None) -> np.ndarray:
    """``w`` from the strong relaxation (the estimator used on its own and as
    a starting point for coordinate descent)."""
    sol = solve_relaxation(build_strong(problem, default_big_m(problem)), opts)
    if not sol.ok:
        raise RuntimeError(f"strong relaxation failed: {sol.status}")
    return sol.w


def _golden_min(f, lo: np.ndarray, hi: np.ndarray, iters: int = 120) -> np.ndarray:
    """Elementwise minimum of convex ``f`` on ``[lo, hi]``; endpoints included."""
    g = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo.copy(), hi.copy()
    x1 = b - g * (b - a)
    x2 = a + g * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(iters):
        left = f1 <= f2
        # left: the minimum lies in [a, x2]; otherwise in [x1, b]
        b = np.where(left, x2, b)
        a = np.where(left, a, x1)
        keep_x, keep_f = np.where(left, x1, x2), np.where(left, f1, f2)
        new_x = np.where(left, b - g * (b - a), a + g * (b - a))
        new_f = f(new_x)
        x1, f1 = np.where(left, new_x, keep_x), np.where(left, new_f, keep_f)
        x2, f2 = np.where(left, keep_x, new_x), np.where(left, keep_f, new_f)
    mid = 0.5 * (a + b)
    return np.minimum(np.minimum(f(lo), f(hi)), f(mid))


def _fixed_w_single(loss: LossKind, v, y, c, b: float, lam: float, M: float | None):
    """Per-observation minimum of the one-threshold strong relaxation at fixed ``v``.

    With ``v > b`` the optimal split puts the whole excess in the upper
    portion, leaving ``(1 - z) L(b) + z L(b + (v - b)/z)``; symmetrically for
    ``v < b``.  The fairness row adds ``lam * c_i * z``.
    """
    v, y, c = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (v, y, c)))
    Lb = eval_loss(loss, np.full(v.shape, b), y)
    above = v > b
    below = v < b
    ex = np.abs(v - b)
    zlo = np.zeros(v.shape)
    zhi = np.ones(v.shape)
    if M is not None:
        zlo = np.where(above, np.minimum(1.0, ex / M), 0.0)
        zhi = np.where(below, np.maximum(0.0, 1.0 - ex / M), 1.0)

    def phi(z):
        out = np.empty(v.shape)
        zc = np.clip(z, 1e-300, 1.0)
        oc = np.clip(1.0 - z, 1e-300, 1.0)
        up = (1.0 - z) * Lb + z * eval_loss(loss, b + ex / zc, y)
        dn = z * Lb + (1.0 - z) * eval_loss(loss, b - ex / oc, y)
        out = np.where(above, up, np.where(below, dn, Lb))
        # closed perspective at the ends
        if loss is LossKind.SQUARED:
            out = np.where(above & (z <= 0), np.inf, out)
            out = np.where(below & (z >= 1), np.inf, out)
        else:
            rec_up = np.maximum(0.0, -y * ex)
            rec_dn = np.maximum(0.0, y * ex)
            out = np.where(above & (z <= 0), Lb + rec_up, out)
            out = np.where(below & (z >= 1), Lb + rec_dn, out)
        return out + lam * c * z

    with np.errstate(over="ignore", invalid="ignore"):
        return _golden_min(phi, zlo, zhi)


def sweep_objective_1d(problem, ds, k: int, w, grid, M: float | None = None,
                       conic: bool = False, opts: SolveOptions | None = None) -> dict:
    """Objective curves as coordinate ``k`` of ``w`` moves over ``grid``.

    Columns: ``exact`` (true objective), ``strong`` (strong relaxation with
    ``w`` held fixed, minimized over the remaining variables), ``linear`` and
    ``convex`` (loss plus the penalty times the mean-difference and hinge
    surrogates).  A single one-sided threshold makes the fixed-``w`` problem
    separable, and it is then solved per observation; otherwise, or with
    ``conic=True``, the conic model is re-solved at every grid point.
    """
    grid = np.asarray(grid, dtype=float)
    w = np.asarray(w, dtype=float)
    W = np.repeat(w[None, :], grid.size, axis=0)
    W[:, k] = grid
    V = W @ problem.X.T
    lam = problem.lam
    exact = np.array([problem.value(wi) for wi in W])
    base = np.array([problem.loss_value(wi) for wi in W])
    linear = base + lam * np.array([dp1_linear_proxy(wi, ds) for wi in W])
    convex = base + lam * np.array([dp1_convex_proxy(wi, ds) for wi in W])
    if problem.loss is LossKind.LOGISTIC:
        span = float(np.max(np.abs(V[:, :, None] - problem.bks[None, None, :])))
        M = max(M or 0.0, span * (1 + 1e-9) + 1e-9)
    if not conic and problem.ell == 1 and problem.sided == "one" and not problem.constrained:
        b = float(problem.bks[0])
        per = _fixed_w_single(problem.loss, V, problem.y[None, :], problem.coef[None, :], b,
                              lam, M)
        strong = np.sum(per, axis=1) + np.array([reg_value(problem.reg, wi) for wi in W])
    else:
        eng = RelaxationEngine(build_strong(problem, M), opts, fixed_w=True)
        strong = np.array([eng.solve(w=wi).objective for wi in W])
    return {"w_k": grid, "exact": exact, "strong": strong, "linear": linear, "convex": convex}
