"""Coordinate descent on the exact penalized objective.

Along coordinate ``k`` the parity term only changes where some prediction
``r_i + t x_ik`` crosses a threshold ``b_j``, i.e. at
``t = (b_j - r_i) / x_ik``.  Between two such points the parity term is
constant and the loss is convex, and at a crossing the tied indicator may be
chosen freely, so the parity value there is no larger than on either side.
Hence the one-dimensional minimum is attained either at a crossing or at the
minimizer of the loss alone.

The sweep over the sorted crossings keeps the vector of rate gaps ``d`` and
updates a single entry at each crossing instead of re-evaluating parity from
scratch.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fairness import _best_tie_choice, lsc_parity
from .losses import LossKind, eval_loss, reg_terms, univariate_loss_min
from .problem import CONSTRAINT_SLACK, FairProblem

TIE_TOL = 1e-9
LOGISTIC_CHUNK = 2_000_000


def eval_R(problem: FairProblem, v, tie_tol: float = TIE_TOL) -> float:
    """Parity term of the objective for predictions ``v`` (ties resolved optimally)."""
    return lsc_parity(v, problem.coef, problem.spec.breakpoints, problem.sided, tie_tol)


def candidate_set(problem: FairProblem, w, k: int):
    """Crossing points along coordinate ``k``.

    Returns ``(t, i, j)`` sorted by ``t`` (then ``i``, then ``j``).  Rows with
    ``x_ik == 0`` never cross and are skipped; duplicates are kept.
    """
    w = np.asarray(w, dtype=float)
    xk = problem.X[:, k]
    r = problem.X @ w - xk * w[k]
    rows = np.flatnonzero(xk != 0)
    b = problem.bks
    t = ((b[None, :] - r[rows, None]) / xk[rows, None]).ravel()
    ii = np.repeat(rows, b.size)
    jj = np.tile(np.arange(b.size), rows.size)
    order = np.lexsort((jj, ii, t))
    return t[order], ii[order], jj[order]


@dataclass
class SweepTable:
    """Values along one coordinate: crossing points plus the loss-only minimizer."""

    t: np.ndarray
    R: np.ndarray
    F: np.ndarray
    t_loss: float


def _interval_values(D: np.ndarray, persist: list[np.ndarray], sided: str) -> np.ndarray:
    # per-threshold parity values of interval states, with rows that sit on a
    # threshold for every t (x_ik == 0) left free
    V = D.copy()
    for j, cp in enumerate(persist):
        if cp.size == 0:
            if sided == "abs":
                V[:, j] = np.abs(V[:, j])
            continue
        if sided == "one":
            V[:, j] += float(np.sum(cp[cp < 0]))
        else:
            V[:, j] = [_best_tie_choice(x, cp, "abs") for x in D[:, j]]
    return V


def coordinate_sweep(problem: FairProblem, w, k: int, tie_tol: float = TIE_TOL) -> SweepTable:
    """Objective at every crossing along coordinate ``k`` via the incremental sweep."""
    w = np.asarray(w, dtype=float)
    X, y, c = problem.X, problem.y, problem.coef
    b = problem.bks
    ell = b.size
    sided = problem.sided
    xk = X[:, k]
    r = X @ w - xk * w[k]
    tol = tie_tol * np.maximum(1.0, np.abs(b))

    zero = xk == 0
    dz = r[zero, None] - b[None, :]
    tied0 = np.abs(dz) <= tol[None, :]
    fixed1 = (dz > 0) & ~tied0
    cz = c[zero]
    persist = [cz[tied0[:, j]] for j in range(ell)]

    t, ii, jj = candidate_set(problem, w, k)
    K = t.size
    # state at t -> -inf: rows with x_ik < 0 are above every threshold
    d0 = np.full(ell, float(np.sum(c[(~zero) & (xk < 0)]))) + cz @ fixed1
    inc = np.sign(xk[ii]) * c[ii]
    D = np.empty((K + 1, ell))
    D[0] = d0
    if K:
        steps = np.zeros((K, ell))
        steps[np.arange(K), jj] = inc
        D[1:] = d0 + np.cumsum(steps, axis=0)
    V = _interval_values(D, persist, sided)

    R = np.empty(K)
    if K:
        # a crossing joins the previous cluster when it ties at that point
        prev = np.concatenate(([t[0]], t[:-1]))
        joins = np.abs(r[ii] + prev * xk[ii] - b[jj]) <= tol[jj]
        joins[0] = False
        starts = np.flatnonzero(~joins)
        ends = np.append(starts[1:], K)
        single = ends - starts == 1
        has_persist = np.array([cp.size > 0 for cp in persist])
        fast = starts[single & ~has_persist[jj[starts]]]
        # singletons: replace column j of the left state by the tie choice
        rows = np.arange(K + 1)
        arg1 = np.argmax(V, axis=1)
        top1 = V[rows, arg1]
        V2 = V.copy()
        V2[rows, arg1] = -np.inf
        top2 = np.max(V2, axis=1)
        fi, fj = ii[fast], jj[fast]
        base = D[fast, fj] - c[fi] * (xk[fi] < 0)
        if sided == "one":
            tie = base + np.minimum(c[fi], 0.0)
        else:
            tie = np.minimum(np.abs(base), np.abs(base + c[fi]))
        others = np.where(arg1[fast] == fj, top2[fast], top1[fast])
        R[fast] = np.maximum(others, tie)
        slow = np.flatnonzero(~np.isin(starts, fast))
        for q in slow:
            s0, e0 = starts[q], ends[q]
            row = V[s0].copy()
            for j in np.unique(jj[s0:e0]):
                sel = np.arange(s0, e0)[jj[s0:e0] == j]
                left_on = (xk[ii[sel]] < 0).astype(float)
                base_j = D[s0, j] - float(c[ii[sel]] @ left_on)
                row[j] = _best_tie_choice(base_j, np.concatenate((c[ii[sel]], persist[j])), sided)
            R[s0:e0] = np.max(row)

    t_loss = univariate_loss_min(problem.loss, X, y, k, w, problem.reg)
    F = _objective_along(problem, w, k, r, t, R)
    return SweepTable(t, R, F, t_loss)


def _objective_along(problem: FairProblem, w, k: int, r, t, R) -> np.ndarray:
    xk, y = problem.X[:, k], problem.y
    if problem.loss is LossKind.SQUARED:
        e = r - y
        loss = float(xk @ xk) * t ** 2 + 2.0 * float(xk @ e) * t + float(e @ e)
    else:
        loss = np.empty(t.size)
        step = max(1, LOGISTIC_CHUNK // max(1, xk.size))
        for s in range(0, t.size, step):
            v = r[None, :] + t[s:s + step, None] * xk[None, :]
            loss[s:s + step] = np.sum(eval_loss(problem.loss, v, y[None, :]), axis=1)
    rest = reg_terms(problem.reg, w)
    reg = float(np.sum(rest) - rest[k]) + reg_terms(problem.reg, t)
    if problem.constrained:
        return np.where(R <= problem.spec.eps + CONSTRAINT_SLACK, loss + reg, np.inf)
    return loss + reg + problem.lam * R


def _pick(ts: np.ndarray, Fs: np.ndarray) -> int:
    best = np.min(Fs)
    if not np.isfinite(best):
        return -1
    near = np.flatnonzero(Fs <= best + 1e-12 * max(1.0, abs(best)))
    # prefer the smallest |t|, then the smallest t
    return int(near[np.lexsort((ts[near], np.abs(ts[near])))[0]])


def cd_update(problem: FairProblem, w, k: int, tie_tol: float = TIE_TOL) -> tuple[float, float]:
    """Best value of ``w_k`` with the other coordinates fixed.

    Candidates are the crossings, the loss-only minimizer and the current
    ``w_k``.  The returned objective is recomputed from scratch.
    """
    w = np.asarray(w, dtype=float)
    tab = coordinate_sweep(problem, w, k, tie_tol)
    extra = np.array([tab.t_loss, w[k]])
    Fx = np.empty(2)
    for q, val in enumerate(extra):
        wq = w.copy()
        wq[k] = val
        Fx[q] = problem.value(wq, tie_tol)
    ts = np.concatenate((tab.t, extra))
    Fs = np.concatenate((tab.F, Fx))
    q = _pick(ts, Fs)
    if q < 0:
        return float(w[k]), problem.value(w, tie_tol)
    wn = w.copy()
    wn[k] = ts[q]
    return float(ts[q]), problem.value(wn, tie_tol)


@dataclass
class CdOptions:
    """``init`` is "relax", "unfair", "zero" or an explicit weight vector."""

    init: object = "zero"
    restarts: int = 1
    seed: int = 0
    max_sweeps: int = 200
    tol: float = 1e-9
    tie_tol: float = TIE_TOL

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")


@dataclass
class CdResult:
    w: np.ndarray
    objective: float
    trace: list[float] = field(default_factory=list)
    sweeps: int = 0
    best_restart: int = 0
    converged: bool = True


def initial_point(problem: FairProblem, init, relax_w=None) -> np.ndarray:
    if isinstance(init, str):
        if init == "zero":
            return np.zeros(problem.n)
        if init == "unfair":
            from .losses import fit_unfair
            return fit_unfair(problem.loss, problem.X, problem.y, problem.reg)
        if init == "relax":
            if relax_w is None:
                from .relax import relaxed_weights
                relax_w = relaxed_weights(problem)
            return np.asarray(relax_w, dtype=float).copy()
        raise ValueError(f"unknown init {init!r}")
    w0 = np.asarray(init, dtype=float).ravel()
    if w0.size != problem.n:
        raise ValueError("initial point has the wrong length")
    return w0.copy()


def _one_run(problem: FairProblem, w0: np.ndarray, rng, opts: CdOptions) -> CdResult:
    w = w0.copy()
    F = problem.value(w, opts.tie_tol)
    trace = [F]
    sweeps = 0
    converged = False
    while sweeps < opts.max_sweeps:
        sweeps += 1
        F_start = F
        for k in rng.permutation(problem.n):
            tk, Fk = cd_update(problem, w, int(k), opts.tie_tol)
            if Fk < F:
                w[k] = tk
                F = Fk
                trace.append(F)
        if not (F_start - F > opts.tol * max(1.0, abs(F_start))) and np.isfinite(F_start):
            converged = True
            break
        if not np.isfinite(F_start) and not np.isfinite(F):
            converged = True
            break
    return CdResult(w, F, trace, sweeps, 0, converged)


def cd_run(problem: FairProblem, opts: CdOptions | None = None, relax_w=None) -> CdResult:
    """Randomized coordinate descent; best of ``opts.restarts`` seeded runs.

    A coordinate update is accepted only when the exact objective strictly
    decreases, so the trace is non-increasing.
    """
    opts = opts or CdOptions()
    w0 = initial_point(problem, opts.init, relax_w)
    seeds = np.random.SeedSequence(opts.seed).spawn(opts.restarts)
    best = None
    for q, ss in enumerate(seeds):
        res = _one_run(problem, w0, np.random.default_rng(ss), opts)
        res.best_restart = q
        if best is None or res.objective < best.objective:
            best = res
    return best
