"""Best-first branch-and-bound on the indicator variables, and a grid oracle.

Node relaxations are solved by one compiled ``RelaxationEngine`` whose
``z`` bounds are parameters.  Branching fixes the most fractional ``z_ij``
and propagates the chain implications ``z_ij = 1 => z_ij' = 1 (j' < j)`` and
``z_ij = 0 => z_ij' = 0 (j' > j)``, valid because thresholds increase.
Incumbents are always scored with the exact objective.
"""

from __future__ import annotations

import heapq
import itertools
import time
from dataclasses import dataclass, field

import numpy as np

from .cd import CdOptions, cd_run
from .fairness import lsc_parity
from .formulations import ModelIR
from .losses import eval_loss, fit_unfair, reg_terms
from .problem import CONSTRAINT_SLACK, FairProblem
from .relax import RelaxationEngine, SolveOptions

INT_TOL = 1e-6
EXACT_TIE_TOL = 1e-7


@dataclass
class BnbOptions:
    time_limit: float | None = None
    gap_tol: float = 1e-6
    node_limit: int | None = None
    branching: str = "most_fractional"
    polish: bool = True
    initial: list = field(default_factory=list)
    solve: SolveOptions = field(default_factory=SolveOptions)

    def __post_init__(self):
        if not self.gap_tol > 0:
            raise ValueError("gap tolerance must be positive")
        if self.branching != "most_fractional":
            raise ValueError("only most-fractional branching is implemented")


@dataclass
class MioResult:
    w: np.ndarray | None
    obj_ub: float
    obj_lb: float
    nodes: int
    wall_time: float
    status: str
    root_bound: float = -np.inf
    bound_log: list = field(default_factory=list)
    model_t: float | None = None

    @property
    def gap(self) -> float:
        return optimality_gap(self.obj_ub, self.obj_lb)


def optimality_gap(ub: float, lb: float) -> float:
    """``(ub - lb) / max(|ub|, 1e-12)``; +inf without a finite incumbent."""
    if not np.isfinite(ub):
        return np.inf
    return max(0.0, (ub - lb) / max(abs(ub), 1e-12))


def _branch_var(z: np.ndarray, lo: np.ndarray, hi: np.ndarray, coef: np.ndarray):
    free = lo < hi
    frac = np.where(free, np.minimum(np.abs(z), np.abs(1 - z)), -1.0)
    best = frac.max()
    if best <= INT_TOL:
        return None
    cand = np.argwhere(frac >= best - 1e-12)
    # ties: larger |c_i| first, then row-major order
    key = [(-abs(coef[i]), i, j) for i, j in cand]
    _, i, j = min(key)
    return int(i), int(j)


def solve_mio(model: ModelIR, opts: BnbOptions | None = None) -> MioResult:
    """Search until the relative gap is at most ``opts.gap_tol`` or a limit hits."""
    opts = opts or BnbOptions()
    pr = model.problem
    t0 = time.perf_counter()
    eng = RelaxationEngine(model, opts.solve)
    shape = (pr.m, pr.ell)

    best_w, ub = None, np.inf

    def offer(w, polish=False):
        nonlocal best_w, ub
        if w is None or not np.all(np.isfinite(w)):
            return
        w = np.asarray(w, dtype=float)
        val = pr.value(w, EXACT_TIE_TOL)
        # polish the root point and every node point that improves
        polish = polish or val < ub
        if polish and opts.polish and not pr.constrained and np.isfinite(val):
            res = cd_run(pr, CdOptions(init=w, max_sweeps=50, tie_tol=EXACT_TIE_TOL))
            if res.objective < val:
                w, val = res.w, res.objective
        if val < ub:
            best_w, ub = w.copy(), val

    for w in opts.initial:
        offer(w)

    counter = itertools.count()
    heap = []
    log = []
    nodes = 0
    lost = np.inf          # bounds of nodes dropped without being resolved
    status = None

    def expand(lo, hi, parent_bound, depth):
        nonlocal nodes, lost
        nodes += 1
        sol = eng.solve(lo, hi)
        if sol.status in ("error", "limit", "unbounded"):
            lost = min(lost, parent_bound)
            return None
        raw = sol.bound()
        if parent_bound > -np.inf:
            log.append((parent_bound, raw))
        if sol.status == "infeasible":
            return None
        bound = max(raw, parent_bound)
        offer(sol.w, polish=depth == 0)
        return sol, bound

    lo0, hi0 = np.zeros(shape), np.ones(shape)
    root = expand(lo0, hi0, -np.inf, 0)
    root_bound = root[1] if root else (np.inf if lost == np.inf else -np.inf)
    if root is not None:
        heapq.heappush(heap, (root[1], 0, next(counter), lo0, hi0, root[0]))

    pruned_lb = np.inf
    while heap:
        if opts.time_limit is not None and time.perf_counter() - t0 > opts.time_limit:
            status = "TimeLimit"
            break
        if opts.node_limit is not None and nodes >= opts.node_limit:
            status = "NodeLimit"
            break
        bound, negdepth, _, lo, hi, sol = heapq.heappop(heap)
        if np.isfinite(ub) and bound >= ub - opts.gap_tol * max(abs(ub), 1e-12):
            pruned_lb = min(pruned_lb, bound)
            # best-first: every remaining node is at least as high
            for item in heap:
                pruned_lb = min(pruned_lb, item[0])
            heap.clear()
            break
        pick = _branch_var(sol.z, lo, hi, pr.coef)
        if pick is None:
            # integral: the exact objective at sol.w is at most the node value
            continue
        i, j = pick
        depth = -negdepth + 1
        for val in (1.0, 0.0):
            clo, chi = lo.copy(), hi.copy()
            if val == 1.0:
                clo[i, :j + 1] = 1.0
            else:
                chi[i, j:] = 0.0
            if np.any(clo > chi):
                continue
            out = expand(clo, chi, bound, depth)
            if out is None:
                continue
            csol, cbound = out
            if np.isfinite(ub) and cbound >= ub - opts.gap_tol * max(abs(ub), 1e-12):
                pruned_lb = min(pruned_lb, cbound)
                continue
            heapq.heappush(heap, (cbound, -depth, next(counter), clo, chi, csol))

    open_lb = min((item[0] for item in heap), default=np.inf)
    lb = min(ub, pruned_lb, open_lb, lost)
    if status is None:
        status = "Optimal" if lost == np.inf else "GapLimit"
    if not np.isfinite(ub):
        status = "Infeasible" if status in ("Optimal", "GapLimit") else status
    if status == "Optimal" and optimality_gap(ub, lb) > 1e-6 + opts.gap_tol:
        status = "GapLimit"
    mt = None
    if best_w is not None and model.has_t:
        mt = pr.parity(best_w, EXACT_TIE_TOL)
    return MioResult(best_w, ub, lb, nodes, time.perf_counter() - t0, status, root_bound, log,
                     mt)


def _parity_batch(V: np.ndarray, coef: np.ndarray, bks, sided: str, tie_tol: float) -> np.ndarray:
    b = bks.values
    diff = V[:, :, None] - b[None, None, :]
    tol = tie_tol * np.maximum(1.0, np.abs(b))
    tied = np.abs(diff) <= tol[None, None, :]
    d = np.einsum("i,nij->nj", coef, (diff > tol[None, None, :]).astype(float))
    R = np.max(np.abs(d), axis=1) if sided == "abs" else np.max(d, axis=1)
    rows = np.flatnonzero(tied.any(axis=(1, 2)))
    for r in rows:
        R[r] = lsc_parity(V[r], coef, bks, sided, tie_tol)
    return R


def brute_force_exact(problem: FairProblem, box=None, step: float = 1e-3,
                      chunk: int = 200_000, tie_tol: float = 1e-9) -> tuple[np.ndarray, float]:
    """Minimize the exact objective over a regular grid (``n <= 2`` only).

    ``box`` is a half-width (scalar) or ``(lo, hi)`` arrays; by default
    ``3 * max|w_unfair|``.  The grid always contains ``w = 0`` when the box
    straddles it, because points are multiples of ``step``.
    """
    n = problem.n
    if n > 2:
        raise ValueError("the grid oracle is only meant for n <= 2")
    if box is None:
        wu = fit_unfair(problem.loss, problem.X, problem.y, problem.reg)
        box = 3.0 * max(float(np.max(np.abs(wu))), step)
    if np.isscalar(box):
        lo, hi = -np.full(n, float(box)), np.full(n, float(box))
    else:
        lo, hi = (np.asarray(v, dtype=float).ravel() for v in box)
    axes = [step * np.arange(np.ceil(lo[k] / step), np.floor(hi[k] / step) + 1) for k in range(n)]
    sizes = [a.size for a in axes]
    total = int(np.prod(sizes))
    best_val, best_w = np.inf, None
    for s in range(0, total, chunk):
        idx = np.arange(s, min(total, s + chunk))
        W = np.stack([axes[k][np.unravel_index(idx, sizes)[k]] for k in range(n)], axis=1)
        V = W @ problem.X.T
        loss = np.sum(eval_loss(problem.loss, V, problem.y[None, :]), axis=1)
        loss = loss + np.sum(reg_terms(problem.reg, W), axis=1)
        R = _parity_batch(V, problem.coef, problem.spec.breakpoints, problem.sided, tie_tol)
        if problem.constrained:
            F = np.where(R <= problem.spec.eps + CONSTRAINT_SLACK, loss, np.inf)
        else:
            F = loss + problem.lam * R
        q = int(np.argmin(F))
        if F[q] < best_val:
            best_val, best_w = float(F[q]), W[q].copy()
    return best_w, best_val
