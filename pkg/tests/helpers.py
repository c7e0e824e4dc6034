"""Random instance builders shared by the tests."""

import numpy as np
from scipy.optimize import minimize_scalar

from fairreg.data import Dataset
from fairreg.fairness import Breakpoints, FairnessSpec, ParityVariant, fairness_coefficients
from fairreg.losses import LossKind, Regularizer, eval_loss, reg_terms
from fairreg.problem import FairProblem

LAMBDAS = (0.01, 0.02, 0.04, 0.05, 0.06, 0.08, 0.10, 0.20, 0.30, 0.50)
EPSILONS = (0.01, 0.02, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.10, 0.20, 0.30, 0.40, 0.50)


def random_groups(rng, m):
    a = np.zeros(m, dtype=int)
    k = int(rng.integers(1, m)) if m > 1 else 1
    a[rng.permutation(m)[:k]] = 1
    return a


def random_breakpoints(rng, ell, lo=0.0, hi=1.0):
    while True:
        b = np.sort(rng.uniform(lo, hi, ell))
        if ell == 1 or np.min(np.diff(b)) > 1e-3:
            return Breakpoints(b)


def random_problem(rng, m, n, ell, loss=LossKind.SQUARED, lam=None, eps=None,
                   variant=None, reg=None, comparison="marginal"):
    X = rng.standard_normal((m, n))
    a = random_groups(rng, m)
    if loss is LossKind.SQUARED:
        y = rng.uniform(0, 1, m)
        bks = random_breakpoints(rng, ell, 0.0, 1.0)
    else:
        y = rng.choice([-1.0, 1.0], m)
        bks = random_breakpoints(rng, ell, -1.0, 1.0)
    variant = variant or ParityVariant(comparison, "abs")
    if eps is not None:
        spec = FairnessSpec.constrained(bks, eps, variant)
    else:
        spec = FairnessSpec.regularized(bks, rng.uniform(0.05, 2.0) if lam is None else lam,
                                        variant)
    coef = fairness_coefficients(a, variant.comparison) if m > 1 else np.array([rng.normal()])
    return FairProblem(X, y, coef, spec, loss, reg or Regularizer(), a)


def single_factor(lam):
    """x = (1, -1), y = (1, 0), a = (1, 0), one threshold at 0, squared error."""
    X = np.array([[1.0], [-1.0]])
    y = np.array([1.0, 0.0])
    a = np.array([1, 0])
    spec = FairnessSpec.regularized(Breakpoints([0.0]), lam, ParityVariant("marginal", "abs"))
    return FairProblem(X, y, fairness_coefficients(a, "marginal"), spec, LossKind.SQUARED,
                       Regularizer(), a)


def toy_dataset(v, a):
    v = np.asarray(v, dtype=float)
    return Dataset(v[:, None], np.zeros(v.size), np.asarray(a))


def brute_1d(problem, lo=-3.0, hi=3.0, step=1e-4):
    grid = step * np.arange(round(lo / step), round(hi / step) + 1)
    return min(problem.value([t]) for t in grid)


def interval_oracle(pr: FairProblem, M=None):
    """Exact optimum of an unregularized m = 1 problem by enumerating the
    interval of v; with ``M`` the predictions are limited to [b_1 - M, b_l + M]."""
    y, c = pr.y[0], pr.coef[0]
    b = pr.bks
    ell = b.size
    f = lambda v: float(eval_loss(pr.loss, v, y))  # noqa: E731
    pad = 60.0 if M is None else M
    edges = np.concatenate(([b[0] - pad], b, [b[-1] + pad]))
    best = np.inf
    for j in range(ell + 1):
        lo, hi = edges[j], edges[j + 1]
        d = c if j > 0 else 0.0
        if pr.sided == "abs":
            R = abs(d)
        else:
            R = max(d, 0.0) if j < ell else d
        if pr.constrained and R > pr.spec.eps:
            continue
        res = minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
        val = min(res.fun, f(lo), f(hi))
        best = min(best, val + (0.0 if pr.constrained else pr.lam * R))
    return best


def grid_values_along(pr, w, k, grid, chunk=20000):
    # strict indicators: never below the lower-semicontinuous value
    xk = pr.X[:, k]
    r = pr.X @ w - xk * w[k]
    rest = reg_terms(pr.reg, w)
    out = np.empty(grid.size)
    for s in range(0, grid.size, chunk):
        t = grid[s:s + chunk]
        V = r[None, :] + t[:, None] * xk[None, :]
        loss = np.sum(eval_loss(pr.loss, V, pr.y[None, :]), axis=1)
        d = np.einsum("i,tij->tj", pr.coef, (V[:, :, None] > pr.bks[None, None, :]).astype(float))
        R = np.max(np.abs(d), axis=1) if pr.sided == "abs" else np.max(d, axis=1)
        out[s:s + chunk] = loss + np.sum(rest) - rest[k] + reg_terms(pr.reg, t) + pr.lam * R
    return out


def random_cd_case(rng):
    loss = LossKind.SQUARED if rng.random() < 0.6 else LossKind.LOGISTIC
    reg = [Regularizer(), Regularizer("ridge", 0.3), Regularizer("l1", 0.2)][int(rng.integers(3))]
    sided = ("abs", "one")[int(rng.integers(2))]
    pr = random_problem(rng, int(rng.integers(2, 10)), int(rng.integers(1, 4)),
                        int(rng.integers(1, 4)), loss, reg=reg,
                        variant=ParityVariant("marginal", sided))
    w = rng.normal(size=pr.n)
    return pr, w, int(rng.integers(pr.n))


def candidate_span(pr, w, k, wk):
    """Interval holding every crossing, the update and the current value, padded by 1."""
    from fairreg.cd import candidate_set
    t, _, _ = candidate_set(pr, w, k)
    lo = min(t.min() if t.size else 0.0, wk, w[k]) - 1.0
    hi = max(t.max() if t.size else 0.0, wk, w[k]) + 1.0
    return lo, hi
