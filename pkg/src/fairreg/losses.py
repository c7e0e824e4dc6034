"""Loss functions, their perspectives, and convex regularizers.

Two losses are supported: squared error ``(v - y)**2`` for regression and the
logistic loss ``log(1 + exp(-y v))`` for classification with labels in
{-1, +1}.  The perspective ``z * L(b + u / z, y)`` is closed at ``z = 0`` by
its recession function, which is what the strong formulations need.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy.special import expit


class LossKind(enum.Enum):
    SQUARED = "squared"
    LOGISTIC = "logistic"

    @classmethod
    def parse(cls, name: str | "LossKind") -> "LossKind":
        if isinstance(name, LossKind):
            return name
        aliases = {"ls": cls.SQUARED, "squared": cls.SQUARED, "regression": cls.SQUARED,
                   "logit": cls.LOGISTIC, "logistic": cls.LOGISTIC,
                   "classification": cls.LOGISTIC}
        try:
            return aliases[name.lower()]
        except KeyError:
            raise ValueError(f"unknown loss {name!r}") from None


def _check_labels(kind: LossKind, y: np.ndarray) -> None:
    if kind is LossKind.LOGISTIC and not np.all(np.abs(y) == 1):
        raise ValueError("logistic loss needs labels in {-1, +1}")


def eval_loss(kind: LossKind, v, y) -> np.ndarray:
    """Elementwise loss ``L(v, y)``."""
    v = np.asarray(v, dtype=float)
    y = np.asarray(y, dtype=float)
    if kind is LossKind.SQUARED:
        return (v - y) ** 2
    _check_labels(kind, y)
    return np.logaddexp(0.0, -y * v)


def loss_grad(kind: LossKind, v, y) -> np.ndarray:
    """Derivative of the loss in ``v``."""
    v = np.asarray(v, dtype=float)
    y = np.asarray(y, dtype=float)
    if kind is LossKind.SQUARED:
        return 2.0 * (v - y)
    return -y * expit(-y * v)


def loss_hess(kind: LossKind, v, y) -> np.ndarray:
    """Second derivative of the loss in ``v``."""
    v = np.asarray(v, dtype=float)
    y = np.asarray(y, dtype=float)
    if kind is LossKind.SQUARED:
        return np.full(np.broadcast(v, y).shape, 2.0)
    s = expit(y * v)
    return s * (1.0 - s)


def recession(kind: LossKind, u, y) -> np.ndarray:
    """Recession function of ``L(., y)`` in direction ``u``.

    Squared error grows faster than linearly, so the recession is +inf away
    from zero.  The logistic loss grows like ``max(0, -y u)``.
    """
    u = np.asarray(u, dtype=float)
    y = np.asarray(y, dtype=float)
    if kind is LossKind.SQUARED:
        return np.where(u == 0.0, 0.0, np.inf)
    return np.maximum(0.0, -y * u)


def perspective(kind: LossKind, u, z, b, y) -> np.ndarray:
    """Closed perspective ``z * L(b + u / z, y)`` with recession at ``z = 0``."""
    u, z, b, y = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (u, z, b, y)))
    if np.any(z < 0):
        raise ValueError("perspective needs z >= 0")
    out = np.empty(u.shape)
    pos = z > 0
    zp = z[pos]
    out[pos] = zp * eval_loss(kind, b[pos] + u[pos] / zp, y[pos])
    out[~pos] = recession(kind, u[~pos], y[~pos])
    return out


@dataclass(frozen=True)
class Regularizer:
    """Convex penalty on the weights.

    kind is one of ``none``, ``ridge`` (mu * ||w||^2), ``l1`` (mu * ||w||_1)
    or ``reverse_huber`` (mu * sum of the reverse Huber function with
    parameter d, the convex envelope of ``w^2 + d * [w != 0]``).
    """

    kind: str = "none"
    mu: float = 0.0
    d: float = 1.0

    def __post_init__(self):
        if self.kind not in ("none", "ridge", "l1", "reverse_huber"):
            raise ValueError(f"unknown regularizer {self.kind!r}")
        if self.mu < 0:
            raise ValueError("regularizer weight must be nonnegative")
        if self.kind == "reverse_huber" and self.d <= 0:
            raise ValueError("reverse Huber parameter must be positive")

    @property
    def active(self) -> bool:
        return self.kind != "none" and self.mu > 0


def reverse_huber(w, d: float) -> np.ndarray:
    """``min over zeta in [0, 1]`` of ``w^2 / zeta + d * zeta``."""
    w = np.abs(np.asarray(w, dtype=float))
    r = np.sqrt(d)
    return np.where(w <= r, 2.0 * w * r, w ** 2 + d)


def reg_terms(reg: Regularizer, w) -> np.ndarray:
    """Per-coordinate penalty values."""
    w = np.asarray(w, dtype=float)
    if not reg.active:
        return np.zeros_like(w)
    if reg.kind == "ridge":
        return reg.mu * w ** 2
    if reg.kind == "l1":
        return reg.mu * np.abs(w)
    return reg.mu * reverse_huber(w, reg.d)


def reg_value(reg: Regularizer, w) -> float:
    return float(np.sum(reg_terms(reg, w)))


def _minimize_convex_1d(f, grad, lo: float, hi: float, tol: float = 1e-12) -> float:
    # bisection on a monotone (sub)gradient inside a bracket
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol * max(1.0, abs(mid)):
            break
        if grad(mid) > 0:
            hi = mid
        else:
            lo = mid
    cands = [lo, 0.5 * (lo + hi), hi]
    return min(cands, key=f)


def univariate_loss_min(kind: LossKind, X: np.ndarray, y: np.ndarray, k: int, w,
                        reg: Regularizer | None = None, bound: float = 1e8) -> float:
    """Minimize ``sum_i L(x_i^T w, y_i) + reg(w)`` over coordinate ``k`` alone.

    Squared error without a nonsmooth penalty has a closed form.  Otherwise
    the 1D problem is convex and is solved by a safeguarded Newton step on
    the smooth part, or by bisection on the subgradient.  When the minimizer
    does not exist (a separating direction for the logistic loss) the value
    is capped at +-``bound``.
    """
    reg = reg or Regularizer()
    X = np.asarray(X, dtype=float)
    w = np.asarray(w, dtype=float)
    xk = X[:, k]
    r = X @ w - xk * w[k]
    sxx = float(xk @ xk)
    if sxx == 0.0:
        # the loss does not depend on w_k; only the penalty does
        return 0.0 if reg.active else float(w[k])

    if kind is LossKind.SQUARED:
        a = sxx
        c = float(xk @ (y - r))
        if not reg.active:
            return c / a
        if reg.kind == "ridge":
            return c / (a + reg.mu)
        if reg.kind == "l1":
            # minimize a t^2 - 2 c t + mu |t|
            return float(np.sign(c) * max(abs(c) - reg.mu / 2.0, 0.0) / a)

    def smooth(t):
        return float(np.sum(eval_loss(kind, r + t * xk, y)))

    def smooth_grad(t):
        return float(xk @ loss_grad(kind, r + t * xk, y))

    def f(t):
        return smooth(t) + reg_value(reg, [t])

    def g(t):
        # right derivative; enough for bisection on a convex function
        out = smooth_grad(t)
        if not reg.active:
            return out
        if reg.kind == "ridge":
            return out + 2.0 * reg.mu * t
        if reg.kind == "l1":
            return out + reg.mu * (1.0 if t >= 0 else -1.0)
        rd = np.sqrt(reg.d)
        if abs(t) <= rd:
            return out + reg.mu * 2.0 * rd * (1.0 if t >= 0 else -1.0)
        return out + reg.mu * 2.0 * t

    if kind is LossKind.LOGISTIC and not reg.active:
        t = float(w[k])
        for _ in range(100):
            gr = smooth_grad(t)
            if abs(gr) <= 1e-10:
                return t
            h = float(xk ** 2 @ loss_hess(kind, r + t * xk, y))
            if h <= 1e-14:
                break
            step = gr / h
            t_new = t - step
            # damped step keeps the objective decreasing
            while f(t_new) > f(t) and abs(step) > 1e-16:
                step *= 0.5
                t_new = t - step
            if abs(t_new) > bound:
                break
            t = t_new

    # bracket, then bisect
    lo, hi = -1.0, 1.0
    while g(lo) > 0 and lo > -bound:
        lo *= 2.0
    while g(hi) < 0 and hi < bound:
        hi *= 2.0
    lo, hi = max(lo, -bound), min(hi, bound)
    return _minimize_convex_1d(f, g, lo, hi)


def fit_unfair(kind: LossKind, X: np.ndarray, y: np.ndarray,
               reg: Regularizer | None = None) -> np.ndarray:
    """Unconstrained minimizer of the empirical loss plus penalty."""
    reg = reg or Regularizer()
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = X.shape[1]
    if kind is LossKind.SQUARED and not reg.active:
        return np.linalg.lstsq(X, y, rcond=None)[0]
    if kind is LossKind.SQUARED and reg.kind == "ridge":
        return np.linalg.solve(X.T @ X + reg.mu * np.eye(n), X.T @ y)
    _check_labels(kind, y)
    if reg.kind in ("none", "ridge"):
        mu = reg.mu if reg.active else 0.0

        def fun(w):
            v = X @ w
            return (float(np.sum(eval_loss(kind, v, y))) + mu * float(w @ w),
                    X.T @ loss_grad(kind, v, y) + 2.0 * mu * w)

        res = optimize.minimize(fun, np.zeros(n), jac=True, method="L-BFGS-B",
                                options={"maxiter": 5000, "gtol": 1e-10, "ftol": 1e-15})
        return res.x
    # nonsmooth penalties: cyclic coordinate minimization, exact per coordinate
    w = np.zeros(n)
    prev = np.inf
    for _ in range(2000):
        for k in range(n):
            w[k] = univariate_loss_min(kind, X, y, k, w, reg)
        cur = float(np.sum(eval_loss(kind, X @ w, y))) + reg_value(reg, w)
        if prev - cur <= 1e-13 * max(1.0, abs(cur)):
            break
        prev = cur
    return w
