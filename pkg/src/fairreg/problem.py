"""The exact fair learning problem shared by every solver.

``value(w)`` is the objective all methods are judged by: empirical loss plus
penalty plus ``lam`` times the lower-semicontinuous parity term, or, in
constrained mode, loss plus penalty when the parity term is at most ``eps``
and +inf otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .data import Dataset
from .fairness import FairnessSpec, fairness_coefficients, lsc_parity
from .losses import LossKind, Regularizer, eval_loss, fit_unfair, reg_value

CONSTRAINT_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class FairProblem:
    X: np.ndarray
    y: np.ndarray
    coef: np.ndarray
    spec: FairnessSpec
    loss: LossKind = LossKind.SQUARED
    reg: Regularizer = Regularizer()
    a: np.ndarray | None = None

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        y = np.asarray(self.y, dtype=float).ravel()
        coef = np.asarray(self.coef, dtype=float).ravel()
        if not (X.shape[0] == y.size == coef.size):
            raise ValueError("X, y and coef must agree in length")
        if self.loss is LossKind.LOGISTIC and not np.all(np.abs(y) == 1):
            raise ValueError("logistic loss needs labels in {-1, +1}")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "coef", coef)

    @classmethod
    def from_dataset(cls, ds: Dataset, loss: LossKind, spec: FairnessSpec,
                     reg: Regularizer | None = None) -> "FairProblem":
        ds.check_task(loss)
        coef = fairness_coefficients(ds.a, spec.variant.comparison)
        return cls(ds.X, ds.y, coef, spec, loss, reg or Regularizer(), ds.a)

    def with_spec(self, spec: FairnessSpec) -> "FairProblem":
        return replace(self, spec=spec)

    @property
    def m(self) -> int:
        return self.X.shape[0]

    @property
    def n(self) -> int:
        return self.X.shape[1]

    @property
    def ell(self) -> int:
        return self.spec.ell

    @property
    def bks(self) -> np.ndarray:
        return self.spec.breakpoints.values

    @property
    def sided(self) -> str:
        return self.spec.variant.sided

    @property
    def lam(self) -> float:
        return self.spec.lam if self.spec.lam is not None else 0.0

    @property
    def constrained(self) -> bool:
        return self.spec.eps is not None

    def loss_value(self, w) -> float:
        """Empirical loss plus penalty."""
        w = np.asarray(w, dtype=float)
        return float(np.sum(eval_loss(self.loss, self.X @ w, self.y))) + reg_value(self.reg, w)

    def parity(self, w, tie_tol: float = 1e-9) -> float:
        v = self.X @ np.asarray(w, dtype=float)
        return lsc_parity(v, self.coef, self.spec.breakpoints, self.sided, tie_tol)

    def value(self, w, tie_tol: float = 1e-9) -> float:
        """Exact objective at ``w``."""
        base = self.loss_value(w)
        r = self.parity(w, tie_tol)
        if self.constrained:
            return base if r <= self.spec.eps + CONSTRAINT_SLACK else np.inf
        return base + self.lam * r

    def unfair_loss(self) -> float:
        """Loss plus penalty of the unconstrained minimizer."""
        return self.loss_value(fit_unfair(self.loss, self.X, self.y, self.reg))
