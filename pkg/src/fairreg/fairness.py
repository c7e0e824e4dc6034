"""Empirical demographic-parity metrics, breakpoint grids and proxies.

Rates use the strict indicator ``v > b``.  For a threshold ``b`` the gap
between groups is written as a linear form ``d(z) = sum_i c_i z_i`` of the
indicators ``z_i = [v_i > b]``; the coefficients ``c_i`` depend on whether the
protected rate is compared against the marginal rate (all rows) or against
the complement group (rows with ``a == 0``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .data import Dataset


@dataclass(frozen=True, eq=False)
class Breakpoints:
    """Strictly increasing thresholds ``b_1 < ... < b_l``."""

    values: np.ndarray

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.values, dtype=float)).ravel()
        if v.size < 1:
            raise ValueError("need at least one breakpoint")
        if not np.all(np.isfinite(v)):
            raise ValueError("breakpoints must be finite")
        if np.any(np.diff(v) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.size

    def __eq__(self, other) -> bool:
        return isinstance(other, Breakpoints) and np.array_equal(self.values, other.values)

    def __hash__(self) -> int:
        return hash(self.values.tobytes())

    @property
    def ell(self) -> int:
        return self.values.size

    @property
    def gaps(self) -> np.ndarray:
        return np.diff(self.values)


def make_grid(lo: float, hi: float, count: int) -> Breakpoints:
    """``count`` equispaced thresholds from ``lo`` to ``hi``.

    Point ``i`` is ``lo + i * ((hi - lo) / (count - 1))``, and the last point
    is exactly ``hi``.
    """
    if count < 1:
        raise ValueError("grid needs count >= 1")
    if count == 1:
        return Breakpoints([lo])
    if not hi > lo:
        raise ValueError("grid needs hi > lo")
    step = (hi - lo) / (count - 1)
    vals = lo + np.arange(count) * step
    vals[-1] = hi
    return Breakpoints(vals)


def parse_grid(text: str) -> Breakpoints:
    """Parse ``lo:hi:count`` or a comma separated list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid must be lo:hi:count, got {text!r}")
        return make_grid(float(parts[0]), float(parts[1]), int(parts[2]))
    return Breakpoints([float(x) for x in text.split(",") if x.strip()])


def widen_thresholds(bks: Breakpoints, count: int, half_width: float) -> Breakpoints:
    """Replace a single threshold by ``count`` equispaced ones around it."""
    if count < 1 or count % 2 == 0:
        raise ValueError("count must be a positive odd integer")
    if bks.ell != 1:
        raise ValueError("widening starts from a single threshold")
    if half_width <= 0:
        raise ValueError("half_width must be positive")
    c = float(bks.values[0])
    if count == 1:
        return Breakpoints([c])
    return make_grid(c - half_width, c + half_width, count)


@dataclass(frozen=True)
class ParityVariant:
    """Which reference rate to compare against and whether to take |.|."""

    comparison: str = "marginal"
    sided: str = "abs"

    def __post_init__(self):
        if self.comparison not in ("marginal", "complement"):
            raise ValueError(f"unknown comparison {self.comparison!r}")
        if self.sided not in ("abs", "one"):
            raise ValueError(f"unknown sidedness {self.sided!r}")

    @property
    def absolute(self) -> bool:
        return self.sided == "abs"


def fairness_coefficients(a, comparison: str) -> np.ndarray:
    """Coefficients ``c`` with rate gap ``= sum_i c_i [v_i > b]``.

    Marginal: ``1/m1 - 1/m`` on protected rows and ``-1/m`` elsewhere.
    Complement: ``1/m1`` on protected rows and ``-1/m0`` elsewhere.
    """
    a = np.asarray(a).astype(int)
    m = a.size
    m1 = int(a.sum())
    m0 = m - m1
    if m1 == 0 or m0 == 0:
        raise ValueError("both sensitive groups must be present")
    if comparison == "marginal":
        return np.where(a == 1, 1.0 / m1 - 1.0 / m, -1.0 / m)
    if comparison == "complement":
        return np.where(a == 1, 1.0 / m1, -1.0 / m0)
    raise ValueError(f"unknown comparison {comparison!r}")


def group_rates(v, ds: Dataset, b: float, comparison: str = "marginal") -> tuple[float, float]:
    """Protected positive rate and the reference rate at threshold ``b``."""
    v = np.asarray(v, dtype=float)
    above = v > b
    prot = float(np.mean(above[ds.a == 1]))
    if comparison == "marginal":
        ref = float(np.mean(above))
    elif comparison == "complement":
        ref = float(np.mean(above[ds.a == 0]))
    else:
        raise ValueError(f"unknown comparison {comparison!r}")
    return prot, ref


def _gaps_from_counts(n1, n0, m1: int, m0: int, comparison: str) -> np.ndarray:
    # integer counts keep equal threshold classes bit-identical across callers
    n1, n0 = np.asarray(n1, dtype=float), np.asarray(n0, dtype=float)
    if comparison == "marginal":
        return n1 / m1 - (n1 + n0) / (m1 + m0)
    if comparison == "complement":
        return n1 / m1 - n0 / m0
    raise ValueError(f"unknown comparison {comparison!r}")


def rate_gaps(v, a, bks: Breakpoints, comparison: str) -> np.ndarray:
    """Rate differences ``d_j`` at every threshold (strict indicators)."""
    v = np.asarray(v, dtype=float)
    a = np.asarray(a).astype(int)
    m1 = int(a.sum())
    m0 = a.size - m1
    if m1 == 0 or m0 == 0:
        raise ValueError("both sensitive groups must be present")
    Z = v[:, None] > bks.values[None, :]
    return _gaps_from_counts(Z[a == 1].sum(axis=0), Z[a == 0].sum(axis=0), m1, m0, comparison)


def dp_ell(v, ds: Dataset, bks: Breakpoints, variant: ParityVariant = ParityVariant()) -> float:
    """Discretized parity gap over the given thresholds.

    The one-sided value is ``max(0, max_j d_j)``.
    """
    d = rate_gaps(v, ds.a, bks, variant.comparison)
    if variant.absolute:
        return float(np.max(np.abs(d)))
    return max(0.0, float(np.max(d)))


def dp_exact(v, ds: Dataset, variant: ParityVariant = ParityVariant()) -> float:
    """Parity gap maximized over every real threshold.

    The rate difference is piecewise constant in ``b`` and only changes at
    prediction values, so it suffices to test one threshold below the
    smallest prediction and each distinct prediction value (the rates are
    right-continuous there).
    """
    v = np.asarray(v, dtype=float)
    a = np.asarray(ds.a).astype(int)
    u = np.unique(v)
    cands = np.concatenate(([u[0] - 1.0], u))
    v1, v0 = np.sort(v[a == 1]), np.sort(v[a == 0])
    if v1.size == 0 or v0.size == 0:
        raise ValueError("both sensitive groups must be present")
    # rows strictly above each candidate, per group
    n1 = v1.size - np.searchsorted(v1, cands, side="right")
    n0 = v0.size - np.searchsorted(v0, cands, side="right")
    d = _gaps_from_counts(n1, n0, v1.size, v0.size, variant.comparison)
    if variant.absolute:
        return float(np.max(np.abs(d)))
    return max(0.0, float(np.max(d)))


def dp1_linear_proxy(w, ds: Dataset) -> float:
    """Absolute difference of the group means of ``w^T x``."""
    v = ds.X @ np.asarray(w, dtype=float)
    return abs(float(np.mean(v[ds.a == 0]) - np.mean(v[ds.a == 1])))


Surrogate = Callable[[np.ndarray], np.ndarray]


def hinge_pair() -> tuple[Surrogate, Surrogate]:
    """The usual hinge surrogates ``max(0, v + 1)`` and ``min(1, v)``."""
    return (lambda v: np.maximum(0.0, v + 1.0)), (lambda v: np.minimum(1.0, v))


def scaled_pair(M: float) -> tuple[Surrogate, Surrogate]:
    """Surrogates ``max(0, v) / M`` and ``min(0, -v) / M``."""
    if M <= 0:
        raise ValueError("M must be positive")
    return (lambda v: np.maximum(0.0, v) / M), (lambda v: np.minimum(0.0, -v) / M)


def convex_proxy_sides(w, ds: Dataset, kappa: Surrogate, delta: Surrogate) -> tuple[float, float]:
    """Left-hand sides of the two surrogate constraints on the parity gap.

    first:  mean_{a=1} kappa(v) + mean_{a=0} kappa(-v) - 1
    second: mean_{a=1} delta(v) + mean_{a=0} delta(-v) + 1

    These are taken as written.  With the hinge pair the second side is
    concave in ``w``; see ``fairreg.proxy.convex_proxy_terms`` for the
    sign-corrected convex version.
    """
    v = ds.X @ np.asarray(w, dtype=float)
    p, q = v[ds.a == 1], -v[ds.a == 0]
    first = float(np.mean(kappa(p)) + np.mean(kappa(q)) - 1.0)
    second = float(np.mean(delta(p)) + np.mean(delta(q)) + 1.0)
    return first, second


def dp1_convex_proxy(w, ds: Dataset, kappa: Surrogate | None = None,
                     delta: Surrogate | None = None) -> float:
    """Smallest ``t`` satisfying both surrogate constraints (hinge pair by default)."""
    if kappa is None or delta is None:
        kappa, delta = hinge_pair()
    return max(convex_proxy_sides(w, ds, kappa, delta))


def relaxed_nat_min_t(w, ds: Dataset, M: float, sided: str = "one") -> float:
    """Least ``t`` of the big-M system with ``0 <= z <= 1`` at a fixed ``w``.

    With ``|v_i| <= M`` the relaxed indicators live in the box
    ``[max(0, v/M), 1 + min(0, v/M)]``.  The gap ``mean_{a=1} z - mean_{a=0} z``
    then ranges over ``[lo, hi]`` with
    ``lo = mean_{a=1} max(0, v)/M + mean_{a=0} max(0, -v)/M - 1``.  The
    one-sided value is ``lo``; the absolute value is ``max(0, lo, -hi)``.
    """
    v = ds.X @ np.asarray(w, dtype=float)
    if np.any(np.abs(v) > M):
        raise ValueError("predictions exceed M; the big-M box is empty")
    p, q = v[ds.a == 1], v[ds.a == 0]
    lo = float(np.mean(np.maximum(0.0, p)) / M + np.mean(np.maximum(0.0, -q)) / M - 1.0)
    if sided == "one":
        return lo
    neg_hi = float(np.mean(np.maximum(0.0, -p)) / M + np.mean(np.maximum(0.0, q)) / M - 1.0)
    return max(0.0, lo, neg_hi)


def lsc_parity(v, coef, bks: Breakpoints, sided: str, tie_tol: float = 1e-9) -> float:
    """Lower-semicontinuous parity value of predictions ``v``.

    Entries with ``|v_i - b_j| <= tie_tol * max(1, |b_j|)`` are ties whose
    indicator may be 0 or 1; they are chosen to make the maximum over
    thresholds as small as possible.  Ties at different thresholds do not
    interact, so the choice splits per threshold; within one threshold only
    the number of tied rows taken from each distinct coefficient value
    matters.  For one-sided gaps the value is ``max_j d_j`` (not clamped).
    """
    v = np.asarray(v, dtype=float)
    coef = np.asarray(coef, dtype=float)
    b = bks.values
    diff = v[:, None] - b[None, :]
    tol = tie_tol * np.maximum(1.0, np.abs(b))[None, :]
    tied = np.abs(diff) <= tol
    base = coef @ ((diff > 0) & ~tied)
    if not tied.any():
        return float(np.max(np.abs(base)) if sided == "abs" else np.max(base))
    vals = np.empty(b.size)
    for j in range(b.size):
        rows = np.flatnonzero(tied[:, j])
        vals[j] = _best_tie_choice(base[j], coef[rows], sided)
    return float(np.max(vals))


def _best_tie_choice(base: float, c: np.ndarray, sided: str) -> float:
    if c.size == 0:
        return abs(base) if sided == "abs" else base
    if sided == "one":
        # take every negative coefficient and no positive one
        return base + float(np.sum(c[c < 0]))
    levels, counts = np.unique(c, return_counts=True)
    # reachable sums: all combinations of per-level counts
    sums = np.array([base])
    for lev, cnt in zip(levels, counts):
        sums = (sums[:, None] + lev * np.arange(cnt + 1)[None, :]).ravel()
        if sums.size > 4096:
            sums = _prune_sums(sums)
    return float(np.min(np.abs(sums)))


def _prune_sums(sums: np.ndarray) -> np.ndarray:
    # keep the distinct sums only; the count stays bounded by the number of
    # distinct (k1, k0) pairs, which is small for two coefficient levels
    return np.unique(np.round(sums, 15))



@dataclass(frozen=True)
class FairnessSpec:
    """Penalized (``lam``) or constrained (``eps``) parity on given thresholds."""

    breakpoints: Breakpoints
    variant: ParityVariant = ParityVariant()
    lam: float | None = None
    eps: float | None = None

    def __post_init__(self):
        if (self.lam is None) == (self.eps is None):
            raise ValueError("give exactly one of lam (penalty) or eps (constraint)")
        if self.lam is not None and not self.lam >= 0:
            raise ValueError("lam must be nonnegative")
        if self.eps is not None and not 0.0 <= self.eps <= 1.0:
            raise ValueError("eps must lie in [0, 1]")

    @classmethod
    def regularized(cls, bks: Breakpoints, lam: float,
                    variant: ParityVariant = ParityVariant()) -> "FairnessSpec":
        return cls(bks, variant, lam=float(lam))

    @classmethod
    def constrained(cls, bks: Breakpoints, eps: float,
                    variant: ParityVariant = ParityVariant()) -> "FairnessSpec":
        return cls(bks, variant, eps=float(eps))

    @property
    def mode(self) -> str:
        return "regularized" if self.lam is not None else "constrained"

    @property
    def ell(self) -> int:
        return self.breakpoints.ell
