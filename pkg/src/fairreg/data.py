"""Datasets with a binary sensitive attribute, CSV loading and generators.

All randomness goes through ``numpy.random.default_rng(seed)`` (the PCG64
bit generator), so a seed fixes the output on every platform that runs the
same numpy version.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import multivariate_normal

from .losses import LossKind


@dataclass(frozen=True)
class Dataset:
    """Features ``X`` (m x n), targets ``y`` and sensitive flags ``a`` in {0, 1}.

    ``a == 1`` marks the protected group.  ``target_map`` holds the affine
    map ``(lo, hi)`` used when targets were min-max scaled, so the same map
    can be applied to held-out data.
    """

    X: np.ndarray
    y: np.ndarray
    a: np.ndarray
    feature_names: tuple[str, ...] = ()
    target_name: str = "y"
    sensitive_name: str = "a"
    sensitive_values: tuple = (0, 1)
    target_map: tuple[float, float] | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        y = np.asarray(self.y, dtype=float).ravel()
        a = np.asarray(self.a).astype(int).ravel()
        m = X.shape[0]
        if y.shape[0] != m or a.shape[0] != m:
            raise ValueError("X, y and a must have the same number of rows")
        if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
            raise ValueError("features and targets must be finite")
        if not np.all((a == 0) | (a == 1)):
            raise ValueError("sensitive attribute must be 0/1")
        if not (np.any(a == 1) and np.any(a == 0)):
            raise ValueError("single sensitive group: both values of a must be present")
        names = tuple(self.feature_names) or tuple(f"x{k}" for k in range(X.shape[1]))
        if len(names) != X.shape[1]:
            raise ValueError("one feature name per column")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "feature_names", names)

    @property
    def m(self) -> int:
        return self.X.shape[0]

    @property
    def n(self) -> int:
        return self.X.shape[1]

    @property
    def m1(self) -> int:
        return int(np.sum(self.a == 1))

    @property
    def m0(self) -> int:
        return int(np.sum(self.a == 0))

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        return Dataset(self.X[idx], self.y[idx], self.a[idx], self.feature_names,
                       self.target_name, self.sensitive_name, self.sensitive_values,
                       self.target_map)

    def check_task(self, kind: LossKind) -> None:
        if kind is LossKind.LOGISTIC and not np.all(np.abs(self.y) == 1):
            raise ValueError("classification targets must be -1 or +1")


def _parse_float(text: str, row: int, col: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ValueError(f"row {row}, column {col!r}: not a number: {text!r}") from None


def load_csv(path, target: str, sensitive: str, task: str | LossKind = "ls") -> Dataset:
    """Read a numeric CSV with a header row.

    Every column other than ``target`` and ``sensitive`` is a feature.  The
    sensitive column must take exactly two distinct values; the smaller one
    maps to 0 and the larger to 1.
    """
    kind = LossKind.parse(task)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        for col in (target, sensitive):
            if col not in header:
                raise ValueError(f"{path}: missing column {col!r}")
        if target == sensitive:
            raise ValueError("target and sensitive columns must differ")
        rows = []
        for r, rec in enumerate(reader, start=2):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) != len(header):
                raise ValueError(f"row {r}: expected {len(header)} fields, got {len(rec)}")
            rows.append([_parse_float(c, r, header[k]) for k, c in enumerate(rec)])
    if not rows:
        raise ValueError(f"{path}: no data rows")
    data = np.array(rows, dtype=float)
    ti, si = header.index(target), header.index(sensitive)
    feats = [k for k in range(len(header)) if k not in (ti, si)]
    s = data[:, si]
    levels = np.unique(s)
    if levels.size == 1:
        raise ValueError(f"single sensitive group in column {sensitive!r}")
    if levels.size != 2:
        raise ValueError(f"sensitive column {sensitive!r} must take exactly two values, "
                         f"found {levels.size}")
    y = data[:, ti]
    if kind is LossKind.LOGISTIC:
        bad = np.flatnonzero(np.abs(y) != 1)
        if bad.size:
            raise ValueError(f"row {bad[0] + 2}, column {target!r}: classification "
                             f"target must be -1 or +1, got {y[bad[0]]!r}")
    return Dataset(data[:, feats], y, (s == levels[1]).astype(int),
                   tuple(header[k] for k in feats), target, sensitive,
                   (levels[0].item(), levels[1].item()))


def save_csv(ds: Dataset, path) -> None:
    header = list(ds.feature_names) + [ds.target_name, ds.sensitive_name]
    lo, hi = ds.sensitive_values
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i in range(ds.m):
            s = hi if ds.a[i] == 1 else lo
            w.writerow([repr(float(x)) for x in ds.X[i]] + [repr(float(ds.y[i])), s])


def split(ds: Dataset, fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Random split into ``ceil(fraction * m)`` training rows and the rest."""
    if not 0.0 < fraction < 1.0:
        raise ValueError("split fraction must lie in (0, 1)")
    k = math.ceil(fraction * ds.m)
    if k >= ds.m:
        raise ValueError("split leaves no test rows")
    perm = np.random.default_rng(seed).permutation(ds.m)
    tr, te = np.sort(perm[:k]), np.sort(perm[k:])
    for part, idx in (("training", tr), ("test", te)):
        a = ds.a[idx]
        if not (np.any(a == 1) and np.any(a == 0)):
            raise ValueError(f"{part} split misses a sensitive group")
    return ds.subset(tr), ds.subset(te)


def minmax_map(y: np.ndarray) -> tuple[float, float]:
    lo, hi = float(np.min(y)), float(np.max(y))
    return lo, hi


def apply_minmax(y: np.ndarray, mp: tuple[float, float]) -> np.ndarray:
    lo, hi = mp
    if hi == lo:
        return np.zeros_like(np.asarray(y, dtype=float))
    return (np.asarray(y, dtype=float) - lo) / (hi - lo)


def gen_synthetic_regression(n: int, m: int, seed: int) -> tuple[Dataset, np.ndarray]:
    """Linear regression data whose last feature carries no signal.

    The first ``n // 2`` true weights are Unif(-1, 0), the next ``n // 2`` are
    Unif(0, 10) and the last weight is 0.  Features are standard normal,
    noise is 0.1 * N(0, 1), the first ``ceil(3m/4)`` rows are unprotected,
    and targets are min-max scaled to [0, 1].
    """
    if n < 1 or m < 2:
        raise ValueError("need n >= 1 and m >= 2")
    rng = np.random.default_rng(seed)
    h = n // 2
    w = np.zeros(n)
    w[:h] = rng.uniform(-1.0, 0.0, h)
    w[h:2 * h] = rng.uniform(0.0, 10.0, h)
    w[n - 1] = 0.0
    X = rng.standard_normal((m, n))
    raw = X @ w + 0.1 * rng.standard_normal(m)
    a = np.zeros(m, dtype=int)
    a[math.ceil(3 * m / 4):] = 1
    if a.sum() == 0:
        a[-1] = 1
    mp = minmax_map(raw)
    ds = Dataset(X, apply_minmax(raw, mp), a, target_map=mp)
    return ds, w


_ZAFAR_POS = (np.array([2.0, 2.0]), np.array([[5.0, 1.0], [1.0, 5.0]]))
_ZAFAR_NEG = (np.array([-2.0, -2.0]), np.array([[10.0, 1.0], [1.0, 10.0]]))


def gen_zafar_classification(m: int, seed: int, angle: float = math.pi / 4) -> Dataset:
    """Two Gaussian classes with a sensitive flag correlated to the label.

    Labels are uniform on {-1, +1}.  Each point is rotated by ``angle`` and
    the sensitive flag is drawn with probability p(Ax | +1) / (p(Ax | +1) +
    p(Ax | -1)) of being 1.
    """
    if m < 2:
        raise ValueError("need m >= 2")
    rng = np.random.default_rng(seed)
    y = rng.choice(np.array([-1.0, 1.0]), size=m)
    X = np.empty((m, 2))
    pos = y > 0
    X[pos] = rng.multivariate_normal(*_ZAFAR_POS, size=int(pos.sum()))
    X[~pos] = rng.multivariate_normal(*_ZAFAR_NEG, size=int((~pos).sum()))
    c, s = math.cos(angle), math.sin(angle)
    rot = X @ np.array([[c, -s], [s, c]]).T
    p1 = multivariate_normal(*_ZAFAR_POS).pdf(rot)
    p0 = multivariate_normal(*_ZAFAR_NEG).pdf(rot)
    prob = p1 / (p1 + p0)
    # redraw in the rare case one group comes out empty
    while True:
        a = (rng.random(m) < prob).astype(int)
        if 0 < a.sum() < m:
            break
    return Dataset(X, y, a)

