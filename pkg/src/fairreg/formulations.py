"""Mixed-integer models of the fair learning problem.

Two formulations share one in-memory representation:

* ``nat``: indicators ``z_ij = [v_i > b_j]`` linked to ``v_i = x_i^T w`` by
  big-M rows ``v_i - b_j <= M z_ij`` and ``v_i - b_j >= -M (1 - z_ij)``.
* ``strong``: ``v_i`` is split into interval portions ``p_i0, ..., p_il``
  with ``v_i = b_1 - p_i0 + sum_{j>=1} p_ij`` and the loss is written as a sum
  of ``l + 1`` perspective terms, one per interval between consecutive
  thresholds.  Its continuous relaxation describes the convex hull of the
  single-observation set.

Fairness enters through rows ``+-d_j(z) <= t`` (or ``<= eps``) with
``d_j(z) = sum_i c_i z_ij``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable

import numpy as np

from .fairness import Breakpoints
from .losses import LossKind, fit_unfair, perspective
from .problem import FairProblem

ZERO_OFFSET_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class ModelIR:
    """A formulation of ``problem`` ready for relaxation or branch-and-bound."""

    problem: FairProblem
    kind: str
    big_m: float | None = None
    chain_cuts: bool = False

    def __post_init__(self):
        if self.kind not in ("nat", "strong"):
            raise ValueError(f"unknown formulation {self.kind!r}")
        if self.big_m is not None and not self.big_m > 0:
            raise ValueError("M must be positive")
        if self.kind == "nat" and self.big_m is None:
            raise ValueError("the big-M formulation needs M")
        if (self.kind == "strong" and self.problem.loss is LossKind.LOGISTIC
                and self.big_m is None):
            raise ValueError("the strong formulation with logistic loss needs M: the loss "
                             "grows only linearly, so p_i0 <= M(1 - z_i1) and "
                             "p_il <= M z_il must be added")

    @property
    def m(self) -> int:
        return self.problem.m

    @property
    def n(self) -> int:
        return self.problem.n

    @property
    def ell(self) -> int:
        return self.problem.ell

    @property
    def n_binaries(self) -> int:
        return self.m * self.ell

    @property
    def has_t(self) -> bool:
        return not self.problem.constrained

    def row_counts(self) -> dict[str, int]:
        """Number of rows in each constraint block."""
        m, ell = self.m, self.ell
        per = 2 if self.problem.spec.variant.absolute else 1
        rows = {"fairness": per * ell, "chain": m * (ell - 1) if self.chain_cuts else 0}
        if self.kind == "nat":
            rows["bigM_ub"] = m * ell
            rows["bigM_lb"] = m * ell
        else:
            rows["linking"] = m
            rows["couplings"] = m * (ell - 1)
            rows["epigraph"] = m
            logistic = self.problem.loss is LossKind.LOGISTIC
            rows["bigM_tail"] = 2 * m if logistic else 0
        return rows

    def var_counts(self) -> dict[str, int]:
        out = {"w": self.n, "z": self.m * self.ell, "t": int(self.has_t)}
        if self.kind == "strong":
            out["p"] = self.m * (self.ell + 1)
            out["s"] = self.m
        return out


def build_nat(problem: FairProblem, M: float) -> ModelIR:
    """Big-M formulation with ``m * l`` indicator variables."""
    if not M > 0:
        raise ValueError("M must be positive")
    return ModelIR(problem, "nat", float(M))


def build_strong(problem: FairProblem, M_logistic: float | None = None) -> ModelIR:
    """Extended perspective formulation; logistic loss requires ``M_logistic``."""
    if problem.loss is LossKind.SQUARED:
        M_logistic = None if M_logistic is None else float(M_logistic)
    return ModelIR(problem, "strong", M_logistic)


def add_chain_cuts(model: ModelIR) -> ModelIR:
    """Append ``z_i,j+1 <= z_ij``; no rows are added when ``l = 1``."""
    return replace(model, chain_cuts=True)


def check_barV_membership(v: float, z, bks: Breakpoints) -> bool:
    """Whether ``(v - b_j) z_j >= 0`` and ``(v - b_j)(1 - z_j) <= 0`` for all j."""
    z = np.asarray(z, dtype=float)
    if z.shape != (bks.ell,) or not np.all((z == 0) | (z == 1)):
        raise ValueError("z must be a 0/1 vector with one entry per threshold")
    d = v - bks.values
    return bool(np.all(d * z >= 0) and np.all(d * (1 - z) <= 0))


def derive_bigM(data, bks: Breakpoints, loss: LossKind) -> float:
    """Heuristic ``M = 2 max_ij |w_unfair^T x_i - b_j| + 1``.

    ``data`` is anything with ``X`` and ``y`` (a dataset or a problem).
    ``w_unfair`` minimizes the loss without penalty.  The value is a guess
    at the range of predictions, not a proof that no optimum is cut off.
    """
    X = np.asarray(data.X, dtype=float)
    w = fit_unfair(loss, X, data.y)
    v = X @ w
    return float(2.0 * np.max(np.abs(v[:, None] - bks.values[None, :])) + 1.0)


def ridge_radius(problem: FairProblem) -> float:
    """Euclidean radius containing every optimal ``w`` under a ridge penalty.

    Every optimum has ``F(w*) <= F(0)``, and the loss is nonnegative, so
    ``mu ||w*||^2 <= F(0) - min(lam * R)``.
    """
    reg = problem.reg
    if reg.kind != "ridge" or not reg.mu > 0:
        raise ValueError("needs a ridge penalty with mu > 0")
    f0 = problem.value(np.zeros(problem.n))
    if not np.isfinite(f0):
        raise ValueError("w = 0 is infeasible, no bound available")
    low = 0.0
    if not problem.constrained and problem.sided == "one":
        low = -problem.lam * float(np.sum(np.abs(problem.coef)))
    return float(np.sqrt(max(f0 - low, 0.0) / reg.mu))


def ridge_bigM(problem: FairProblem) -> float:
    """A valid ``M`` when a ridge penalty bounds every optimal ``w``."""
    xmax = float(np.max(np.linalg.norm(problem.X, axis=1)))
    return float(xmax * ridge_radius(problem) + np.max(np.abs(problem.bks)) + 1e-6)


def transform_breakpoints(bks: Breakpoints, g: Callable[[np.ndarray], np.ndarray]) -> Breakpoints:
    """Map thresholds through a link ``g``; the image must stay increasing."""
    vals = np.asarray(g(bks.values), dtype=float)
    if vals.shape != bks.values.shape or np.any(np.diff(vals) <= 0) or not np.all(np.isfinite(vals)):
        raise ValueError("link is not strictly increasing on the breakpoints")
    return Breakpoints(vals)


def lift_point(v: float, z, bks: Breakpoints) -> np.ndarray:
    """Interval portions ``p_0, ..., p_l`` of ``v`` for the strong model.

    ``p_0 = max(0, b_1 - v)``, ``p_j = max(0, min(v, b_j+1) - b_j)`` for
    interior ``j`` and ``p_l = max(0, v - b_l)``.  With binary ``z`` in the
    closed indicator set this satisfies every row of the strong model and
    makes the perspective sum equal ``L(v)``.
    """
    b = bks.values
    ell = b.size
    p = np.zeros(ell + 1)
    p[0] = max(0.0, b[0] - v)
    for j in range(1, ell):
        p[j] = max(0.0, min(v, b[j]) - b[j - 1])
    p[ell] = max(0.0, v - b[-1])
    return p


def strong_pieces(z: np.ndarray, p: np.ndarray, bks: Breakpoints):
    """Weights ``zeta``, offsets ``u`` and shifts of the ``l + 1`` perspective terms.

    ``z`` is ``m x l`` and ``p`` is ``m x (l + 1)``.  Term 0 has weight
    ``1 - z_1`` and offset ``-p_0``; interior term ``j`` has weight
    ``z_j - z_j+1`` and offset ``p_j - (b_j+1 - b_j) z_j+1``; the last term has
    weight ``z_l`` and offset ``p_l``.
    """
    z = np.atleast_2d(np.asarray(z, dtype=float))
    p = np.atleast_2d(np.asarray(p, dtype=float))
    b = bks.values
    ell = b.size
    gaps = np.diff(b)
    zeta = np.empty((z.shape[0], ell + 1))
    u = np.empty_like(zeta)
    zeta[:, 0] = 1.0 - z[:, 0]
    u[:, 0] = -p[:, 0]
    for k in range(1, ell):
        zeta[:, k] = z[:, k - 1] - z[:, k]
        u[:, k] = p[:, k] - gaps[k - 1] * z[:, k]
    zeta[:, ell] = z[:, ell - 1]
    u[:, ell] = p[:, ell]
    shift = np.concatenate(([b[0]], b))
    return zeta, u, shift


def strong_loss(loss: LossKind, y, z, p, bks: Breakpoints) -> np.ndarray:
    """Per-observation sum of the perspective terms.

    Solver output leaves offsets of order 1e-10 on terms whose weight is 0;
    those are read as the closure point ``h(0, 0) = 0`` instead of +inf.
    """
    zeta, u, shift = strong_pieces(z, p, bks)
    zeta = np.clip(zeta, 0.0, None)
    u = np.where((zeta == 0) & (np.abs(u) <= ZERO_OFFSET_TOL), 0.0, u)
    y = np.asarray(y, dtype=float).reshape(-1, 1)
    return perspective(loss, u, zeta, shift[None, :], y).sum(axis=1)


def strong_violation(model: ModelIR, w, z, p) -> float:
    """Largest violation of the linear rows of the strong model at a point."""
    pr = model.problem
    bks = pr.spec.breakpoints
    z = np.atleast_2d(np.asarray(z, dtype=float))
    p = np.atleast_2d(np.asarray(p, dtype=float))
    b = bks.values
    v = pr.X @ np.asarray(w, dtype=float)
    viol = [np.abs(v - (b[0] - p[:, 0] + p[:, 1:].sum(axis=1))).max(),
            np.max(-z), np.max(z - 1), np.max(-p[:, 0]), np.max(-p[:, -1])]
    gaps = np.diff(b)
    for k in range(1, b.size):
        viol.append(np.max(gaps[k - 1] * z[:, k] - p[:, k]))
        viol.append(np.max(p[:, k] - gaps[k - 1] * z[:, k - 1]))
    zeta, _, _ = strong_pieces(z, p, bks)
    viol.append(np.max(-zeta))
    if model.big_m is not None:
        viol.append(np.max(p[:, 0] - model.big_m * (1 - z[:, 0])))
        viol.append(np.max(p[:, -1] - model.big_m * z[:, -1]))
    if model.chain_cuts and b.size > 1:
        viol.append(np.max(z[:, 1:] - z[:, :-1]))
    return float(max(0.0, max(viol)))


def fairness_rows(model: ModelIR, z) -> np.ndarray:
    """Values ``d_j(z)`` of the linear gap at every threshold."""
    return model.problem.coef @ np.atleast_2d(np.asarray(z, dtype=float))


def model_t(model: ModelIR, z) -> float:
    """Smallest ``t`` allowed by the fairness rows at ``z``."""
    d = fairness_rows(model, z)
    if model.problem.spec.variant.absolute:
        return float(np.max(np.abs(d)))
    return float(np.max(d))


# ---------------------------------------------------------------- LP export

def _num(x: float) -> str:
    return repr(float(x))


def _lin(terms) -> str:
    out = []
    for coef, name in terms:
        if coef == 0:
            continue
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        out.append(f"{sign} {name}" if mag == 1 else f"{sign} {_num(mag)} {name}")
    if not out:
        return "0"
    s = " ".join(out)
    return s[2:] if s.startswith("+ ") else s


def _wrap(text: str, width: int = 200) -> list[str]:
    # keep lines short; LP readers accept continuation on the next line
    lines, cur = [], ""
    for tok in text.split(" "):
        if len(cur) + len(tok) + 1 > width and cur:
            lines.append(cur)
            cur = " "
        cur = f"{cur} {tok}" if cur.strip() else f"{cur}{tok}"
    lines.append(cur)
    return lines


def export_lp(model: ModelIR, path) -> dict[str, int]:
    """Write the mixed-integer model in LP format.

    Only squared-error models can be written: the logistic loss has no
    representation in the format.  Perspective terms become rotated cone
    rows ``r^2 <= q * zeta``.  Returns the written dimensions.
    """
    pr = model.problem
    if pr.loss is not LossKind.SQUARED:
        raise ValueError("LP export supports squared-error models only")
    if pr.reg.active and pr.reg.kind == "reverse_huber":
        raise ValueError("LP export does not support the reverse Huber penalty")
    m, n, ell = pr.m, pr.n, pr.ell
    b = pr.bks
    X, y, c = pr.X, pr.y, pr.coef
    w = [f"w_{k}" for k in range(n)]

    def z(i, j):  # j is 1-based
        return f"z_{i}_{j}"

    obj_lin, obj_quad = [], []
    rows: list[tuple[str, list, str, float, str]] = []  # name, linear terms, sense, rhs, quad
    bounds = [f" {v} free" for v in w]
    free = []

    if model.kind == "nat":
        for i in range(m):
            ri = f"r_{i}"
            free.append(ri)
            rows.append((f"res_{i}", [(1.0, ri)] + [(-X[i, k], w[k]) for k in range(n)],
                         "=", -y[i], ""))
            obj_quad.append(f"2 {ri}^2")
            for j in range(1, ell + 1):
                xw = [(X[i, k], w[k]) for k in range(n)]
                rows.append((f"bigM_ub_{i}_{j}", xw + [(-model.big_m, z(i, j))], "<=", b[j - 1], ""))
                rows.append((f"bigM_lb_{i}_{j}", xw + [(-model.big_m, z(i, j))], ">=",
                             b[j - 1] - model.big_m, ""))
    else:
        gaps = np.diff(b)
        shift = np.concatenate(([b[0]], b))
        for i in range(m):
            pi = [f"p_{i}_{j}" for j in range(ell + 1)]
            si = f"s_{i}"
            free.append(si)
            obj_lin.append((1.0, si))
            rows.append((f"link_{i}", [(X[i, k], w[k]) for k in range(n)] + [(1.0, pi[0])]
                         + [(-1.0, pi[j]) for j in range(1, ell + 1)], "=", b[0], ""))
            for j in range(1, ell):
                rows.append((f"cpl_lo_{i}_{j}", [(1.0, pi[j]), (-gaps[j - 1], z(i, j + 1))], ">=", 0.0, ""))
                rows.append((f"cpl_hi_{i}_{j}", [(1.0, pi[j]), (-gaps[j - 1], z(i, j))], "<=", 0.0, ""))
            epi = [(1.0, si)]
            for k in range(ell + 1):
                e, r, q = f"zeta_{i}_{k}", f"r_{i}_{k}", f"q_{i}_{k}"
                free.append(r)
                bounds.append(f" 0 <= {e} <= 1")
                if k == 0:
                    rows.append((f"wgt_{i}_{k}", [(1.0, e), (1.0, z(i, 1))], "=", 1.0, ""))
                    u = [(1.0, pi[0])]  # r - (...) zeta - u = 0 with u = -p_0
                elif k < ell:
                    rows.append((f"wgt_{i}_{k}", [(1.0, e), (-1.0, z(i, k)), (1.0, z(i, k + 1))],
                                 "=", 0.0, ""))
                    u = [(-1.0, pi[k]), (gaps[k - 1], z(i, k + 1))]
                else:
                    rows.append((f"wgt_{i}_{k}", [(1.0, e), (-1.0, z(i, ell))], "=", 0.0, ""))
                    u = [(-1.0, pi[ell])]
                rows.append((f"off_{i}_{k}", [(1.0, r), (-(shift[k] - y[i]), e)] + u, "=", 0.0, ""))
                rows.append((f"cone_{i}_{k}", [], "<=", 0.0, f"[ {r}^2 - {q} * {e} ]"))
                epi.append((-1.0, q))
            rows.append((f"epi_{i}", epi, ">=", 0.0, ""))

    if model.has_t:
        free.append("t")
        if pr.lam:
            obj_lin.append((pr.lam, "t"))
    for j in range(1, ell + 1):
        d = [(c[i], z(i, j)) for i in range(m)]
        neg = [(-c[i], z(i, j)) for i in range(m)]
        if model.has_t:
            rows.append((f"fair_pos_{j}", d + [(-1.0, "t")], "<=", 0.0, ""))
            if pr.spec.variant.absolute:
                rows.append((f"fair_neg_{j}", neg + [(-1.0, "t")], "<=", 0.0, ""))
        else:
            rows.append((f"fair_pos_{j}", d, "<=", pr.spec.eps, ""))
            if pr.spec.variant.absolute:
                rows.append((f"fair_neg_{j}", neg, "<=", pr.spec.eps, ""))
    if model.chain_cuts:
        for i in range(m):
            for j in range(1, ell):
                rows.append((f"chain_{i}_{j}", [(1.0, z(i, j + 1)), (-1.0, z(i, j))], "<=", 0.0, ""))

    if pr.reg.active:
        if pr.reg.kind == "ridge":
            obj_quad += [f"{_num(2 * pr.reg.mu)} {wk}^2" for wk in w]
        else:
            for k, wk in enumerate(w):
                ak = f"abs_{k}"
                obj_lin.append((pr.reg.mu, ak))
                rows.append((f"abs_pos_{k}", [(1.0, ak), (-1.0, wk)], ">=", 0.0, ""))
                rows.append((f"abs_neg_{k}", [(1.0, ak), (1.0, wk)], ">=", 0.0, ""))

    bounds += [f" {v} free" for v in free]
    bounds += [f" 0 <= {z(i, j)} <= 1" for i in range(m) for j in range(1, ell + 1)]

    lines = [f"\\ fair learning model ({model.kind}), m={m} n={n} l={ell}", "Minimize"]
    parts = [_lin(obj_lin)] if obj_lin or not obj_quad else []
    if obj_quad:
        parts.append("[ " + " + ".join(obj_quad) + " ] / 2")
    objective = "obj: " + " + ".join(parts)
    lines += _wrap(" " + objective)
    lines.append("Subject To")
    for name, lin, sense, rhs, quad in rows:
        body = _lin(lin) if lin else ""
        if quad:
            body = f"{body} + {quad}" if body else quad
        lines += _wrap(f" {name}: {body} {sense} {_num(rhs)}")
    lines.append("Bounds")
    lines += bounds
    lines.append("Binaries")
    binaries = [z(i, j) for i in range(m) for j in range(1, ell + 1)]
    for s in range(0, len(binaries), 10):
        lines.append(" " + " ".join(binaries[s:s + 10]))
    lines.append("End")
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")
    return read_lp_dims(path)


_SECTIONS = {"minimize": "obj", "maximize": "obj", "subject to": "rows", "such that": "rows",
             "st": "rows", "s.t.": "rows", "bounds": "bounds", "binaries": "bin",
             "binary": "bin", "generals": "gen", "general": "gen", "end": "end"}
_NAME = re.compile(r"(?<![\w.])([A-Za-z_]\w*)\b(?!\s*:)")
_KEYWORDS = {"free", "inf", "infinity"}


def read_lp_dims(path) -> dict[str, int]:
    """Count rows, columns and binaries of an LP file (enough for round trips)."""
    section = None
    rows = quad_rows = 0
    names: set[str] = set()
    binaries: set[str] = set()
    text = Path(path).read_text(encoding="ascii")
    for raw in text.splitlines():
        line = raw.split("\\", 1)[0].strip()
        if not line:
            continue
        key = line.lower()
        if key in _SECTIONS:
            section = _SECTIONS[key]
            continue
        if section == "rows" and re.match(r"^[A-Za-z_][\w.]*\s*:", line):
            rows += 1
            quad_rows += "[" in line
        toks = [t for t in _NAME.findall(line) if t.lower() not in _KEYWORDS]
        names.update(toks)
        if section == "bin":
            binaries.update(toks)
    return {"rows": rows, "quadratic_rows": quad_rows, "cols": len(names),
            "binaries": len(binaries)}
