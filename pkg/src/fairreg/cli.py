"""Command-line harness: ``fairreg {gen,fit,sweep,gaps,sweep1d,export-lp}``.

Exit codes: 0 success, 2 configuration error, 3 a solver stopped at a limit
without any feasible result.

All randomness comes from ``--seed``.  Floats are written with ``repr`` so
that CSV files read back to the same values, and wall times are left out
unless ``--timing`` is given, so repeated runs produce identical bytes.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import io
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .bnb import BnbOptions, optimality_gap, solve_mio
from .cd import CdOptions, cd_run
from .data import Dataset, gen_synthetic_regression, gen_zafar_classification, load_csv, save_csv, split
from .fairness import Breakpoints, FairnessSpec, ParityVariant, dp_ell, dp_exact, parse_grid
from .formulations import add_chain_cuts, build_nat, build_strong, derive_bigM, export_lp
from .losses import LossKind, Regularizer, eval_loss, fit_unfair
from .problem import FairProblem
from .proxy import fit_proxy
from .relax import default_big_m, relaxed_weights, solve_relaxation, sweep_objective_1d

METHODS = ("relax", "relax-l2", "relax-sparse", "cd-relax", "cd-acc", "cd-fair", "mio",
           "nat-relax", "proxy-linear", "proxy-convex")

REPORT_FIELDS = ("method", "mode", "lam", "eps", "seed", "status", "train_loss", "test_loss",
                 "unfair_loss", "rel_loss_increase", "dp_ell", "dp_exact", "test_dp_ell",
                 "objective", "lower_bound", "root_gap", "opt_gap", "nodes", "big_m",
                 "near_big_m", "error")

BISECTION_STEPS = 12


class ConfigError(Exception):
    pass


class LimitError(Exception):
    pass


# ---------------------------------------------------------------- arguments

def _add_data(p):
    g = p.add_argument_group("data")
    g.add_argument("--data", help="CSV file with a header row")
    g.add_argument("--target", default="y")
    g.add_argument("--sensitive", default="a")
    g.add_argument("--generator", choices=("synth", "zafar"), help="generate data instead")
    g.add_argument("--n", type=int, default=10, help="features for the synthetic generator")
    g.add_argument("--m", type=int, default=100, help="rows for a generator")
    g.add_argument("--split", type=float, help="training fraction; the rest is held out")


def _add_problem(p):
    g = p.add_argument_group("problem")
    g.add_argument("--task", choices=("ls", "logit"), help="default: logit for zafar, else ls")
    g.add_argument("--grid", help="thresholds lo:hi:count or a comma list "
                                  "(default 0:1:41 for ls, 0 for logit)")
    g.add_argument("--variant", nargs=2, metavar=("COMPARISON", "SIDED"),
                   help="marginal|complement and abs|one-sided (default: complement abs "
                        "for one threshold, marginal abs otherwise)")
    g.add_argument("--reg", choices=("none", "ridge", "l1", "reverse_huber"), default="none")
    g.add_argument("--mu", type=float, default=0.0, help="penalty weight")
    g.add_argument("--huber-d", type=float, default=1.0, help="reverse Huber parameter")


def _add_solver(p):
    g = p.add_argument_group("solvers")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--restarts", type=int, default=5, help="coordinate descent restarts")
    g.add_argument("--time-limit", type=float, help="seconds per branch-and-bound run")
    g.add_argument("--node-limit", type=int)
    g.add_argument("--gap-tol", type=float, default=1e-6)
    g.add_argument("--big-m", type=float, help="override M for logistic strong and NAT models")
    g.add_argument("--config", help="JSON file with defaults for any long option")


def _add_weights(p, many: bool):
    nargs = "+" if many else None
    p.add_argument("--lambda", dest="lam", type=float, nargs=nargs, help="penalty weight(s)")
    p.add_argument("--epsilon", dest="eps", type=float, nargs=nargs, help="parity bound(s)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fairreg", description="Fair regression and classification "
                                 "with discretized demographic parity.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a generated dataset")
    p.add_argument("kind", choices=("synth", "zafar"))
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--m", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("fit", help="fit one model")
    _add_data(p), _add_problem(p), _add_solver(p), _add_weights(p, False)
    p.add_argument("--method", choices=METHODS, default="relax")
    p.add_argument("-o", "--output", help="report CSV (default: stdout)")
    p.add_argument("--model", help="model JSON path")
    p.add_argument("--timing", action="store_true", help="add wall time to the report")

    p = sub.add_parser("sweep", help="fit over a grid of lambda or epsilon values")
    _add_data(p), _add_problem(p), _add_solver(p), _add_weights(p, True)
    p.add_argument("--method", choices=METHODS, default="relax")
    p.add_argument("--seeds", type=int, nargs="+", help="one block of rows per seed")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("-o", "--output", help="CSV path (default: stdout)")
    p.add_argument("--timing", action="store_true")

    p = sub.add_parser("gaps", help="optimality gaps of the heuristics against branch-and-bound")
    _add_data(p), _add_problem(p), _add_solver(p)
    p.add_argument("--lambda", dest="lam", type=float, nargs="+", required=True)
    p.add_argument("--seeds", type=int, nargs="+")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("-o", "--output", help="CSV path (a table is printed either way)")

    p = sub.add_parser("sweep1d", help="objective curves along one coordinate")
    _add_data(p), _add_problem(p), _add_solver(p)
    p.add_argument("--lambda", dest="lam", type=float, nargs="+", required=True)
    p.add_argument("--coordinate", type=int, default=0)
    p.add_argument("--range", dest="wrange", default="-3:3:601", help="lo:hi:count")
    p.add_argument("--fixed", type=float, nargs="+", help="other weights (default 0)")
    p.add_argument("-o", "--output", required=True, help="prefix; one CSV per lambda")

    p = sub.add_parser("export-lp", help="write a least-squares model in LP format")
    _add_data(p), _add_problem(p), _add_solver(p), _add_weights(p, False)
    p.add_argument("--formulation", choices=("strong", "nat"), default="strong")
    p.add_argument("--chain-cuts", action="store_true")
    p.add_argument("-o", "--output", required=True)
    return ap


def parse_args(argv=None) -> argparse.Namespace:
    ap = build_parser()
    args = ap.parse_args(argv)
    cfg_path = getattr(args, "config", None)
    if cfg_path:
        try:
            cfg = json.loads(Path(cfg_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {cfg_path}: {exc}") from None
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        # config values become defaults; flags on the command line still win
        sub = ap._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        bad = sorted(set(cfg) - known)
        if bad:
            raise ConfigError(f"unknown config keys: {', '.join(bad)}")
        sub.set_defaults(**cfg)
        args = ap.parse_args(argv)
    return args


# ----------------------------------------------------------------- building

def _task(args) -> LossKind:
    if args.task:
        return LossKind.parse(args.task)
    return LossKind.LOGISTIC if args.generator == "zafar" else LossKind.SQUARED


def load_data(args, seed: int) -> tuple[Dataset, Dataset | None]:
    kind = _task(args)
    if args.data and args.generator:
        raise ConfigError("give either --data or --generator, not both")
    if args.data:
        try:
            ds = load_csv(args.data, args.target, args.sensitive, kind)
        except (OSError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
    elif args.generator == "synth":
        ds = gen_synthetic_regression(args.n, args.m, seed)[0]
    elif args.generator == "zafar":
        ds = gen_zafar_classification(args.m, seed)
    else:
        raise ConfigError("no data: give --data or --generator")
    try:
        ds.check_task(kind)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if args.split:
        try:
            return split(ds, args.split, seed)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    return ds, None


def breakpoints(args) -> Breakpoints:
    text = args.grid
    if text is None:
        text = "0" if _task(args) is LossKind.LOGISTIC else "0:1:41"
    try:
        return parse_grid(text)
    except ValueError as exc:
        raise ConfigError(f"bad --grid: {exc}") from None


def variant(args) -> ParityVariant:
    if args.variant is None:
        return ParityVariant("complement" if breakpoints(args).ell == 1 else "marginal", "abs")
    comp, sided = args.variant
    sided = {"one-sided": "one", "one": "one", "abs": "abs", "absolute": "abs"}.get(sided)
    if sided is None or comp not in ("marginal", "complement"):
        raise ConfigError("--variant takes marginal|complement and abs|one-sided")
    return ParityVariant(comp, sided)


def regularizer(args, method: str) -> Regularizer:
    if method == "relax-l2":
        return Regularizer("ridge", args.mu or 1e-2)
    if method == "relax-sparse":
        return Regularizer("reverse_huber", args.mu or 1e-2, args.huber_d)
    return Regularizer(args.reg, args.mu, args.huber_d)


def make_problem(ds: Dataset, args, method: str, lam=None, eps=None) -> FairProblem:
    bks, var = breakpoints(args), variant(args)
    try:
        if eps is not None:
            spec = FairnessSpec.constrained(bks, eps, var)
        else:
            spec = FairnessSpec.regularized(bks, 0.0 if lam is None else lam, var)
        return FairProblem.from_dataset(ds, _task(args), spec, regularizer(args, method))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def config_hash(args) -> str:
    skip = {"output", "model", "jobs", "timing", "config", "command"}
    semantic = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    blob = json.dumps(semantic, sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


# ------------------------------------------------------------------ fitting

def _big_m(problem: FairProblem, args) -> float | None:
    if problem.loss is LossKind.SQUARED:
        return None
    return args.big_m or default_big_m(problem)


def _cd(problem: FairProblem, init: str, args, relax_w=None):
    opts = CdOptions(init=init, restarts=args.restarts, seed=args.seed)
    if not problem.constrained:
        return cd_run(problem, opts, relax_w).w
    # constrained: bisection on the penalty weight, keeping the lowest-loss
    # model whose exact parity meets the bound
    eps = problem.spec.eps
    unfair = fit_unfair(problem.loss, problem.X, problem.y, problem.reg)
    best_w, best_loss = np.zeros(problem.n), problem.loss_value(np.zeros(problem.n))
    if problem.parity(unfair) <= eps:
        return unfair
    if init == "relax" and relax_w is None:
        relax_w = relaxed_weights(problem)
    lo, hi = 0.0, 10.0 * max(problem.loss_value(unfair), 1e-12)
    for _ in range(BISECTION_STEPS):
        lam = 0.5 * (lo + hi)
        pen = problem.with_spec(FairnessSpec.regularized(problem.spec.breakpoints, lam,
                                                         problem.spec.variant))
        w = cd_run(pen, opts, relax_w).w
        if problem.parity(w) <= eps + 1e-9:
            hi = lam
            loss = problem.loss_value(w)
            if loss < best_loss:
                best_w, best_loss = w, loss
        else:
            lo = lam
    return best_w


def fit_method(problem: FairProblem, method: str, args) -> dict:
    """Run ``method``; returns ``w`` plus any bounds it produced."""
    out = {"status": "ok", "lower_bound": None, "root_gap": None, "nodes": None,
           "big_m": _big_m(problem, args)}
    if method in ("relax", "relax-l2", "relax-sparse"):
        sol = solve_relaxation(build_strong(problem, out["big_m"]))
        if not sol.ok:
            raise LimitError(f"{method}: relaxation ended with status {sol.status}")
        out["w"] = sol.w
        out["lower_bound"] = sol.bound()
    elif method == "nat-relax":
        M = args.big_m or derive_bigM(problem, problem.spec.breakpoints, problem.loss)
        out["big_m"] = M
        sol = solve_relaxation(build_nat(problem, M))
        if not sol.ok:
            raise LimitError(f"{method}: relaxation ended with status {sol.status}")
        out["w"] = sol.w
    elif method in ("cd-relax", "cd-acc", "cd-fair"):
        init = {"cd-relax": "relax", "cd-acc": "unfair", "cd-fair": "zero"}[method]
        out["w"] = _cd(problem, init, args)
    elif method == "mio":
        init = []
        try:
            init.append(relaxed_weights(problem))
        except RuntimeError:
            pass
        res = solve_mio(build_strong(problem, out["big_m"]),
                        BnbOptions(time_limit=args.time_limit, node_limit=args.node_limit,
                                   gap_tol=args.gap_tol, initial=init))
        if res.w is None:
            raise LimitError(f"mio: {res.status} without a feasible point")
        out.update(w=res.w, status=res.status, lower_bound=res.obj_lb, nodes=res.nodes,
                   root_gap=optimality_gap(res.obj_ub, res.root_bound))
    elif method in ("proxy-linear", "proxy-convex"):
        try:
            out["w"] = fit_proxy(problem, method.split("-")[1])
        except ValueError as exc:
            raise ConfigError(f"{method}: {exc}") from None
    else:
        raise ConfigError(f"unknown method {method!r}")
    return out


def report(problem: FairProblem, train: Dataset, test: Dataset | None, method: str, fit: dict,
           seed: int, lam, eps) -> dict:
    w = fit["w"]
    var = problem.spec.variant
    bks = problem.spec.breakpoints
    kind = problem.loss
    mean_loss = lambda ds, ww: float(np.mean(eval_loss(kind, ds.X @ ww, ds.y)))  # noqa: E731
    unfair = mean_loss(train, fit_unfair(kind, train.X, train.y))
    loss = mean_loss(train, w)
    obj = problem.value(w)
    lb = fit["lower_bound"]
    v = train.X @ w
    # flag predictions within 1% of the big-M box, where M may have bound
    M = fit["big_m"]
    near = None
    if M is not None:
        near = bool(np.max(np.abs(v[:, None] - bks.values[None, :])) >= 0.99 * M)
    return {
        "method": method, "mode": "constrained" if eps is not None else "regularized",
        "lam": lam, "eps": eps, "seed": seed, "status": fit["status"],
        "train_loss": loss, "test_loss": mean_loss(test, w) if test is not None else None,
        "unfair_loss": unfair,
        "rel_loss_increase": 100.0 * (loss - unfair) / unfair if unfair > 0 else 0.0,
        "dp_ell": dp_ell(v, train, bks, var), "dp_exact": dp_exact(v, train, var),
        "test_dp_ell": dp_ell(test.X @ w, test, bks, var) if test is not None else None,
        "objective": obj, "lower_bound": lb, "root_gap": fit["root_gap"],
        "opt_gap": optimality_gap(obj, lb) if lb is not None else None,
        "nodes": fit["nodes"], "big_m": M, "near_big_m": near, "error": None,
    }


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_rows(rows: list[dict], fields, path=None) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(fields)
    for r in rows:
        wr.writerow([_fmt(r.get(f)) for f in fields])
    text = buf.getvalue()
    if path:
        Path(path).write_text(text)
    return text


def read_rows(path) -> list[dict]:
    """Read a report CSV back; numbers become floats, blanks become None."""
    out = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            row = {}
            for k, v in rec.items():
                if v == "":
                    row[k] = None
                else:
                    try:
                        row[k] = float(v)
                    except ValueError:
                        row[k] = v
            out.append(row)
    return out


def run_one(args, method: str, seed: int, lam, eps, timing: bool = False) -> dict:
    """One report row; solver failures are recorded in the row, not raised."""
    args = argparse.Namespace(**{**vars(args), "seed": seed})
    train, test = load_data(args, seed)
    problem = make_problem(train, args, method, lam, eps)
    t0 = time.perf_counter()
    try:
        fit = fit_method(problem, method, args)
    except (LimitError, RuntimeError) as exc:
        return {"method": method, "mode": "constrained" if eps is not None else "regularized",
                "lam": lam, "eps": eps, "seed": seed, "status": "error", "error": str(exc)}
    row = report(problem, train, test, method, fit, seed, lam, eps)
    if timing:
        row["wall_time"] = time.perf_counter() - t0
    row["_w"] = fit["w"]
    return row


# ----------------------------------------------------------------- commands

def cmd_gen(args) -> int:
    try:
        if args.kind == "synth":
            ds = gen_synthetic_regression(args.n, args.m, args.seed)[0]
        else:
            ds = gen_zafar_classification(args.m, args.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    ds = dataclasses.replace(ds, feature_names=tuple(f"f{k + 1}" for k in range(ds.n)))
    save_csv(ds, args.output)
    print(f"m={ds.m} n={ds.n} m1={ds.m1}")
    return 0


def _weights(args):
    if args.lam is not None and args.eps is not None:
        raise ConfigError("give --lambda or --epsilon, not both")
    return args.lam, args.eps


def cmd_fit(args) -> int:
    lam, eps = _weights(args)
    if lam is None and eps is None:
        lam = 0.0
    row = run_one(args, args.method, args.seed, lam, eps, args.timing)
    if row["status"] == "error":
        print(f"{args.method}: {row['error']}", file=sys.stderr)
        return 3
    w = row.pop("_w")
    fields = REPORT_FIELDS + (("wall_time",) if args.timing else ())
    text = write_rows([row], fields, args.output)
    if not args.output:
        sys.stdout.write(text)
    if args.model:
        model = {"method": args.method, "w": [float(x) for x in w],
                 "breakpoints": [float(b) for b in breakpoints(args).values],
                 "variant": [variant(args).comparison, variant(args).sided], "lam": lam, "eps": eps,
                 "config_hash": config_hash(args)}
        Path(args.model).write_text(json.dumps(model, indent=2) + "\n")
    return 0


def _pool_map(fn, jobs_args, jobs: int):
    if jobs <= 1:
        return [fn(*a) for a in jobs_args]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        futs = [ex.submit(fn, *a) for a in jobs_args]
        return [f.result() for f in futs]


def cmd_sweep(args) -> int:
    if args.lam is not None and args.eps is not None:
        raise ConfigError("give --lambda or --epsilon, not both")
    if not args.lam and not args.eps:
        raise ConfigError("sweep needs a nonempty --lambda or --epsilon grid")
    seeds = args.seeds or [args.seed]
    grid = [(v, None) for v in args.lam] if args.lam else [(None, v) for v in args.eps]
    tasks = [(args, args.method, s, lam, eps, args.timing) for s in seeds for lam, eps in grid]
    rows = _pool_map(run_one, tasks, args.jobs)
    for r in rows:
        r.pop("_w", None)
    fields = REPORT_FIELDS + (("wall_time",) if args.timing else ())
    text = write_rows(rows, fields, args.output)
    if not args.output:
        sys.stdout.write(text)
    return 0


GAP_METHODS = ("relax", "cd-fair", "cd-acc", "cd-relax", "mio")


def gaps_one(args, seed: int, lam: float) -> dict:
    args = argparse.Namespace(**{**vars(args), "seed": seed})
    train, _ = load_data(args, seed)
    problem = make_problem(train, args, "relax", lam, None)
    M = _big_m(problem, args)
    w_relax = solve_relaxation(build_strong(problem, M)).w
    objs = {"relax": problem.value(w_relax)}
    ws = [w_relax]
    for meth, init in (("cd-fair", "zero"), ("cd-acc", "unfair"), ("cd-relax", "relax")):
        res = cd_run(problem, CdOptions(init=init, restarts=args.restarts, seed=seed), w_relax)
        objs[meth] = res.objective
        ws.append(res.w)
    order = np.argsort([problem.value(w) for w in ws], kind="stable")
    mio = solve_mio(build_strong(problem, M),
                    BnbOptions(time_limit=args.time_limit, node_limit=args.node_limit,
                               gap_tol=args.gap_tol, initial=[ws[q] for q in order]))
    objs["mio"] = mio.obj_ub
    lb = mio.obj_lb
    row = {"seed": seed, "lam": lam, "lower_bound": lb, "mio_status": mio.status,
           "nodes": mio.nodes}
    for k in GAP_METHODS:
        row[f"obj_{k}"] = objs[k]
        row[f"gap_{k}"] = optimality_gap(objs[k], lb)
    return row


def cmd_gaps(args) -> int:
    seeds = args.seeds or [args.seed]
    tasks = [(args, s, lam) for s in seeds for lam in args.lam]
    rows = _pool_map(gaps_one, tasks, args.jobs)
    fields = (("seed", "lam", "lower_bound", "mio_status", "nodes")
              + tuple(f"obj_{k}" for k in GAP_METHODS) + tuple(f"gap_{k}" for k in GAP_METHODS))
    if args.output:
        write_rows(rows, fields, args.output)
    print(format_gap_table(rows))
    return 0


def format_gap_table(rows: list[dict]) -> str:
    head = f"{'lambda':>8} " + " ".join(f"{k:>9}" for k in GAP_METHODS)
    lines = [head]
    for lam in sorted({r["lam"] for r in rows}):
        sel = [r for r in rows if r["lam"] == lam]
        vals = [100.0 * float(np.mean([r[f"gap_{k}"] for r in sel])) for k in GAP_METHODS]
        lines.append(f"{lam:>8.3g} " + " ".join(f"{v:>8.2f}%" for v in vals))
    vals = [100.0 * float(np.mean([r[f"gap_{k}"] for r in rows])) for k in GAP_METHODS]
    lines.append(f"{'mean':>8} " + " ".join(f"{v:>8.2f}%" for v in vals))
    return "\n".join(lines)


def cmd_sweep1d(args) -> int:
    train, _ = load_data(args, args.seed)
    try:
        lo, hi, count = args.wrange.split(":")
        grid = np.linspace(float(lo), float(hi), int(count))
    except ValueError:
        raise ConfigError("--range takes lo:hi:count") from None
    fixed = np.zeros(train.n) if args.fixed is None else np.asarray(args.fixed, dtype=float)
    if fixed.size != train.n or not 0 <= args.coordinate < train.n:
        raise ConfigError("--fixed needs one value per feature and a valid --coordinate")
    fields = ("w_k", "exact", "strong", "linear", "convex")
    for lam in args.lam:
        problem = make_problem(train, args, "relax", lam, None)
        cols = sweep_objective_1d(problem, train, args.coordinate, fixed, grid,
                                  M=args.big_m)
        rows = [{f: cols[f][q] for f in fields} for q in range(grid.size)]
        path = f"{args.output}_lam{lam:g}.csv"
        write_rows(rows, fields, path)
        print(path)
    return 0


def cmd_export_lp(args) -> int:
    lam, eps = _weights(args)
    if lam is None and eps is None:
        lam = 0.0
    train, _ = load_data(args, args.seed)
    problem = make_problem(train, args, "relax", lam, eps)
    if problem.loss is not LossKind.SQUARED:
        raise ConfigError("LP export covers least squares only")
    if args.formulation == "nat":
        M = args.big_m or derive_bigM(problem, problem.spec.breakpoints, problem.loss)
        model = build_nat(problem, M)
    else:
        model = build_strong(problem)
    if args.chain_cuts:
        model = add_chain_cuts(model)
    try:
        dims = export_lp(model, args.output)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    print(" ".join(f"{k}={v}" for k, v in dims.items()))
    return 0


COMMANDS = {"gen": cmd_gen, "fit": cmd_fit, "sweep": cmd_sweep, "gaps": cmd_gaps,
            "sweep1d": cmd_sweep1d, "export-lp": cmd_export_lp}


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except LimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
