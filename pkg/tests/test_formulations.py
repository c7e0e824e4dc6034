import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import logit

from fairreg.fairness import Breakpoints, FairnessSpec, ParityVariant, make_grid
from fairreg.formulations import (add_chain_cuts, build_nat, build_strong, check_barV_membership,
                                  derive_bigM, export_lp, lift_point, read_lp_dims, strong_loss,
                                  strong_violation, transform_breakpoints)
from fairreg.losses import LossKind, Regularizer, eval_loss
from fairreg.problem import FairProblem
from fairreg.relax import solve_relaxation

from helpers import random_problem

LS, LG = LossKind.SQUARED, LossKind.LOGISTIC
ONE = ParityVariant("marginal", "one")
ABS = ParityVariant("marginal", "abs")


def _tiny(m=2, ell=1, variant=ABS, eps=None, loss=LS, seed=0):
    rng = np.random.default_rng(seed)
    return random_problem(rng, m, 2, ell, loss, lam=None if eps is not None else 0.3, eps=eps,
                          variant=variant)


@pytest.mark.parametrize("variant,fair", [(ONE, 1), (ABS, 2)])
def test_nat_counts(variant, fair):
    mdl = build_nat(_tiny(variant=variant), 5.0)
    assert mdl.n_binaries == 2
    rows = mdl.row_counts()
    assert rows["bigM_ub"] + rows["bigM_lb"] == 4
    assert rows["fairness"] == fair
    assert mdl.var_counts()["t"] == 1


def test_constrained_mode_drops_t():
    mdl = build_nat(_tiny(eps=0.1), 5.0)
    assert not mdl.has_t and mdl.var_counts()["t"] == 0


def test_nat_needs_positive_m():
    with pytest.raises(ValueError):
        build_nat(_tiny(), 0.0)


def test_strong_counts():
    mdl = build_strong(_tiny(m=3, ell=2))
    assert mdl.var_counts()["p"] == 9 and mdl.var_counts()["z"] == 6
    rows = mdl.row_counts()
    assert (rows["linking"], rows["couplings"], rows["epigraph"], rows["bigM_tail"]) == (3, 3, 3, 0)
    assert build_strong(_tiny(m=3, ell=1)).row_counts()["couplings"] == 0


def test_strong_logistic_needs_m():
    with pytest.raises(ValueError, match="needs M"):
        build_strong(_tiny(loss=LG))
    assert build_strong(_tiny(loss=LG), 10.0).row_counts()["bigM_tail"] == 4


def test_chain_cuts():
    pr = _tiny(m=2, ell=3)
    mdl = add_chain_cuts(build_strong(pr))
    assert mdl.row_counts()["chain"] == 4
    assert build_strong(_tiny(m=2, ell=1)).row_counts()["chain"] == 0
    z = np.array([[1.0, 0.0, 1.0], [1.0, 1.0, 0.0]])
    v = pr.X @ np.zeros(pr.n)
    p = np.array([lift_point(vi, zi, pr.spec.breakpoints) for vi, zi in zip(v, z)])
    assert strong_violation(mdl, np.zeros(pr.n), z, p) >= 1.0 - 1e-12


def test_barV_membership_examples():
    b = Breakpoints([0.5])
    assert check_barV_membership(0.7, [1], b)
    assert check_barV_membership(0.5, [0], b) and check_barV_membership(0.5, [1], b)
    assert not check_barV_membership(0.3, [1], b)
    with pytest.raises(ValueError):
        check_barV_membership(0.3, [0.5], b)


def _indicator_choices(v, bks):
    z = (v > bks.values).astype(float)
    yield z
    tied = np.flatnonzero(v == bks.values)
    if tied.size:
        z2 = z.copy()
        z2[tied] = 1.0
        yield z2


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**31), ell=st.integers(1, 5), loss=st.sampled_from([LS, LG]),
       snap=st.booleans())
def test_lifted_point_is_feasible_and_exact(seed, ell, loss, snap):
    rng = np.random.default_rng(seed)
    bks = make_grid(-1.0, 1.0, ell) if ell > 1 else Breakpoints([0.2])
    v = float(rng.choice(bks.values)) if snap else float(rng.uniform(-3, 3))
    y = float(rng.choice([-1.0, 1.0])) if loss is LG else float(rng.uniform(0, 1))
    spec = FairnessSpec.regularized(bks, 0.1)
    pr = FairProblem(np.array([[v]]), np.array([y]), np.array([1.0]), spec, loss)
    mdl = build_strong(pr, 10.0 if loss is LG else None)
    for z in _indicator_choices(v, bks):
        assert check_barV_membership(v, z, bks)
        p = lift_point(v, z, bks)
        assert strong_violation(mdl, [1.0], z[None, :], p[None, :]) <= 1e-12
        s = strong_loss(loss, [y], z[None, :], p[None, :], bks)[0]
        assert s == pytest.approx(float(eval_loss(loss, v, y)), rel=1e-12, abs=1e-12)


def test_derive_bigM_examples():
    rng = np.random.default_rng(0)
    pr = random_problem(rng, 6, 1, 1)
    zero = FairProblem(pr.X, np.zeros(6), pr.coef, pr.spec)
    assert derive_bigM(zero, Breakpoints([0.0]), LS) == 1.0
    # unfair predictions inside [0, 1] and thresholds inside [0, 1] give M <= 3
    X = np.array([[1.0], [1.0], [1.0]])
    data = FairProblem(X, np.array([0.2, 0.5, 0.8]), np.zeros(3), pr.spec)
    assert derive_bigM(data, make_grid(0, 1, 5), LS) <= 3.0
    near = derive_bigM(pr, Breakpoints([0.5]), LS)
    far = derive_bigM(pr, Breakpoints([0.5, 7.0]), LS)
    assert far >= near


def test_transform_breakpoints():
    assert transform_breakpoints(Breakpoints([0.5]), logit).values[0] == 0.0
    b = Breakpoints([0.25, 0.5, 0.75])
    assert transform_breakpoints(b, lambda x: x) == b
    out = transform_breakpoints(b, logit).values
    assert np.all(np.diff(out) > 0)
    with pytest.raises(ValueError):
        transform_breakpoints(b, lambda x: -x)


@pytest.mark.parametrize("loss", [LS, LG])
def test_nat_relaxation_is_the_unfair_loss(loss):
    rng = np.random.default_rng(4)
    for _ in range(3):
        pr = random_problem(rng, 8, 2, 3, loss, lam=0.5)
        M = 10 * derive_bigM(pr, pr.spec.breakpoints, loss)
        val = solve_relaxation(build_nat(pr, M)).objective
        assert val == pytest.approx(pr.unfair_loss(), abs=1e-5)
        cut = solve_relaxation(add_chain_cuts(build_nat(pr, M))).objective
        assert cut == pytest.approx(val, abs=1e-5)


def _lp_text(path):
    raw = path.read_bytes()
    assert b"\r" not in raw
    raw.decode("ascii")
    return raw.decode()


@pytest.mark.parametrize("kind", ["nat", "strong"])
def test_export_lp_format_and_round_trip(tmp_path, kind):
    pr = _tiny(m=3, ell=2)
    mdl = build_nat(pr, 5.0) if kind == "nat" else build_strong(pr)
    dims = export_lp(add_chain_cuts(mdl), tmp_path / "m.lp")
    text = _lp_text(tmp_path / "m.lp")
    for sec in ("Minimize", "Subject To", "Bounds", "Binaries", "End"):
        assert f"\n{sec}\n" in f"\n{text}"
    assert dims == read_lp_dims(tmp_path / "m.lp")
    assert dims["binaries"] == 6
    rows = mdl.row_counts()
    if kind == "nat":
        # residual definitions, big-M pairs, fairness rows, chain rows
        assert dims["rows"] == 3 + rows["bigM_ub"] + rows["bigM_lb"] + rows["fairness"] + 3
    for name in ("w_0", "z_0_1", "t"):
        assert name in text
    again = tmp_path / "again.lp"
    export_lp(add_chain_cuts(mdl), again)
    assert again.read_bytes() == (tmp_path / "m.lp").read_bytes()


def test_export_lp_rejects_logistic(tmp_path):
    pr = _tiny(loss=LG)
    with pytest.raises(ValueError, match="squared-error"):
        export_lp(build_nat(pr, 5.0), tmp_path / "x.lp")


@pytest.mark.parametrize("kind", ["nat", "strong"])
@pytest.mark.parametrize("case", ["plain", "ridge", "l1", "eps"])
def test_exported_model_solved_externally(tmp_path, kind, case):
    """Cross-check against an external MIQCP solver when one is installed."""
    scip = pytest.importorskip("pyscipopt")
    from fairreg.bnb import solve_mio
    rng = np.random.default_rng({"plain": 1, "ridge": 2, "l1": 3, "eps": 4}[case])
    reg = {"ridge": Regularizer("ridge", 0.1), "l1": Regularizer("l1", 0.2)}.get(case,
                                                                                Regularizer())
    pr = random_problem(rng, 5, 2, 2, lam=None if case == "eps" else 0.5,
                        eps=0.2 if case == "eps" else None, reg=reg)
    mdl = build_nat(pr, 20.0) if kind == "nat" else build_strong(pr)
    export_lp(mdl, tmp_path / "m.lp")
    s = scip.Model()
    s.hideOutput()
    s.readProblem(str(tmp_path / "m.lp"))
    s.setParam("limits/gap", 1e-9)
    s.optimize()
    assert s.getStatus() == "optimal"
    vals = {v.name: s.getVal(v) for v in s.getVars()}
    w = np.array([vals[f"w_{k}"] for k in range(pr.n)])
    ours = solve_mio(build_strong(pr))
    # compare exact objectives at both points; the solver's own value carries cone slack
    assert pr.value(w, 1e-6) == pytest.approx(ours.obj_ub, abs=1e-5)
