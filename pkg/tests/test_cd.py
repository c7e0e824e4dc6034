import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairreg.cd import (CdOptions, candidate_set, cd_run, cd_update, coordinate_sweep, eval_R)
from fairreg.fairness import (Breakpoints, FairnessSpec, ParityVariant, dp_ell,
                              fairness_coefficients)
from fairreg.losses import LossKind, Regularizer, fit_unfair
from fairreg.problem import FairProblem
from fairreg.relax import relaxed_weights

from helpers import candidate_span, grid_values_along, random_cd_case, random_problem, single_factor, toy_dataset

LS, LG = LossKind.SQUARED, LossKind.LOGISTIC


def _problem(X, y, a, bks, lam, variant=ParityVariant("marginal", "abs"), loss=LS):
    a = np.asarray(a)
    spec = FairnessSpec.regularized(Breakpoints(bks), lam, variant)
    return FairProblem(np.asarray(X, dtype=float), y, fairness_coefficients(a, variant.comparison),
                       spec, loss, Regularizer(), a)


def test_candidate_set_examples():
    pr = _problem([[1.0], [2.0]], [0.0, 1.0], [1, 0], [0.5], 1.0)
    t, i, j = candidate_set(pr, [0.0], 0)
    assert t.tolist() == [0.25, 0.5] and i.tolist() == [1, 0] and j.tolist() == [0, 0]
    pr2 = _problem([[2.0, 1.0], [1.0, 0.0]], [0.0, 1.0], [1, 0], [0.4], 1.0)
    t, i, _ = candidate_set(pr2, [0.0, 1.0], 0)
    assert t[i == 0][0] == pytest.approx(-0.3)


def test_candidate_set_keeps_duplicates():
    pr = single_factor(2.0)
    t, i, _ = candidate_set(pr, [0.0], 0)
    assert t.tolist() == [0.0, 0.0] and i.tolist() == [0, 1]


def test_zero_column_gives_the_loss_minimizer():
    X = np.array([[0.0, 1.0], [0.0, 2.0], [0.0, -1.0]])
    pr = _problem(X, [0.2, 0.5, 0.1], [1, 0, 0], [0.3], 1.0)
    t, _, _ = candidate_set(pr, [0.4, 0.1], 0)
    assert t.size == 0
    # every value minimizes the loss along a zero column; the current one is kept
    wk, F = cd_update(pr, [0.4, 0.1], 0)
    assert wk == 0.4
    assert F == pr.value([0.4, 0.1])


def test_eval_R_examples():
    pr = _problem([[1.0], [1.0]], [0.0, 0.0], [1, 0], [0.0], 1.0)
    assert eval_R(pr, np.array([0.0, 0.0])) == 0.0
    assert eval_R(pr, np.array([1.0, -1.0])) == 0.5
    v = np.array([0.3, 0.9, -0.2, 0.6])
    a = np.array([1, 0, 1, 0])
    pr4 = _problem(np.ones((4, 1)), np.zeros(4), a, [0.0, 0.5], 1.0)
    assert eval_R(pr4, v) == dp_ell(v, toy_dataset(v, a), Breakpoints([0.0, 0.5]))


def test_cd_update_examples():
    assert cd_update(single_factor(2.0), [0.3], 0) == (0.0, 1.0)
    wk, F = cd_update(single_factor(0.5), [0.0], 0)
    assert wk == pytest.approx(0.5) and F == pytest.approx(0.75)
    # lam = 0: the loss-only minimizer
    pr = random_problem(np.random.default_rng(1), 9, 3, 2, lam=0.0)
    w = np.array([0.2, -0.1, 0.4])
    wk, _ = cd_update(pr, w, 1)
    x = pr.X[:, 1]
    r = pr.X @ w - x * w[1]
    assert wk == pytest.approx(float(x @ (pr.y - r) / (x @ x)), abs=1e-12)


def test_cd_run_examples():
    res = cd_run(single_factor(2.0), CdOptions(init="zero"))
    assert res.w.tolist() == [0.0] and res.objective == 1.0
    pr = random_problem(np.random.default_rng(2), 10, 3, 3, lam=0.0)
    res = cd_run(pr, CdOptions(init="unfair"))
    assert res.sweeps == 1
    assert np.allclose(res.w, fit_unfair(LS, pr.X, pr.y))


def test_cd_update_beats_dense_grid():
    rng = np.random.default_rng(100)
    for _ in range(25):
        pr, w, k = random_cd_case(rng)
        wk, F = cd_update(pr, w, k)
        lo, hi = candidate_span(pr, w, k, wk)
        grid = 1e-4 * np.arange(np.floor(lo * 1e4), np.ceil(hi * 1e4) + 1)
        assert F <= grid_values_along(pr, w, k, grid).min() + 1e-9


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_incremental_sweep_matches_scratch(seed):
    rng = np.random.default_rng(seed)
    pr, w, k = random_cd_case(rng)
    if rng.random() < 0.5:
        # put some rows on a threshold for every value of w_k
        X = pr.X.copy()
        X[0, k] = 0.0
        X[0] *= 0.0
        X[0, (k + 1) % pr.n] = 1.0 if pr.n > 1 else 0.0
        w = w.copy()
        if pr.n > 1:
            w[(k + 1) % pr.n] = pr.bks[0]
        pr = FairProblem(X, pr.y, pr.coef, pr.spec, pr.loss, pr.reg, pr.a)
    tab = coordinate_sweep(pr, w, k)
    for t, R in zip(tab.t, tab.R):
        wt = w.copy()
        wt[k] = t
        assert abs(R - eval_R(pr, pr.X @ wt)) <= 1e-12


def test_single_tie_is_min_of_neighbours():
    rng = np.random.default_rng(7)
    checked = 0
    for _ in range(40):
        pr, w, k = random_cd_case(rng)
        tab = coordinate_sweep(pr, w, k)
        t = tab.t
        for s in range(1, t.size - 1):
            if t[s] - t[s - 1] < 1e-6 or t[s + 1] - t[s] < 1e-6:
                continue
            vals = []
            for mid in ((t[s - 1] + t[s]) / 2, (t[s] + t[s + 1]) / 2):
                wt = w.copy()
                wt[k] = mid
                vals.append(eval_R(pr, pr.X @ wt))
            assert tab.R[s] == pytest.approx(min(vals), abs=1e-12)
            checked += 1
    assert checked > 50


def test_run_trace_and_local_optimality():
    rng = np.random.default_rng(11)
    for trial in range(6):
        pr, _, _ = random_cd_case(rng)
        res = cd_run(pr, CdOptions(init=("zero", "unfair")[trial % 2], restarts=2, seed=trial))
        tr = np.array(res.trace)
        assert np.all(np.diff(tr) <= 0)
        assert res.objective == pytest.approx(pr.value(res.w), abs=1e-12)
        assert res.converged
        for k in range(pr.n):
            _, F = cd_update(pr, res.w, k)
            assert F >= res.objective - 1e-9 * max(1.0, abs(res.objective))


def test_relax_start_never_worse_than_relaxed_point():
    rng = np.random.default_rng(13)
    for _ in range(3):
        pr = random_problem(rng, 12, 3, 3, lam=0.3)
        w_relax = relaxed_weights(pr)
        res = cd_run(pr, CdOptions(init="relax"), relax_w=w_relax)
        assert res.objective <= pr.value(w_relax)


def test_restarts_are_reproducible():
    pr = random_problem(np.random.default_rng(17), 15, 4, 3, lam=0.4)
    a = cd_run(pr, CdOptions(restarts=3, seed=5))
    b = cd_run(pr, CdOptions(restarts=3, seed=5))
    assert np.array_equal(a.w, b.w) and a.best_restart == b.best_restart


def test_options_validation():
    with pytest.raises(ValueError):
        CdOptions(restarts=0)
    with pytest.raises(ValueError):
        cd_run(single_factor(1.0), CdOptions(init="sideways"))
