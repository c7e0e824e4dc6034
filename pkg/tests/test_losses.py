import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from fairreg.losses import (LossKind, Regularizer, eval_loss, fit_unfair, loss_grad, perspective,
                            reg_value, reverse_huber, univariate_loss_min)

LS, LG = LossKind.SQUARED, LossKind.LOGISTIC
finite = st.floats(-50, 50, allow_nan=False)
label = st.sampled_from([-1.0, 1.0])


def test_loss_values():
    assert eval_loss(LS, 0.5, 1.0) == 0.25
    assert eval_loss(LG, 0.0, 1.0) == pytest.approx(math.log(2.0), abs=1e-15)


def test_logistic_far_tail_matches_extended_precision():
    for v in (700.0, 30.0, -700.0):
        with mpmath.workdps(60):
            ref = float(mpmath.log(1 + mpmath.exp(-mpmath.mpf(v))))
        got = float(eval_loss(LG, v, 1.0))
        assert np.isfinite(got)
        assert got == pytest.approx(ref, rel=1e-14, abs=1e-300)


def test_logistic_rejects_bad_labels():
    with pytest.raises(ValueError):
        eval_loss(LG, 0.0, 0.5)


def test_gradient_examples():
    assert loss_grad(LS, 0.5, 1.0) == -1.0
    assert loss_grad(LG, 0.0, 1.0) == pytest.approx(-0.5)


@settings(max_examples=200, deadline=None)
@given(v=st.floats(-20, 20), y=label, kind=st.sampled_from([LS, LG]))
def test_gradient_matches_central_differences(v, y, kind):
    h = 1e-6
    fd = (eval_loss(kind, v + h, y) - eval_loss(kind, v - h, y)) / (2 * h)
    g = loss_grad(kind, v, y)
    assert abs(g - fd) <= 1e-6 * max(1.0, abs(g))


def test_perspective_examples():
    assert perspective(LS, 2.0, 0.5, 0.0, 0.0) == pytest.approx(8.0)
    for kind in (LS, LG):
        assert perspective(kind, 0.0, 0.0, 0.3, 1.0) == 0.0
        assert perspective(kind, 1.7, 1.0, 0.0, -1.0) == pytest.approx(eval_loss(kind, 1.7, -1.0))
    assert perspective(LS, 1.0, 0.0, 0.0, 0.0) == np.inf
    # logistic recession: slope 1 in the direction that raises -y v, flat otherwise
    assert perspective(LG, 2.0, 0.0, 0.0, 1.0) == 0.0
    assert perspective(LG, -2.0, 0.0, 0.0, 1.0) == 2.0
    with pytest.raises(ValueError):
        perspective(LS, 1.0, -0.1, 0.0, 0.0)


@pytest.mark.parametrize("kind", [LS, LG])
def test_perspective_closure_is_the_limit(kind):
    # z L(b + u / z) as z -> 0 approaches the value at z = 0
    for u in (-1.5, 2.0):
        small = perspective(kind, u, 1e-9, 0.2, 1.0)
        lim = perspective(kind, u, 0.0, 0.2, 1.0)
        if np.isinf(lim):
            assert small > 1e8
        else:
            assert small == pytest.approx(lim, abs=1e-6)


@settings(max_examples=300, deadline=None)
@given(u1=finite, u2=finite, z1=st.floats(1e-3, 1), z2=st.floats(1e-3, 1), b=finite, y=label,
       kind=st.sampled_from([LS, LG]))
def test_perspective_midpoint_convexity(u1, u2, z1, z2, b, y, kind):
    h1 = perspective(kind, u1, z1, b, y)
    h2 = perspective(kind, u2, z2, b, y)
    hm = perspective(kind, (u1 + u2) / 2, (z1 + z2) / 2, b, y)
    assert hm <= (h1 + h2) / 2 + 1e-9 * max(1.0, abs(h1), abs(h2))


def test_regularizer_examples():
    assert reg_value(Regularizer("reverse_huber", 1.0, 4.0), [1.0]) == pytest.approx(4.0)
    assert reg_value(Regularizer("reverse_huber", 1.0, 4.0), [3.0]) == pytest.approx(13.0)
    assert reg_value(Regularizer("ridge", 2.0), [1.0, -2.0]) == pytest.approx(10.0)
    assert reg_value(Regularizer("l1", 0.5), [1.0, -2.0]) == pytest.approx(1.5)
    assert reg_value(Regularizer(), [5.0]) == 0.0
    with pytest.raises(ValueError):
        Regularizer("reverse_huber", 1.0, 0.0)


@settings(max_examples=100, deadline=None)
@given(w=st.floats(-10, 10), d=st.floats(0.01, 10))
def test_reverse_huber_matches_inner_minimization(w, d):
    res = minimize_scalar(lambda z: w * w / z + d * z, bounds=(1e-12, 1.0), method="bounded",
                          options={"xatol": 1e-12})
    inner = min(res.fun, w * w + d) if w != 0 else 0.0
    assert float(reverse_huber(w, d)) == pytest.approx(inner, rel=1e-8, abs=1e-8)


def test_univariate_min_examples():
    X = np.array([[1.0], [1.0]])
    y = np.array([1.0, 0.0])
    assert univariate_loss_min(LS, X, y, 0, np.zeros(1)) == pytest.approx(0.5)
    Z = np.zeros((3, 2))
    Z[:, 1] = [1.0, 2.0, 3.0]
    assert univariate_loss_min(LS, Z, np.ones(3), 0, np.array([0.7, 0.1])) == 0.7


def _grid_check(kind, X, y, k, w, reg, t):
    grid = t + np.arange(-20000, 20001) * 1e-4
    W = np.repeat(w[None, :], grid.size, axis=0)
    W[:, k] = grid
    vals = np.sum(eval_loss(kind, W @ X.T, y[None, :]), axis=1) + np.array(
        [reg_value(reg, wi) for wi in W])
    wt = w.copy()
    wt[k] = t
    ft = float(np.sum(eval_loss(kind, X @ wt, y))) + reg_value(reg, wt)
    assert ft <= vals.min() + 1e-9


@pytest.mark.parametrize("reg", [Regularizer(), Regularizer("ridge", 0.3), Regularizer("l1", 0.4),
                                 Regularizer("reverse_huber", 0.5, 0.2)])
@pytest.mark.parametrize("kind", [LS, LG])
def test_univariate_min_against_grid(kind, reg):
    rng = np.random.default_rng(3)
    X = rng.standard_normal((12, 3))
    y = rng.choice([-1.0, 1.0], 12) if kind is LG else rng.uniform(0, 1, 12)
    w = rng.standard_normal(3)
    t = univariate_loss_min(kind, X, y, 1, w, reg)
    _grid_check(kind, X, y, 1, w, reg, t)
    if kind is LG and not reg.active:
        wt = w.copy()
        wt[1] = t
        assert abs(float(X[:, 1] @ loss_grad(kind, X @ wt, y))) <= 1e-10


def test_fit_unfair_matches_normal_equations():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((20, 3))
    y = rng.standard_normal(20)
    w = fit_unfair(LS, X, y, Regularizer("ridge", 0.5))
    ref = np.linalg.solve(X.T @ X + 0.5 * np.eye(3), X.T @ y)
    assert np.allclose(w, ref, atol=1e-9)
    wl = fit_unfair(LG, X, np.sign(y))
    assert np.linalg.norm(X.T @ loss_grad(LG, X @ wl, np.sign(y))) < 1e-6
