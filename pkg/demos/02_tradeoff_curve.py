"""
Accuracy against parity on synthetic regression data
====================================================

Sweep the penalty weight (the loss is summed over rows, so useful weights
scale with the row count), fit with the strong relaxation and with
coordinate descent started from it, and print the relative loss increase
next to the discretized and the exact parity gap on held-out rows.
"""

import numpy as np

from fairreg.cd import CdOptions, cd_run
from fairreg.data import gen_synthetic_regression, split
from fairreg.fairness import FairnessSpec, ParityVariant, dp_ell, dp_exact, make_grid
from fairreg.formulations import build_strong
from fairreg.losses import LossKind, eval_loss, fit_unfair
from fairreg.problem import FairProblem
from fairreg.relax import RelaxationEngine

ds = gen_synthetic_regression(n=10, m=200, seed=0)[0]
train, test = split(ds, 0.5, seed=0)

bks = make_grid(0, 1, 41)
var = ParityVariant("marginal", "abs")
spec = FairnessSpec.regularized(bks, 0.0, var)
pr = FairProblem.from_dataset(train, LossKind.SQUARED, spec)

w0 = fit_unfair(LossKind.SQUARED, train.X, train.y)
loss0 = np.mean(eval_loss(LossKind.SQUARED, train.X @ w0, train.y))
print("unfair: loss %.4f  DP_41 %.3f" % (loss0, dp_ell(train.X @ w0, train, bks, var)))

# one engine, re-solved for each weight without rebuilding the model
eng = RelaxationEngine(build_strong(pr))

print("%7s  %-8s %9s %8s %8s %8s" % ("lambda", "method", "loss +%", "DP_41", "DP", "test DP"))
for lam in (0.1, 1.0, 3.0, 10.0, 30.0, 100.0):
    eng.set_weight(lam=lam)
    w_relax = eng.solve().w
    pen = pr.with_spec(FairnessSpec.regularized(bks, lam, var))
    w_cd = cd_run(pen, CdOptions(init="relax", restarts=3, seed=1), w_relax).w
    for name, w in (("relax", w_relax), ("cd-relax", w_cd)):
        loss = np.mean(eval_loss(LossKind.SQUARED, train.X @ w, train.y))
        print("%7.1f  %-8s %8.2f%% %8.3f %8.3f %8.3f" % (
            lam, name, 100 * (loss - loss0) / loss0, dp_ell(train.X @ w, train, bks, var),
            dp_exact(train.X @ w, train, var), dp_ell(test.X @ w, test, bks, var)))
