"""
A small fair regression problem, solved four ways
=================================================

Least squares on 12 rows, 2 features and 5 thresholds.  We compare the
natural big-M relaxation, the strong relaxation, coordinate descent and
branch-and-bound, and check the last one against a grid search.
"""

import numpy as np

from fairreg.bnb import BnbOptions, brute_force_exact, solve_mio
from fairreg.cd import CdOptions, cd_run
from fairreg.data import gen_synthetic_regression
from fairreg.fairness import FairnessSpec, ParityVariant, make_grid
from fairreg.formulations import build_nat, build_strong, derive_bigM
from fairreg.losses import LossKind
from fairreg.problem import FairProblem
from fairreg.relax import solve_relaxation

ds, w_true = gen_synthetic_regression(n=2, m=12, seed=3)
print("rows per group:", ds.m - ds.m1, ds.m1, " true w:", np.round(w_true, 3))

bks = make_grid(0, 1, 5)
spec = FairnessSpec.regularized(bks, 0.5, ParityVariant("marginal", "abs"))
pr = FairProblem.from_dataset(ds, LossKind.SQUARED, spec)

# the unfair fit and its parity gap
print("unfair loss  %.5f" % pr.unfair_loss())

# the natural relaxation only sees the loss
M = derive_bigM(pr, bks, LossKind.SQUARED)
nat = solve_relaxation(build_nat(pr, M))
print("NAT bound    %.5f   (M = %.3f)" % (nat.objective, M))

strong = solve_relaxation(build_strong(pr))
print("strong bound %.5f" % strong.objective)

cd = cd_run(pr, CdOptions(init="relax", restarts=3, seed=0), strong.w)
print("CD-relax     %.5f   after %d sweeps" % (cd.objective, cd.sweeps))

mio = solve_mio(build_strong(pr), BnbOptions(initial=[cd.w]))
print("B&B          %.5f   lower bound %.5f, %d nodes, %s" % (mio.obj_ub, mio.obj_lb, mio.nodes,
                                                            mio.status))

# with two features a fine grid over w is still cheap
w_grid, best = brute_force_exact(pr, box=3.0, step=2e-3)
print("grid search  %.5f   at w = %s" % (best, np.round(w_grid, 3)))

# root gap of each relaxation against the optimum
for name, bound in (("NAT", nat.objective), ("strong", strong.objective)):
    print("%-6s root gap %5.1f%%" % (name, 100 * (mio.obj_ub - bound) / mio.obj_ub))
