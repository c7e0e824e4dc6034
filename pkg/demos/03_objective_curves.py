"""
Objective curves along one weight
=================================

Two-feature classification data, one-sided parity at threshold 0.  Hold
w_2 = 0 and move w_1 over [-3, 3].  The exact objective jumps wherever a
prediction crosses the threshold; the strong relaxation at fixed w, the
mean-difference surrogate and the hinge surrogate are smooth stand-ins.
The curves are written to CSV for plotting.
"""

import sys

import numpy as np

from fairreg.data import gen_zafar_classification
from fairreg.fairness import Breakpoints, FairnessSpec, ParityVariant
from fairreg.losses import LossKind
from fairreg.problem import FairProblem
from fairreg.relax import sweep_objective_1d

out = sys.argv[1] if len(sys.argv) > 1 else "curves"

ds = gen_zafar_classification(200, seed=0)
grid = np.linspace(-3, 3, 601)

for lam in (0.5, 1.0, 2.0, 5.0):
    spec = FairnessSpec.regularized(Breakpoints([0.0]), lam, ParityVariant("complement", "one"))
    pr = FairProblem.from_dataset(ds, LossKind.LOGISTIC, spec)
    cols = sweep_objective_1d(pr, ds, 0, np.zeros(2), grid)

    table = np.column_stack([grid] + [cols[c] for c in ("exact", "strong", "linear", "convex")])
    path = "%s_lam%g.csv" % (out, lam)
    np.savetxt(path, table, delimiter=",", header="w_1,exact,strong,linear,convex", comments="")

    gap = cols["exact"] - cols["strong"]
    best = {c: grid[np.argmin(cols[c])] for c in ("exact", "strong", "linear", "convex")}
    print("lambda %g -> %s" % (lam, path))
    print("   exact - strong: max %.4f, mean %.4f" % (gap.max(), gap.mean()))
    print("   argmin w_1:", "  ".join("%s %.2f" % kv for kv in best.items()))
