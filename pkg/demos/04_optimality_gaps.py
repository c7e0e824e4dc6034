"""
How far are the heuristics from optimal?
========================================

On a handful of small synthetic instances, compare the strong relaxation
and three coordinate descent starts against the branch-and-bound lower
bound.  This is the same computation as ``fairreg gaps``.
"""

import numpy as np

from fairreg.bnb import BnbOptions, optimality_gap, solve_mio
from fairreg.cd import CdOptions, cd_run
from fairreg.data import gen_synthetic_regression
from fairreg.fairness import FairnessSpec, ParityVariant, make_grid
from fairreg.formulations import build_strong
from fairreg.losses import LossKind
from fairreg.problem import FairProblem
from fairreg.relax import solve_relaxation

lams = (0.05, 0.2, 0.5)
methods = ("relax", "cd-fair", "cd-acc", "cd-relax", "mio")
gaps = {m: [] for m in methods}

for seed in range(4):
    ds = gen_synthetic_regression(n=4, m=16, seed=seed)[0]
    for lam in lams:
        spec = FairnessSpec.regularized(make_grid(0, 1, 11), lam, ParityVariant("marginal", "abs"))
        pr = FairProblem.from_dataset(ds, LossKind.SQUARED, spec)
        w_relax = solve_relaxation(build_strong(pr)).w
        objs = {"relax": pr.value(w_relax)}
        ws = [w_relax]
        for m, init in (("cd-fair", "zero"), ("cd-acc", "unfair"), ("cd-relax", "relax")):
            res = cd_run(pr, CdOptions(init=init, restarts=1, seed=seed), w_relax)
            objs[m] = res.objective
            ws.append(res.w)
        mio = solve_mio(build_strong(pr), BnbOptions(time_limit=10.0, initial=ws))
        objs["mio"] = mio.obj_ub
        for m in methods:
            gaps[m].append(optimality_gap(objs[m], mio.obj_lb))
        print("seed %d lambda %.2f: %s, %d nodes" % (seed, lam, mio.status, mio.nodes))

print()
print("mean gap " + "  ".join("%s %.2f%%" % (m, 100 * np.mean(g)) for m, g in gaps.items()))
