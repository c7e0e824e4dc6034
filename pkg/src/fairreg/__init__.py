"""Fair linear regression and classification with discretized demographic parity.

The package offers exact objective evaluation, big-M and strong (perspective)
mixed-integer formulations, their conic relaxations, coordinate descent over
threshold crossings, a small branch-and-bound, and a command-line harness.
"""

__version__ = "0.1.0"

from .bnb import BnbOptions, MioResult, brute_force_exact, solve_mio
from .cd import CdOptions, CdResult, candidate_set, cd_run, cd_update, eval_R
from .data import Dataset, gen_synthetic_regression, gen_zafar_classification, load_csv, save_csv, split
from .fairness import (Breakpoints, FairnessSpec, ParityVariant, dp_ell, dp_exact, make_grid,
                       parse_grid)
from .formulations import (ModelIR, add_chain_cuts, build_nat, build_strong, derive_bigM,
                           export_lp)
from .losses import LossKind, Regularizer, perspective
from .problem import FairProblem
from .relax import RelaxationEngine, SolveOptions, solve_relaxation, sweep_objective_1d

__all__ = [
    "BnbOptions", "Breakpoints", "CdOptions", "CdResult", "Dataset", "FairProblem",
    "FairnessSpec", "LossKind", "MioResult", "ModelIR", "ParityVariant", "RelaxationEngine",
    "Regularizer", "SolveOptions", "add_chain_cuts", "brute_force_exact", "build_nat",
    "build_strong", "candidate_set", "cd_run", "cd_update", "derive_bigM", "dp_ell", "dp_exact",
    "eval_R", "export_lp", "gen_synthetic_regression", "gen_zafar_classification", "load_csv",
    "make_grid", "parse_grid", "perspective", "save_csv", "solve_mio", "solve_relaxation",
    "split", "sweep_objective_1d",
]
