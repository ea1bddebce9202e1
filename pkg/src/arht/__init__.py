"""Sparse convex optimization: greedy and hard-thresholding solvers with analysis tooling."""

from .core import (
    DivergenceError,
    InvalidArgument,
    Objective,
    SolverReport,
    TraceStep,
    hard_threshold,
    support_of,
)
from .objectives import (
    LeastSquaresObjective,
    LogisticObjective,
    RegularizedObjective,
    estimate_rho2_plus,
    lower_bound,
)
from .solvers import (
    SOLVERS,
    SolverConfig,
    arht,
    arht_core,
    arht_robust,
    exhaustive_local_search,
    iht,
    lasso_path,
    omp,
    ompr,
)
from .instances import PlantedInstance, gaussian_planted, ompr_adversarial
from .data import Dataset, DatasetError, load_csv, preprocess
from .sweep import SweepRecord, SweepResult, emit_results, read_results, run_sweep

__version__ = "0.1.0"
