from .arht import arht, arht_core, arht_robust, core_iterations, robust_repetitions, sample_unregularize_index
from .config import SolverConfig
from .greedy import els_step, exhaustive_local_search, iht, initial_support, omp, ompr, ompr_step
from .lasso import kkt_residual, lasso_path, lasso_solve, soft_threshold

SOLVERS = {
    "iht": iht,
    "omp": omp,
    "ompr": ompr,
    "els": exhaustive_local_search,
    "arht": arht,
    "lasso": lasso_path,
}

__all__ = [
    "SOLVERS",
    "SolverConfig",
    "arht",
    "arht_core",
    "arht_robust",
    "core_iterations",
    "els_step",
    "exhaustive_local_search",
    "iht",
    "initial_support",
    "kkt_residual",
    "lasso_path",
    "lasso_solve",
    "omp",
    "ompr",
    "ompr_step",
    "robust_repetitions",
    "sample_unregularize_index",
    "soft_threshold",
]
