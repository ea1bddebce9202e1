from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Optional

from ..core import DEFAULT_INNER_TOL, InvalidArgument

INIT_POLICIES = ("omp", "prefix")


@dataclass(frozen=True)
class SolverConfig:
    """Run parameters shared by every solver.

    ``sparsity`` counts every coordinate in the support, pinned ones included.
    ``init`` picks the starting support of the replacement methods when
    ``initial_support`` is not given: ``"omp"`` warm-starts from OMP at the same
    sparsity, ``"prefix"`` takes the pinned indices plus the lowest remaining ones.
    ``strict`` switches ARHT to the unrelaxed progress test (fraction 1) and
    disables the early-stop heuristic.
    """

    sparsity: int
    epsilon: float = 1e-6
    max_iterations: int = 1000
    rng_seed: int = 0
    progress_fraction: float = 1e-3
    inner_tol: float = DEFAULT_INNER_TOL
    initial_support: Optional[tuple] = None
    init: str = "omp"
    pinned: tuple = ()
    run_exactly_t: bool = False
    strict: bool = False
    early_stop: bool = False
    repetitions: Optional[int] = None
    weight: Optional[float] = None
    stop_on_success: bool = True
    max_binary_steps: int = 200

    def __post_init__(self):
        if self.sparsity < 0:
            raise InvalidArgument("sparsity must be non-negative")
        if not self.epsilon > 0:
            raise InvalidArgument("epsilon must be positive")
        if not 0 < self.progress_fraction <= 1:
            raise InvalidArgument("progress_fraction must lie in (0, 1]")
        if self.max_iterations < 0:
            raise InvalidArgument("max_iterations must be non-negative")
        if self.init not in INIT_POLICIES:
            raise InvalidArgument(f"init must be one of {INIT_POLICIES}")
        if len(set(self.pinned)) > self.sparsity:
            raise InvalidArgument("more pinned coordinates than the sparsity allows")
        if self.repetitions is not None and self.repetitions < 1:
            raise InvalidArgument("repetitions must be >= 1")
        object.__setattr__(self, "pinned", tuple(sorted(set(int(i) for i in self.pinned))))
        if self.initial_support is not None:
            object.__setattr__(self, "initial_support", tuple(sorted(set(int(i) for i in self.initial_support))))

    @property
    def effective_progress_fraction(self) -> float:
        return 1.0 if self.strict else self.progress_fraction

    @property
    def use_early_stop(self) -> bool:
        return self.early_stop and not self.strict

    def replace(self, **changes) -> "SolverConfig":
        return dataclasses.replace(self, **changes)

    def check_dimension(self, n: int) -> None:
        if self.sparsity > n:
            raise InvalidArgument(f"sparsity {self.sparsity} exceeds dimension {n}")
        if self.pinned and self.pinned[-1] >= n:
            raise InvalidArgument("pinned index out of range")
