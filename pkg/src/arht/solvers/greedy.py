"""IHT, OMP, OMPR and exhaustive local search."""

from __future__ import annotations

from typing import Optional

import numpy as np

from ..core import DivergenceError, InvalidArgument, Objective, SolverReport, TraceStep, hard_threshold
from ..objectives import estimate_rho2_plus
from .config import SolverConfig


def _complement(n: int, support) -> np.ndarray:
    mask = np.ones(n, dtype=bool)
    mask[list(support)] = False
    return np.flatnonzero(mask)


def _removable(support, pinned) -> np.ndarray:
    pinned = set(pinned)
    return np.array([j for j in support if j not in pinned], dtype=np.intp)


def _pick_max_abs(values: np.ndarray, candidates: np.ndarray) -> int:
    # candidates are sorted, so argmax's first hit is the lowest index
    return int(candidates[np.argmax(np.abs(values[candidates]))])


def _pick_min_abs(values: np.ndarray, candidates: np.ndarray) -> int:
    return int(candidates[np.argmin(np.abs(values[candidates]))])


def _swap(support, i: int, j: int) -> tuple:
    return tuple(sorted((set(support) - {j}) | {i}))


def iht(f: Objective, cfg: SolverConfig, step: Optional[float] = None) -> SolverReport:
    """Iterative hard thresholding: ``x <- H_s(x - step * grad f(x))``.

    Runs exactly ``cfg.max_iterations`` updates. Pinned coordinates are always
    kept and count toward the sparsity. The default step is
    ``2 / estimate_rho2_plus(f)``.
    """
    cfg.check_dimension(f.n)
    eta = 2.0 / estimate_rho2_plus(f) if step is None else float(step)
    if eta <= 0:
        raise InvalidArgument("step must be positive")
    pinned = np.array(cfg.pinned, dtype=np.intp)
    free = cfg.sparsity - pinned.size
    x = f.zero()
    trace = [TraceStep(0, (), f.value(x), "init")]
    for t in range(1, cfg.max_iterations + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            y = x - eta * f.gradient(x)
            if np.all(np.isfinite(y)):
                keep = y[pinned].copy()
                y[pinned] = 0.0
                x = hard_threshold(y, free)
                x[pinned] = keep
                value = f.value(x)
        if not (np.all(np.isfinite(y)) and np.isfinite(value)):
            raise DivergenceError(f"IHT diverged at iteration {t} with step {eta}")
        support = tuple(sorted(set(np.flatnonzero(x).tolist()) | set(cfg.pinned)))
        trace.append(TraceStep(t, support, value, "threshold"))
    support = tuple(sorted(set(np.flatnonzero(x).tolist()) | set(cfg.pinned)))
    return SolverReport(x, support, f.value(x), trace, cfg.rng_seed, extra={"step": eta})


def omp(f: Objective, cfg: SolverConfig) -> SolverReport:
    """Orthogonal matching pursuit: grow the support by the largest gradient entry, re-fit."""
    cfg.check_dimension(f.n)
    flags: set = set()
    support = tuple(cfg.pinned)
    x = f.restricted_minimize(support, cfg.inner_tol, flags=flags)
    trace = [TraceStep(0, support, f.value(x), "init")]
    t = 0
    while len(support) < cfg.sparsity:
        t += 1
        i = _pick_max_abs(f.gradient(x), _complement(f.n, support))
        support = tuple(sorted(support + (i,)))
        x = f.restricted_minimize(support, cfg.inner_tol, flags=flags, x0=x)
        trace.append(TraceStep(t, support, f.value(x), "insert"))
    return SolverReport(x, support, f.value(x), trace, cfg.rng_seed, flags)


def initial_support(f: Objective, cfg: SolverConfig) -> tuple:
    """Starting support for the replacement methods (see ``SolverConfig.init``)."""
    cfg.check_dimension(f.n)
    if cfg.initial_support is not None:
        S = cfg.initial_support
        if len(S) != cfg.sparsity:
            raise InvalidArgument(f"initial support has {len(S)} indices, expected {cfg.sparsity}")
        if not set(cfg.pinned) <= set(S):
            raise InvalidArgument("initial support must contain the pinned coordinates")
        if S and (S[0] < 0 or S[-1] >= f.n):
            raise InvalidArgument("initial support index out of range")
        return S
    if cfg.init == "omp":
        return omp(f, cfg).support
    rest = [i for i in range(f.n) if i not in set(cfg.pinned)]
    return tuple(sorted(cfg.pinned + tuple(rest[: cfg.sparsity - len(cfg.pinned)])))


def ompr_step(f: Objective, support, x: np.ndarray, pinned=(), tol: float = 1e-10, flags=None):
    """One OMPR probe from an S-restricted minimizer ``x``.

    Inserts the outside index with the largest gradient magnitude and removes the
    non-pinned support index of smallest magnitude. Returns
    ``(new_support, new_x, inserted, removed)`` or ``None`` when no swap exists.
    """
    outside = _complement(f.n, support)
    removable = _removable(support, pinned)
    if outside.size == 0 or removable.size == 0:
        return None
    i = _pick_max_abs(f.gradient(x), outside)
    j = _pick_min_abs(x, removable)
    new_support = _swap(support, i, j)
    return new_support, f.restricted_minimize(new_support, tol, flags=flags), i, j


def els_step(f: Objective, support, x: np.ndarray, pinned=(), tol: float = 1e-10, flags=None):
    """One exhaustive local search probe: same removal as OMPR, best entrant by full re-fit."""
    outside = _complement(f.n, support)
    removable = _removable(support, pinned)
    if outside.size == 0 or removable.size == 0:
        return None
    j = _pick_min_abs(x, removable)
    base = [k for k in support if k != j]
    best = None
    for i in outside:
        cand = f.restricted_minimize(base + [int(i)], tol, flags=flags)
        val = f.value(cand)
        if best is None or val < best[0]:
            best = (val, int(i), cand)
    _, i, x_new = best
    return _swap(support, i, j), x_new, i, j


def _local_search(f: Objective, cfg: SolverConfig, step_fn) -> SolverReport:
    flags: set = set()
    support = initial_support(f, cfg)
    x = f.restricted_minimize(support, cfg.inner_tol, flags=flags)
    value = f.value(x)
    trace = [TraceStep(0, support, value, "init")]
    extra: dict = {}
    for t in range(1, cfg.max_iterations + 1):
        probe = step_fn(f, support, x, cfg.pinned, cfg.inner_tol, flags)
        if probe is None:
            flags.add("no_swap")
            break
        new_support, x_new, _, _ = probe
        new_value = f.value(x_new)
        if new_value >= value and not cfg.run_exactly_t:
            extra["rejected_probe_value"] = new_value
            break
        support, x, value = new_support, x_new, new_value
        trace.append(TraceStep(t, support, value, "insert-remove"))
    else:
        if not cfg.run_exactly_t:
            flags.add("max_iterations")
    return SolverReport(x, support, value, trace, cfg.rng_seed, flags, extra)


def ompr(f: Objective, cfg: SolverConfig) -> SolverReport:
    """Orthogonal matching pursuit with replacement.

    Stops at the first non-improving swap and returns the last improving
    iterate, unless ``cfg.run_exactly_t`` forces exactly ``max_iterations``
    swaps (the final iterate is returned then).
    """
    return _local_search(f, cfg, ompr_step)


def exhaustive_local_search(f: Objective, cfg: SolverConfig) -> SolverReport:
    """Like OMPR, but the entrant is the index whose swap gives the lowest re-fitted value.

    Costs ``n - s`` restricted solves per iteration.
    """
    return _local_search(f, cfg, els_step)
