"""l1-penalized baseline: proximal gradient plus a bisection on the penalty for a target sparsity."""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from ..core import InvalidArgument, Objective, SolverReport, TraceStep, support_of
from ..objectives import LeastSquaresObjective, LogisticObjective
from .config import SolverConfig


def soft_threshold(v: np.ndarray, t) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def _lipschitz(f: Objective) -> float:
    if isinstance(f, LeastSquaresObjective):
        return float(np.linalg.norm(f.A, 2) ** 2)
    if isinstance(f, LogisticObjective):
        return 0.25 * float(np.linalg.norm(f.A, 2) ** 2)
    raise InvalidArgument(f"lasso needs a least squares or logistic objective, got {type(f).__name__}")


def kkt_residual(f: Objective, x: np.ndarray, lam: float, penalized: Optional[np.ndarray] = None) -> float:
    """Distance of ``-grad f(x)`` from ``lam * subdiff ||x||_1`` in the infinity norm."""
    grad = f.gradient(x)
    w = lam * (np.ones(f.n) if penalized is None else penalized.astype(float))
    on = x != 0
    res = np.where(on, np.abs(grad + w * np.sign(x)), np.maximum(np.abs(grad) - w, 0.0))
    return float(np.max(res)) if res.size else 0.0


def lasso_solve(
    f: Objective,
    lam: float,
    *,
    penalized: Optional[np.ndarray] = None,
    x0: Optional[np.ndarray] = None,
    tol: float = 1e-9,
    max_iter: int = 50_000,
) -> np.ndarray:
    """Minimize ``f(x) + lam * ||x_P||_1`` by proximal gradient with step ``1/L``.

    ``penalized`` is a boolean mask ``P`` (all coordinates by default).
    """
    if lam < 0:
        raise InvalidArgument("lam must be non-negative")
    step = 1.0 / _lipschitz(f)
    w = lam * (np.ones(f.n) if penalized is None else penalized.astype(float))
    x = f.zero() if x0 is None else np.array(x0, dtype=float)
    for it in range(max_iter):
        x = soft_threshold(x - step * f.gradient(x), step * w)
        if it % 10 == 0 and kkt_residual(f, x, lam, penalized) <= tol:
            break
    return x


def lasso_path(
    f: Objective,
    cfg: SolverConfig,
    *,
    bisection_steps: int = 50,
    debias: bool = True,
    tol: float = 1e-9,
) -> SolverReport:
    """Find a penalty whose l1 solution has ``cfg.sparsity`` nonzeros.

    Bisects ``lam`` geometrically over ``[1e-8 lam_max, lam_max]`` with
    ``lam_max = ||grad f(z)||_inf`` at the pinned-only fit ``z``. Pinned
    coordinates are unpenalized and always counted. If no penalty hits the
    target exactly, the closest sparsity below it is kept and
    ``sparsity_not_attained`` is flagged. With ``debias`` the solution is
    re-fitted on its support.
    """
    cfg.check_dimension(f.n)
    s = cfg.sparsity
    if s < 1:
        raise InvalidArgument("lasso_path needs sparsity >= 1")
    flags: set = set()
    pinned = list(cfg.pinned)
    penalized = np.ones(f.n, dtype=bool)
    penalized[pinned] = False
    base = f.restricted_minimize(pinned, cfg.inner_tol, flags=flags)
    lam_max = float(np.max(np.abs(f.gradient(base))[penalized])) if penalized.any() else 0.0

    def support_size(x):
        return len(set(support_of(x).tolist()) | set(pinned))

    trace = [TraceStep(0, tuple(pinned), f.value(base), "init")]
    best_x, best_lam, best_k = base, lam_max, len(pinned)
    if lam_max > 0:
        lo, hi = math.log(1e-8 * lam_max), math.log(lam_max)
        x_warm = base
        for t in range(1, bisection_steps + 1):
            lam = math.exp(0.5 * (lo + hi))
            x = lasso_solve(f, lam, penalized=penalized, x0=x_warm, tol=tol)
            k = support_size(x)
            trace.append(TraceStep(t, tuple(sorted(set(support_of(x).tolist()) | set(pinned))), f.value(x), "bisect"))
            if k <= s and k >= best_k:
                best_x, best_lam, best_k = x, lam, k
            if k == s:
                break
            if k > s:
                lo = math.log(lam)
            else:
                hi = math.log(lam)
                x_warm = x
    if best_k != s:
        flags.add("sparsity_not_attained")
    support = tuple(sorted(set(support_of(best_x).tolist()) | set(pinned)))
    x_out = best_x
    if debias:
        x_out = f.restricted_minimize(support, cfg.inner_tol, flags=flags)
        flags.add("debiased")
    extra = {"lambda": best_lam, "lambda_max": lam_max, "lasso_objective": f.value(best_x) + best_lam * float(np.abs(best_x[penalized]).sum())}
    return SolverReport(x_out, support, f.value(x_out), trace, cfg.rng_seed, flags, extra)
