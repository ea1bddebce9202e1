"""Adaptively regularized hard thresholding: core routine, repetitions, and binary search driver."""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from ..core import Objective, SolverReport, TraceStep
from ..objectives import RegularizedObjective, lower_bound
from .config import SolverConfig
from .greedy import _complement, _pick_max_abs, _pick_min_abs, _removable, _swap, initial_support


def core_iterations(s: int, f_zero: float, lower: float, eps: float) -> int:
    """Iteration budget ``ceil(2 s ln((f(0) - B) / eps))``, at least 1."""
    gap = f_zero - lower
    if gap <= eps:
        return 1
    return max(1, math.ceil(2 * s * math.log(gap / eps)))


def robust_repetitions(n: int, f_zero: float, lower: float, eps: float) -> int:
    """Repetition count ``ceil(5 ln(6 n ln((f(0) - B) / eps)))``, at least 1."""
    gap = f_zero - lower
    if gap <= eps:
        return 1
    inner = 6 * n * math.log(gap / eps)
    if inner <= 1:
        return 1
    return max(1, math.ceil(5 * math.log(inner)))


def sample_unregularize_index(x: np.ndarray, reg_mask: np.ndarray, rng: np.random.Generator) -> Optional[int]:
    """Draw ``i`` in ``R`` with probability ``x_i^2 / ||x_R||^2``; None if ``x_R = 0``."""
    idx = np.flatnonzero(reg_mask)
    cum = np.cumsum(np.asarray(x)[idx] ** 2)
    if idx.size == 0 or not cum[-1] > 0:
        return None
    k = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
    return int(idx[min(k, idx.size - 1)])


def _seed_for(master: int, *key: int) -> int:
    return int(np.random.SeedSequence([int(master), *key]).generate_state(1)[0])


def arht_core(
    f: Objective,
    cfg: SolverConfig,
    opt: float,
    *,
    lower: Optional[float] = None,
    eps: Optional[float] = None,
    seed: Optional[int] = None,
) -> SolverReport:
    """Single randomized run of ARHT against the target value ``opt``.

    Each iteration first checks whether the plain restricted minimum on the
    current support already reaches ``opt`` (and returns it if so). Otherwise an
    OMPR swap on the regularized objective is committed when it makes enough
    progress (type 1); if not, one index of ``R`` is sampled proportionally to
    ``x_i^2`` and unregularized (type 2).
    """
    cfg.check_dimension(f.n)
    lower = lower_bound(f) if lower is None else lower
    eps = cfg.epsilon if eps is None else eps
    seed = cfg.rng_seed if seed is None else seed
    rng = np.random.default_rng(seed)
    flags: set = set()
    tol = cfg.inner_tol
    s = cfg.sparsity

    reg = [i for i in range(f.n) if i not in set(cfg.pinned)]
    g = RegularizedObjective(f, weight=cfg.weight, reg_set=reg)
    support = initial_support(f, cfg)
    x, g_x = g.restricted_minimum(support, tol, flags=flags)
    f_zero = f.value(f.zero())
    budget = min(cfg.max_iterations, core_iterations(s, f_zero, lower, eps))
    progress = cfg.effective_progress_fraction / max(s, 1)

    def in_reg(S):
        return int(np.count_nonzero(g.reg_mask[list(S)]))

    trace = [TraceStep(0, support, g_x - g.penalty(x), "init", g_after=g_x, opt=opt, reg_in_support=in_reg(support))]
    counts = {"type1": 0, "type2": 0}
    extra = {"budget": budget, "weight": g.weight, "opt": opt}

    checked = None  # type-2 steps keep S, so the unregularized check is reused
    for t in range(1, budget + 1):
        if support != checked:
            x_f, f_s = f.restricted_minimum(support, tol, flags=flags, x0=x)
            checked = support
        if f_s <= opt:
            flags.add("early_exit")
            extra.update(counts, exit_iteration=t)
            return SolverReport(x_f, support, f_s, trace, seed, flags, extra)

        outside = _complement(f.n, support)
        removable = _removable(support, cfg.pinned)
        if outside.size == 0 or removable.size == 0:
            flags.add("no_swap")
            break
        # x is an S-restricted minimizer of g, so the gradient argmax over [n] is attained outside S
        i = _pick_max_abs(g.gradient(x), outside)
        j = _pick_min_abs(x, removable)
        new_support = _swap(support, i, j)
        x_new, g_new = g.restricted_minimum(new_support, tol, flags=flags)

        if g_x - g_new >= progress * (g_x - opt):
            trace.append(TraceStep(t, new_support, g_new - g.penalty(x_new), "type1", g_x, g_new, opt, in_reg(new_support)))
            support, x, g_x = new_support, x_new, g_new
            counts["type1"] += 1
            continue

        if cfg.use_early_stop:
            unreg_in_support = len(support) - in_reg(support)
            if unreg_in_support >= 0.5 * len(support):
                flags.add("early_stopped")
                break
        k = sample_unregularize_index(x, g.reg_mask, rng)
        if k is None:
            flags.add("stalled")
            break
        g.unregularize(k)
        g_before = g_x
        x, g_x = g.restricted_minimum(support, tol, flags=flags, x0=x)
        counts["type2"] += 1
        trace.append(TraceStep(t, support, g_x - g.penalty(x), "type2", g_before, g_x, opt, in_reg(support), k))

    extra.update(counts)
    return SolverReport(x, support, f.value(x), trace, seed, flags, extra)


def arht_robust(
    f: Objective,
    cfg: SolverConfig,
    opt: float,
    lower: float,
    *,
    eps: Optional[float] = None,
) -> SolverReport:
    """Repeat ``arht_core`` with fresh seeds and keep the lowest-valued solution.

    The count is ``robust_repetitions`` unless ``cfg.repetitions`` overrides it.
    The first repetition uses ``cfg.rng_seed`` itself, so one forced repetition
    reproduces ``arht_core`` exactly. With ``cfg.stop_on_success`` the loop ends
    at the first run reaching ``opt + eps``.
    """
    eps = cfg.epsilon if eps is None else eps
    if cfg.initial_support is None:
        cfg = cfg.replace(initial_support=initial_support(f, cfg))
    f_zero = f.value(f.zero())
    reps = cfg.repetitions or robust_repetitions(f.n, f_zero, lower, eps)

    best = SolverReport(f.zero(), (), f_zero, [], cfg.rng_seed)
    flags: set = set()
    core_traces = []
    core_values = []
    for z in range(reps):
        seed = cfg.rng_seed if z == 0 else _seed_for(cfg.rng_seed, z)
        rep = arht_core(f, cfg, opt, lower=lower, eps=eps, seed=seed)
        flags |= rep.flags
        core_traces.append(rep.trace)
        core_values.append(rep.value)
        if rep.value < best.value:
            best = rep
        if cfg.stop_on_success and rep.value <= opt + eps:
            break
    out = SolverReport(best.x, best.support, best.value, best.trace, best.rng_seed, flags | best.flags, dict(best.extra))
    out.extra.update(repetitions=reps, repetitions_run=len(core_values), core_values=core_values, core_traces=core_traces)
    return out


def arht(f: Objective, cfg: SolverConfig) -> SolverReport:
    """Binary search on the target value around ``arht_robust``.

    Keeps ``l <= f(x*)`` and ``f(b) = r``; stops once ``r - l <= eps`` and returns
    ``b``. Every step is recorded in ``extra["binary_search"]``.
    """
    cfg.check_dimension(f.n)
    eps = cfg.epsilon
    if cfg.initial_support is None:
        cfg = cfg.replace(initial_support=initial_support(f, cfg))
    lower = lower_bound(f)
    lo = lower
    best_x = f.zero()
    hi = f.value(best_x)
    best_report: Optional[SolverReport] = None
    steps = []
    core_traces = []
    flags: set = set()
    k = 0
    while hi - lo > eps:
        if k >= cfg.max_binary_steps:
            flags.add("binary_search_cap")
            break
        mid = 0.5 * (lo + hi)
        step_cfg = cfg.replace(rng_seed=_seed_for(cfg.rng_seed, 10_000 + k))
        rep = arht_robust(f, step_cfg, mid, lower, eps=eps / 3)
        flags |= rep.flags
        core_traces.extend(rep.extra["core_traces"])
        accepted = rep.value <= mid + eps / 3
        prev = (lo, hi)
        if accepted:
            best_x, hi, best_report = rep.x, rep.value, rep
        else:
            lo = mid
        steps.append({"l_before": prev[0], "r_before": prev[1], "m": mid, "value": rep.value,
                      "accepted": accepted, "l": lo, "r": hi, "seed": step_cfg.rng_seed})
        k += 1
    support = best_report.support if best_report is not None else ()
    trace = best_report.trace if best_report is not None else []
    extra = {"lower_bound": lower, "binary_search": steps, "core_traces": core_traces, "calls": k}
    return SolverReport(best_x, support, f.value(best_x), trace, cfg.rng_seed, flags, extra)
