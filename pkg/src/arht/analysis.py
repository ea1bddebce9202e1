"""Restricted condition numbers, recovery checks and per-step progress verification.

Everything here is brute force and meant for small instances used as test
oracles; enumeration is capped at ``MAX_COMBINATIONS`` supports.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import DEFAULT_ZERO_TOL, InvalidArgument, Objective, hard_threshold, support_of
from .objectives import LeastSquaresObjective, LogisticObjective

MAX_COMBINATIONS = 10 ** 6


@dataclass(frozen=True)
class RestrictedConstants:
    level: int
    rho_plus: float
    rho_minus: float
    kappa: float
    kappa_tilde: float
    delta: float
    rho2_plus: float
    method: str

    def to_dict(self) -> dict:
        return dict(vars(self))


def _guard(n: int, k: int, cap: int) -> None:
    count = math.comb(n, k)
    if count > cap:
        raise InvalidArgument(f"C({n}, {k}) = {count} supports exceeds the enumeration cap {cap}")


def _support_chunks(n: int, k: int, chunk: int = 20_000):
    it = itertools.combinations(range(n), k)
    while True:
        block = list(itertools.islice(it, chunk))
        if not block:
            return
        yield np.array(block, dtype=np.intp)


def gram_extreme_eigenvalues(G: np.ndarray, k: int, cap: int = MAX_COMBINATIONS) -> tuple:
    """Max of the largest and min of the smallest eigenvalue over all k x k principal submatrices."""
    n = G.shape[0]
    if not 1 <= k <= n:
        raise InvalidArgument(f"level must satisfy 1 <= level <= {n}")
    _guard(n, k, cap)
    hi, lo = -np.inf, np.inf
    for idx in _support_chunks(n, k):
        sub = G[idx[:, :, None], idx[:, None, :]]
        ev = np.linalg.eigvalsh(sub)
        hi = max(hi, float(ev[:, -1].max()))
        lo = min(lo, float(ev[:, 0].min()))
    return hi, lo


def pairwise_rho2_plus(G: np.ndarray) -> float:
    """Exact ``rho_2^+`` of a quadratic: largest eigenvalue over all 2 x 2 principal submatrices."""
    n = G.shape[0]
    d = np.diag(G)
    if n == 1:
        return float(d[0])
    iu, ju = np.triu_indices(n, k=1)
    a, c, off = d[iu], d[ju], G[iu, ju]
    return float(np.max(0.5 * (a + c) + np.sqrt(0.25 * (a - c) ** 2 + off ** 2)))


def sampled_rho_minus(G: np.ndarray, level: int, samples: int = 200, seed: int = 0) -> float:
    """Smallest eigenvalue seen over random ``level``-sized principal submatrices.

    This over-estimates the true restricted constant (a minimum over a subset of supports).
    """
    rng = np.random.default_rng(seed)
    n = G.shape[0]
    best = np.inf
    for _ in range(samples):
        S = rng.choice(n, size=level, replace=False)
        best = min(best, float(np.linalg.eigvalsh(G[np.ix_(S, S)])[0]))
    return best


def _constants(level, rho_plus, rho_minus, rho2_plus, method) -> RestrictedConstants:
    if rho_minus > 0:
        kappa = rho_plus / rho_minus
        kappa_tilde = rho2_plus / rho_minus
        delta = (kappa - 1) / (kappa + 1)
    else:
        kappa = kappa_tilde = math.inf
        delta = 1.0
    return RestrictedConstants(level, rho_plus, rho_minus, kappa, kappa_tilde, delta, rho2_plus, method)


def brute_force_restricted_constants(obj: Objective, level: int, cap: int = MAX_COMBINATIONS) -> RestrictedConstants:
    """``rho_s^+``, ``rho_s^-``, ``kappa_s``, ``kappa~_s`` and ``delta_s`` at sparsity ``level``.

    Quadratics are exact: extreme eigenvalues of the Gram matrix over every
    ``level``-subset (a diagonal Gram short-circuits to its extreme entries).
    For the logistic loss the quadratic constants of the design are scaled by
    the maximal sigmoid curvature 1/4; ``rho_minus`` is then only the upper
    end of the interval ``(0, rho^-_quad / 4]`` and the method is ``bound``.
    """
    if isinstance(obj, (LeastSquaresObjective, LogisticObjective)):
        G = obj.A.T @ obj.A
    else:
        raise InvalidArgument(f"no restricted constants for {type(obj).__name__}")
    n = G.shape[0]
    if not 1 <= level <= n:
        raise InvalidArgument(f"level must satisfy 1 <= level <= {n}")
    if np.count_nonzero(G - np.diag(np.diag(G))) == 0:
        d = np.diag(G)
        rho_plus, rho_minus = float(d.max()), float(d.min())
        rho2 = float(d.max())
        method = "diagonal_analytic"
    else:
        rho_plus, rho_minus = gram_extreme_eigenvalues(G, level, cap)
        rho2 = pairwise_rho2_plus(G)
        method = "brute_force"
    if isinstance(obj, LogisticObjective):
        rho_plus, rho_minus, rho2 = 0.25 * rho_plus, 0.25 * rho_minus, 0.25 * rho2
        method = "bound"
    return _constants(level, rho_plus, rho_minus, rho2, method)


def rip_tradeoff_bound(s: int, s_star: int, theta: float = 1e-6) -> float:
    """RIP threshold on ``delta_{s+s*}`` under which OMPR at sparsity ``s`` recovers the target.

    ``((2 - theta) sqrt(s/s*) - 1) / ((2 - theta) sqrt(s/s*) + 1)``; a small
    ``theta`` approximates the open limit.
    """
    if not s >= s_star >= 1:
        raise InvalidArgument("need s >= s_star >= 1")
    if not 0 <= theta < 1:
        raise InvalidArgument("theta must lie in [0, 1)")
    q = (2.0 - theta) * math.sqrt(s / s_star)
    return (q - 1.0) / (q + 1.0)


def compute_rgoc(f: Objective, x_star: np.ndarray, level: int) -> float:
    """l2 norm of the ``level`` largest-magnitude entries of ``grad f(x_star)``."""
    if not 0 <= level <= f.n:
        raise InvalidArgument(f"level must satisfy 0 <= level <= {f.n}")
    return float(np.linalg.norm(hard_threshold(f.gradient(x_star), level)))


@dataclass
class RecoveryAssessment:
    l2_distance: float
    support_recovered: bool
    rgoc: float
    bound_rhs: float
    condition_satisfied: bool
    theta_rhs: Optional[float] = None

    def to_dict(self) -> dict:
        return dict(vars(self))


def _contains_support(x, x_star, zero_tol) -> bool:
    return set(support_of(x_star, zero_tol).tolist()) <= set(support_of(x, zero_tol).tolist())


def check_solution_recovery(
    f: Objective,
    x: np.ndarray,
    x_star: np.ndarray,
    rho_minus: float,
    eps: float,
    theta: Optional[float] = None,
    *,
    level: Optional[int] = None,
    zero_tol: float = DEFAULT_ZERO_TOL,
) -> RecoveryAssessment:
    """Compare ``||x - x*||`` with ``(zeta + sqrt(zeta^2 + 2 eps rho^-)) / rho^-``.

    ``zeta`` is the RGOC at ``level`` (default: size of the union of both
    supports). When ``theta`` is given and ``eps <= zeta^2 theta (1 + theta/2) / rho^-``
    the simpler bound ``(2 + theta) zeta / rho^-`` is also reported.
    """
    if not rho_minus > 0:
        raise InvalidArgument("rho_minus must be positive")
    if eps < 0:
        raise InvalidArgument("eps must be non-negative")
    if level is None:
        level = len(set(support_of(x, zero_tol).tolist()) | set(support_of(x_star, zero_tol).tolist()))
    zeta = compute_rgoc(f, x_star, level)
    rhs = (zeta + math.sqrt(zeta * zeta + 2.0 * eps * rho_minus)) / rho_minus
    dist = float(np.linalg.norm(np.asarray(x) - np.asarray(x_star)))
    theta_rhs = None
    if theta is not None and zeta > 0 and eps <= zeta ** 2 * theta * (1 + theta / 2) / rho_minus:
        theta_rhs = (2 + theta) * zeta / rho_minus
    ok = dist <= rhs * (1 + 1e-9) + 1e-12
    return RecoveryAssessment(dist, _contains_support(x, x_star, zero_tol), zeta, rhs, ok, theta_rhs)


def check_support_recovery(
    x: np.ndarray,
    x_star: np.ndarray,
    zeta: float,
    rho_minus: float,
    *,
    zero_tol: float = DEFAULT_ZERO_TOL,
) -> RecoveryAssessment:
    """Report whether ``|x*_min| > zeta / rho^-`` holds and whether ``supp(x*) ⊆ supp(x)``.

    No pass/fail judgement is implied when the condition fails; callers decide.
    """
    if not rho_minus > 0:
        raise InvalidArgument("rho_minus must be positive")
    star = np.abs(np.asarray(x_star))[support_of(x_star, zero_tol)]
    threshold = zeta / rho_minus
    condition = True if star.size == 0 else bool(star.min() > threshold)
    dist = float(np.linalg.norm(np.asarray(x) - np.asarray(x_star)))
    return RecoveryAssessment(dist, _contains_support(x, x_star, zero_tol), zeta, threshold, condition)


@dataclass
class ProgressCheck:
    passed: bool
    case: str
    observed: float = math.nan
    bound: float = math.nan
    mu: float = math.nan
    kappa_tilde: float = math.nan
    missing: int = 0

    def __bool__(self) -> bool:
        return self.passed


def verify_ompr_progress(
    f: Objective,
    support,
    x_t: np.ndarray,
    x_star: np.ndarray,
    rho2_plus: float,
    rho_minus: float,
    *,
    x_next: Optional[np.ndarray] = None,
    pinned=(),
    inner_tol: float = 1e-10,
    slack: float = 1e-9,
) -> ProgressCheck:
    """Check one OMPR step against the per-step contraction bound.

    ``rho2_plus`` is the smoothness constant at sparsity 2 and ``rho_minus`` the
    strong convexity constant at ``|S| + s*``. With ``mu = sqrt(s*/s)`` and
    ``k = rho2_plus / rho_minus`` the contraction factor on ``f(x) - f(x*)`` is
    ``1 - mu/m`` when ``mu k <= 1`` (``m = |S* \\ S|``). Otherwise it is
    ``1 - (mu/m)(2 - mu k)`` when ``x*`` is optimal on ``S ∪ S*`` and
    ``1 - (mu/m)(2 - mu k - 2(mu k - 1)/(sqrt(a/b) - 1))`` in general, with
    ``a, b`` the gaps of ``f(x_t)`` and ``f(x*)`` above the optimum on ``S ∪ S*``.
    The step is taken with :func:`ompr_step` unless ``x_next`` is given.
    Steps where ``S* ⊆ S`` or ``f(x_t) <= f(x*)`` pass trivially.
    """
    from .solvers.greedy import ompr_step

    S = tuple(int(i) for i in support)
    star = tuple(support_of(x_star).tolist())
    if len(S) < len(star):
        raise InvalidArgument("the bound needs |S| >= s*")
    missing = sorted(set(star) - set(S))
    if not missing:
        return ProgressCheck(True, "contained")
    f_t, f_star = f.value(x_t), f.value(x_star)
    if f_t <= f_star:
        return ProgressCheck(True, "below_target")
    if x_next is None:
        step = ompr_step(f, S, x_t, pinned, inner_tol)
        if step is None:
            return ProgressCheck(True, "no_swap")
        x_next = step[1]
    f_next = f.value(x_next)
    mu = math.sqrt(len(star) / len(S))
    kt = rho2_plus / rho_minus
    r = mu / len(missing)
    if mu * kt <= 1:
        case, factor = "well_conditioned", 1 - r
    else:
        x_tilde = f.restricted_minimize(sorted(set(S) | set(star)), inner_tol)
        f_tilde = f.value(x_tilde)
        a, b = f_t - f_tilde, f_star - f_tilde
        if b <= slack * (1 + abs(f_star)):
            case, factor = "target_optimal_on_union", 1 - r * (2 - mu * kt)
        else:
            case = "general"
            factor = 1 - r * (2 - mu * kt - 2 * (mu * kt - 1) / (math.sqrt(a / b) - 1))
    bound = f_star + (f_t - f_star) * factor
    passed = f_next <= bound + slack * (1 + abs(f_t))
    return ProgressCheck(passed, case, f_next, bound, mu, kt, len(missing))


def brute_force_best_sparse(f: Objective, k: int, cap: int = MAX_COMBINATIONS, tol: float = 1e-12) -> tuple:
    """Exact best ``k``-sparse solution by enumerating supports; returns ``(x, value)``."""
    if not 0 <= k <= f.n:
        raise InvalidArgument(f"k must satisfy 0 <= k <= {f.n}")
    if k == 0:
        x = f.zero()
        return x, f.value(x)
    _guard(f.n, k, cap)
    best_x, best_val = None, math.inf
    for S in itertools.combinations(range(f.n), k):
        x = f.restricted_minimize(S, tol)
        val = f.value(x)
        if val < best_val:
            best_x, best_val = x, val
    return best_x, best_val
