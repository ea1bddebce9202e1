import itertools
import math

import numpy as np
import pytest

from arht import LeastSquaresObjective, LogisticObjective, SolverConfig, arht, estimate_rho2_plus, gaussian_planted, ompr
from arht.analysis import (
    brute_force_best_sparse,
    brute_force_restricted_constants,
    check_solution_recovery,
    check_support_recovery,
    compute_rgoc,
    gram_extreme_eigenvalues,
    rip_tradeoff_bound,
    sampled_rho_minus,
    verify_ompr_progress,
)
from arht.core import InvalidArgument
from arht.solvers import SOLVERS

from conftest import random_ls


# restricted constants


def test_diagonal_design_constants_are_analytic():
    d = np.array([1.0, 2.0, 0.5, 3.0])
    for level in (1, 2, 4):
        c = brute_force_restricted_constants(LeastSquaresObjective(np.diag(d), np.zeros(4)), level)
        assert c.method == "diagonal_analytic"
        assert (c.rho_plus, c.rho_minus, c.kappa) == (9.0, 0.25, 36.0)


def test_orthonormal_design_is_perfectly_conditioned():
    q, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((10, 6)))
    for level in range(1, 7):
        c = brute_force_restricted_constants(LeastSquaresObjective(q, np.zeros(10)), level)
        assert c.kappa == pytest.approx(1.0, abs=1e-12) and c.delta == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_pair_level_constants_match_eigen_oracle(seed):
    f = random_ls(8, 6, seed)
    G = f.A.T @ f.A
    hi, lo = -np.inf, np.inf
    for p in itertools.combinations(range(6), 2):
        ev = np.linalg.eigh(G[np.ix_(p, p)])[0]
        hi, lo = max(hi, ev[-1]), min(lo, ev[0])
    c = brute_force_restricted_constants(f, 2)
    assert c.rho_plus == pytest.approx(hi, rel=1e-12) and c.rho_minus == pytest.approx(lo, rel=1e-12)
    assert c.kappa == pytest.approx(hi / lo) and c.delta == pytest.approx((hi / lo - 1) / (hi / lo + 1))
    assert c.rho2_plus == pytest.approx(hi, rel=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_delta_monotone_and_kappa_tilde_bounded(seed):
    f = random_ls(12, 7, seed)
    cs = [brute_force_restricted_constants(f, s) for s in range(1, 8)]
    deltas = [c.delta for c in cs]
    assert all(b >= a - 1e-12 for a, b in zip(deltas, deltas[1:]))
    for c in cs[1:]:
        assert c.kappa_tilde <= c.kappa + 1e-12
        assert estimate_rho2_plus(f) >= c.rho2_plus - 1e-12


def test_enumeration_guard_reports_count():
    f = random_ls(5, 40, 0)
    with pytest.raises(InvalidArgument, match=str(math.comb(40, 20))):
        brute_force_restricted_constants(f, 20)


def test_logistic_constants_are_bounds():
    A = np.random.default_rng(1).standard_normal((10, 4))
    c = brute_force_restricted_constants(LogisticObjective(A, np.r_[np.zeros(5), np.ones(5)]), 2)
    q = brute_force_restricted_constants(LeastSquaresObjective(A, np.zeros(10)), 2)
    assert c.method == "bound" and c.rho_plus == pytest.approx(q.rho_plus / 4)


def test_sampled_rho_minus_over_estimates():
    f = random_ls(12, 8, 3)
    G = f.A.T @ f.A
    assert sampled_rho_minus(G, 3, samples=30) >= gram_extreme_eigenvalues(G, 3)[1] - 1e-12


# RIP tradeoff


@pytest.mark.parametrize("ratio, expected", [(1, 1 / 3), (2, (2 * math.sqrt(2) - 1) / (2 * math.sqrt(2) + 1)), (30, 0.8327)])
def test_rip_tradeoff_limits(ratio, expected):
    assert rip_tradeoff_bound(ratio * 3, 3, theta=0.0) == pytest.approx(expected, abs=1e-4)


def test_rip_tradeoff_validation():
    with pytest.raises(InvalidArgument):
        rip_tradeoff_bound(1, 2)
    with pytest.raises(InvalidArgument):
        rip_tradeoff_bound(2, 1, theta=1.0)


# RGOC


def test_rgoc_zero_at_global_minimizer():
    f = random_ls(10, 4, 0)
    x = f.restricted_minimize(range(4))
    for s in range(5):
        assert compute_rgoc(f, x, s) <= 1e-10


def test_rgoc_top_two_magnitudes():
    # gradient at 0 is -A^T b = (3, -4, 1)
    f = LeastSquaresObjective(np.eye(3), [-3.0, 4.0, -1.0])
    assert compute_rgoc(f, np.zeros(3), 2) == pytest.approx(5.0)


@pytest.mark.parametrize("seed", range(5))
def test_rgoc_equals_support_enumeration(seed):
    f = random_ls(10, 6, seed)
    x = np.random.default_rng(seed).standard_normal(6)
    g = f.gradient(x)
    for s in range(7):
        oracle = max((np.linalg.norm(g[list(S)]) for S in itertools.combinations(range(6), s)), default=0.0)
        assert compute_rgoc(f, x, s) == pytest.approx(oracle, rel=1e-12, abs=1e-15)
    vals = [compute_rgoc(f, x, s) for s in range(7)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert vals[-1] == pytest.approx(np.linalg.norm(g))


# recovery checks


def test_solution_recovery_trivial_and_degenerate():
    inst = gaussian_planted(30, 20, 3, 0.0, seed=0)
    f, xs = inst.objective, inst.x_star
    a = check_solution_recovery(f, xs, xs, 0.5, 0.0)
    assert a.l2_distance == 0 and a.condition_satisfied
    assert a.bound_rhs == pytest.approx(0.0, abs=1e-14) and a.rgoc == pytest.approx(0.0, abs=1e-14)
    b = check_solution_recovery(f, xs + 1e-3 * np.eye(20)[0], xs, 0.5, 0.0)
    assert not b.condition_satisfied
    c = check_solution_recovery(f, xs, xs, 0.5, 0.02)
    assert c.bound_rhs == pytest.approx(math.sqrt(2 * 0.02 / 0.5))


def test_solution_recovery_theta_form():
    inst = gaussian_planted(30, 20, 3, 0.5, seed=1)
    f = inst.objective
    a = check_solution_recovery(f, inst.x_star, inst.x_star, 0.5, 1e-12, theta=0.1, level=6)
    assert a.theta_rhs == pytest.approx(2.1 * a.rgoc / 0.5)
    assert a.bound_rhs <= a.theta_rhs


@pytest.mark.parametrize("seed", range(5))
def test_solution_recovery_bound_holds_for_arht_output(seed):
    inst = gaussian_planted(40, 16, 2, 0.0, seed)
    f = inst.objective
    eps = 1e-6
    rep = arht(f, SolverConfig(sparsity=4, epsilon=eps, rng_seed=seed))
    level = len(set(rep.support) | set(inst.support_star))
    consts = brute_force_restricted_constants(f, level)
    a = check_solution_recovery(f, rep.x, inst.x_star, consts.rho_minus, eps)
    assert a.condition_satisfied and a.support_recovered


def test_support_recovery_vacuous_for_zero_target():
    a = check_support_recovery(np.ones(3), np.zeros(3), 1.0, 1.0)
    assert a.support_recovered and a.condition_satisfied


def test_support_recovery_noiseless_planted():
    recovered = 0
    for seed in range(20):
        inst = gaussian_planted(60, 40, 4, 0.0, seed)
        f = inst.objective
        zeta = compute_rgoc(f, inst.x_star, 8)
        rep = ompr(f, SolverConfig(sparsity=8))
        a = check_support_recovery(rep.x, inst.x_star, zeta, 0.1)
        assert zeta == pytest.approx(0.0, abs=1e-12) and a.condition_satisfied
        recovered += a.support_recovered
    assert recovered == 20


def test_support_recovery_reports_unsatisfied_condition():
    inst = gaussian_planted(20, 10, 3, 2.0, seed=2)
    f = inst.objective
    zeta = compute_rgoc(f, inst.x_star, 6)
    a = check_support_recovery(inst.x_star, inst.x_star, zeta, 0.01)
    assert not a.condition_satisfied and a.support_recovered


# progress lemma


def test_progress_trivial_when_target_contained():
    inst = gaussian_planted(20, 8, 2, 0.0, seed=0)
    f = inst.objective
    extra = [i for i in range(8) if i not in inst.support_star][:2]
    S = tuple(sorted(set(inst.support_star) | set(extra)))
    chk = verify_ompr_progress(f, S, f.restricted_minimize(S), inst.x_star, 2.0, 0.5)
    assert chk.passed and chk.case == "contained"


def _progress_run(f, x_star, support_star, s):
    G = f.A.T @ f.A
    rho_minus = gram_extreme_eigenvalues(G, min(f.n, s + len(support_star)))[1]
    c = brute_force_restricted_constants(f, 2)
    S = tuple(sorted(set(range(f.n)) - set(support_star)))[:s]
    x = f.restricted_minimize(S)
    checks = []
    from arht.solvers import ompr_step

    for _ in range(30):
        checks.append(verify_ompr_progress(f, S, x, x_star, c.rho2_plus, rho_minus))
        step = ompr_step(f, S, x)
        if step is None or f.value(step[1]) >= f.value(x):
            break
        S, x = step[0], step[1]
    return checks


def test_progress_well_conditioned_regime():
    inst = gaussian_planted(400, 10, 2, 0.0, seed=3)
    checks = _progress_run(inst.objective, inst.x_star, inst.support_star, 6)
    assert all(checks)
    assert any(c.case == "well_conditioned" and c.mu * c.kappa_tilde <= 1 for c in checks)


def test_progress_ill_conditioned_regime_with_optimal_target():
    inst = gaussian_planted(8, 10, 2, 0.0, seed=4)
    scale = np.random.default_rng(4).uniform(0.3, 3.0, size=10)
    f = LeastSquaresObjective(inst.objective.A * scale, inst.objective.b)
    x_star = f.restricted_minimize(inst.support_star)
    checks = _progress_run(f, x_star, inst.support_star, 3)
    assert all(checks)
    assert any(c.case == "target_optimal_on_union" and c.mu * c.kappa_tilde > 1 for c in checks)


def test_progress_requires_enough_sparsity():
    inst = gaussian_planted(20, 8, 3, 0.0, seed=0)
    with pytest.raises(InvalidArgument):
        verify_ompr_progress(inst.objective, (0,), np.zeros(8), inst.x_star, 2.0, 0.5)


# brute force oracle


def test_best_sparse_edge_cases():
    f = random_ls(8, 4, 0)
    x0, v0 = brute_force_best_sparse(f, 0)
    assert v0 == f.value(np.zeros(4)) and not x0.any()
    _, vn = brute_force_best_sparse(f, 4)
    assert vn == pytest.approx(f.unrestricted_minimum(), abs=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_best_sparse_lower_bounds_solvers(seed):
    f = random_ls(8, 6, seed)
    _, best = brute_force_best_sparse(f, 2)
    for name, solver in SOLVERS.items():
        assert solver(f, SolverConfig(sparsity=2, epsilon=1e-4)).value >= best - 1e-10, name
