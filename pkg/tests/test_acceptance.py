"""Acceptance criteria 1 to 9. Each test prints one PASS/FAIL line."""

import math
import time

import numpy as np
import pytest
from scipy import stats

from arht import LeastSquaresObjective, LogisticObjective, SolverConfig, arht, gaussian_planted, ompr, ompr_adversarial
from arht.analysis import (
    brute_force_best_sparse,
    gram_extreme_eigenvalues,
    pairwise_rho2_plus,
    rip_tradeoff_bound,
    sampled_rho_minus,
    verify_ompr_progress,
)
from arht.instances import adversarial_blocks
from arht.solvers import SOLVERS, ompr_step
from arht.solvers.arht import sample_unregularize_index
from arht.sweep import run_sweep

from conftest import random_ls, record

pytestmark = pytest.mark.acceptance

SEEDS = range(20)


# shared runs


@pytest.fixture(scope="session")
def adversarial():
    return ompr_adversarial(2, 4, 1e-3)


@pytest.fixture(scope="session")
def escape_runs(adversarial):
    inst, S0 = adversarial
    cfg = SolverConfig(sparsity=len(S0), epsilon=1e-3, initial_support=S0, early_stop=True)
    start = time.perf_counter()
    reports = [arht(inst.objective, cfg.replace(rng_seed=seed)) for seed in SEEDS]
    return reports, time.perf_counter() - start


S_STAR_4 = 4
KAPPA_TILDE_4 = 1.3
SPARSITY_4 = math.ceil(S_STAR_4 * max(4 * KAPPA_TILDE_4 + 7, 12 * KAPPA_TILDE_4 + 6))


@pytest.fixture(scope="session")
def planted_runs():
    out = []
    start = time.perf_counter()
    for seed in SEEDS:
        inst = gaussian_planted(150, 200, S_STAR_4, 0.0, seed)
        cfg = SolverConfig(sparsity=SPARSITY_4, epsilon=1e-6, init="prefix", rng_seed=seed)
        out.append((inst, arht(inst.objective, cfg)))
    return out, time.perf_counter() - start


# 1


def test_criterion_1_table_values():
    start = time.perf_counter()
    vals = [rip_tradeoff_bound(r, 1, theta=1e-12) for r in (1, 2, 3, 30)]
    truncated = [math.floor(v * 100) / 100 for v in vals]
    expected = [0.33, 0.47, 0.55, 0.83]
    refs = [1 / 3, 0.4776, 0.5520, 0.8327]
    close = all(abs(v - r) < 1e-4 for v, r in zip(vals, refs))
    ok = truncated == expected and close and time.perf_counter() - start < 1.0
    record("1", ok, f"bounds {[round(v, 4) for v in vals]} truncate to {truncated}")
    assert ok


# 2


def test_criterion_2_ompr_stalls_on_adversarial_instance(adversarial):
    inst, S0 = adversarial
    f = inst.objective
    s_star, kappa, delta = 2, 4, 1e-3
    start = time.perf_counter()
    rep = ompr(f, SolverConfig(sparsity=len(S0), initial_support=S0, run_exactly_t=True, max_iterations=50))
    elapsed = time.perf_counter() - start
    gap = rep.value - f.value(inst.x_star)
    expected = s_star * kappa ** 2 * (0.25 - 2 * delta) - 0.5 * (kappa * (1 - 2 * delta) - 1)
    _, i2, _ = adversarial_blocks(s_star, kappa)
    i2 = set(range(i2.start, i2.stop))
    hits = [len(set(st.support) & i2) for st in rep.trace[1:]]
    ok = abs(gap - expected) <= 1e-9 and len(hits) > 0 and all(h == 1 for h in hits) and elapsed < 1.0
    record("2", ok, f"gap {gap:.12g} vs {expected:.12g}, |S∩I2| over {len(hits)} steps = {sorted(set(hits))}, {elapsed:.2f}s")
    assert ok


# 3


def test_criterion_3_arht_escapes(adversarial, escape_runs):
    inst, _ = adversarial
    reports, elapsed = escape_runs
    target = inst.objective.value(inst.x_star) + 1e-3
    wins = sum(r.value <= target for r in reports)
    ok = wins >= 15 and elapsed < 30.0
    record("3", ok, f"{wins}/20 seeds reach f(x*)+eps in {elapsed:.1f}s")
    assert ok


# 4


def _kappa_tilde(inst, level):
    G = inst.objective.A.T @ inst.objective.A
    return pairwise_rho2_plus(G) / sampled_rho_minus(G, level)


def test_criterion_4_arht_success_at_prescribed_sparsity(planted_runs):
    runs, elapsed = planted_runs
    wins = sum(rep.value <= inst.objective.value(inst.x_star) + 1e-6 for inst, rep in runs)
    assert wins >= 18 and elapsed < 120.0


def test_criterion_4_theorem_check(planted_runs):
    runs, elapsed = planted_runs
    level = SPARSITY_4 + S_STAR_4
    kt = max(_kappa_tilde(inst, level) for inst, _ in runs)
    wins = sum(rep.value <= inst.objective.value(inst.x_star) + 1e-6 for inst, rep in runs)
    ok = kt <= KAPPA_TILDE_4 and wins >= 18 and elapsed < 120.0
    record("4", ok, f"s={SPARSITY_4}, measured kappa_tilde at level {level} = {kt:.3g} (needs <= 1.3), "
                    f"ARHT {wins}/20 in {elapsed:.1f}s")
    assert ok


# 5


def test_criterion_5_noiseless_ompr_recovery():
    start = time.perf_counter()
    exact, relaxed = 0, 0
    for seed in SEEDS:
        inst = gaussian_planted(100, 256, 8, 0.0, seed)
        f = inst.objective
        a = ompr(f, SolverConfig(sparsity=8))
        exact += a.value <= 1e-10 and set(a.support) == set(inst.support_star)
        b = ompr(f, SolverConfig(sparsity=16))
        relaxed += b.value <= 1e-10 and set(inst.support_star) <= set(b.support)
    elapsed = time.perf_counter() - start
    ok = exact >= 18 and relaxed >= 19 and elapsed < 60.0
    record("5", ok, f"s=s*: {exact}/20, s=2s*: {relaxed}/20, {elapsed:.1f}s")
    assert ok


# 6


def test_criterion_6_oracle_equivalence():
    start = time.perf_counter()
    violations, els_misses = [], 0
    for seed in SEEDS:
        f = random_ls(10, 6, 1000 + seed)
        for k in (1, 2, 3):
            _, best = brute_force_best_sparse(f, k)
            for name, solver in SOLVERS.items():
                v = solver(f, SolverConfig(sparsity=k, epsilon=1e-6, rng_seed=seed)).value
                if v < best - 1e-10:
                    violations.append((seed, k, name))
                if name == "els" and k == 1 and v > best + 1e-10:
                    els_misses += 1
    elapsed = time.perf_counter() - start
    ok = not violations and els_misses == 0 and elapsed < 60.0
    record("6", ok, f"{len(violations)} values below the oracle, ELS missed k=1 optimum {els_misses}/20, {elapsed:.1f}s")
    assert ok


# 7


def _battery_instance(k):
    if k % 2 == 0:
        s = 5 + (k // 2) % 4
        inst = gaussian_planted(400, 10, 2, 0.0 if (k // 2) % 2 == 0 else 0.2, seed=k)
        return inst.objective, inst.x_star, inst.support_star, s
    s = 2 + (k // 2) % 3
    noise = 0.0 if (k // 2) % 2 == 0 else 0.3
    inst = gaussian_planted(8, 10, 2, noise, seed=k)
    scale = np.random.default_rng(k).uniform(0.5, 2.0, size=10)
    f = LeastSquaresObjective(inst.objective.A * scale, inst.objective.b)
    x_star = f.restricted_minimize(inst.support_star) if noise == 0 else inst.x_star / scale
    return f, x_star, inst.support_star, s


def test_criterion_7_progress_battery():
    start = time.perf_counter()
    steps, failures, cases, regimes = 0, 0, {}, set()
    for k in range(50):
        f, x_star, star, s = _battery_instance(k)
        G = f.A.T @ f.A
        rho_minus = gram_extreme_eigenvalues(G, min(f.n, s + len(star)))[1]
        r2 = pairwise_rho2_plus(G)
        S = tuple([i for i in range(f.n) if i not in star][:s])
        x = f.restricted_minimize(S)
        for _ in range(50):
            chk = verify_ompr_progress(f, S, x, x_star, r2, rho_minus)
            steps += 1
            failures += not chk.passed
            cases[chk.case] = cases.get(chk.case, 0) + 1
            if chk.mu is not None:
                regimes.add(chk.mu * chk.kappa_tilde <= 1)
            step = ompr_step(f, S, x)
            if step is None or f.value(step[1]) >= f.value(x):
                break
            S, x = step[0], step[1]
    elapsed = time.perf_counter() - start
    ok = failures == 0 and regimes == {True, False} and elapsed < 120.0
    record("7", ok, f"{steps - failures}/{steps} steps pass, cases {dict(sorted(cases.items()))}, {elapsed:.1f}s")
    assert ok


# 8


def _fd_error(f, x, h=1e-6):
    g = f.gradient(x)
    fd = np.array([(f.value(x + h * e) - f.value(x - h * e)) / (2 * h) for e in np.eye(x.size)])
    return np.linalg.norm(fd - g) / max(np.linalg.norm(g), 1e-12)


def _iteration_invariants(traces):
    """Count Type-1 progress and g-monotonicity violations over a list of core traces."""
    checked, bad = 0, 0
    for trace in traces:
        for st in trace:
            if st.kind not in ("type1", "type2"):
                continue
            checked += 1
            tol = 1e-10 * (1 + abs(st.g_before))
            if st.g_after > st.g_before + tol:
                bad += 1
            elif st.kind == "type1" and st.g_before - st.g_after < (1e-3 / len(st.support)) * (st.g_before - st.opt) - tol:
                bad += 1
    return checked, bad


def _contraction_violations(reports):
    worst, bad = 0.0, 0
    for rep in reports:
        for st in rep.extra["binary_search"]:
            ratio = (st["r"] - st["l"]) / (st["r_before"] - st["l_before"])
            worst = max(worst, ratio)
            bad += ratio > 5 / 6 + 1e-12
    return worst, bad


def test_criterion_8_invariants(escape_runs, planted_runs):
    rng = np.random.default_rng(8)
    A = rng.standard_normal((30, 8))
    ls = LeastSquaresObjective(A, rng.standard_normal(30))
    lg = LogisticObjective(A, (rng.random(30) < 0.5).astype(float))
    fd = max(_fd_error(obj, rng.standard_normal(8)) for obj in (ls, lg) for _ in range(5))

    reports = list(escape_runs[0]) + [rep for _, rep in planted_runs[0]]
    checked, bad_steps = _iteration_invariants(t for rep in reports for t in rep.extra["core_traces"])

    x = np.array([0.0, 1.0, -2.0, 3.0, 0.5, 4.0])
    mask = np.array([True, True, True, True, True, False])
    draws = np.random.default_rng(0)
    counts = np.bincount([sample_unregularize_index(x, mask, draws) for _ in range(10_000)], minlength=6)
    p_expected = np.where(mask, x ** 2, 0.0)
    p_expected /= p_expected.sum()
    support = p_expected > 0
    chi = stats.chisquare(counts[support], 10_000 * p_expected[support])
    stray = int(counts[~support].sum())

    worst, bad_contraction = _contraction_violations(reports)
    ok = fd <= 1e-5 and checked > 0 and bad_steps == 0 and chi.pvalue > 0.01 and stray == 0 and bad_contraction == 0
    record("8", ok, f"FD rel err {fd:.1e}, {checked} logged steps with {bad_steps} violations, "
                    f"sampling p={chi.pvalue:.3f}, worst contraction {worst:.3f}")
    assert ok


# 9


def test_criterion_9_sweep_ordering():
    start = time.perf_counter()
    algs = ["els", "arht", "ompr", "omp"]
    grid = [2, 4, 6, 8, 10]
    losses = {a: [] for a in algs}
    for seed in range(5):
        inst = gaussian_planted(80, 40, 8, 0.5, seed, correlation=0.8)
        res = run_sweep(inst.objective, algs, grid, SolverConfig(sparsity=0, epsilon=1e-4),
                        master_seed=seed, dataset_id=f"planted{seed}")
        for a in algs:
            row = res.losses(a)
            losses[a].append([row[k] for k in grid])
    L = {a: np.array(v) for a, v in losses.items()}
    breaks = []
    for better, worse in zip(algs, algs[1:]):
        diff = L[better] - L[worse]
        slack = 2 * diff.std(axis=0, ddof=1) / math.sqrt(diff.shape[0]) + 1e-9
        for j, k in enumerate(grid):
            if diff[:, j].mean() > slack[j]:
                breaks.append(f"{better}>{worse}@{k}")
    elapsed = time.perf_counter() - start
    means = {a: np.round(L[a].mean(axis=0), 3).tolist() for a in algs}
    ok = not breaks and elapsed < 120.0
    record("9", ok, f"5 sweeps, ordering breaks {breaks or 'none'}, means {means}, {elapsed:.1f}s")
    assert ok
