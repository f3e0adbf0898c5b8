"""End-to-end acceptance criteria.

Each check records one ``[PASS]``/``[FAIL]`` line through the ``verdict``
fixture; the lines are printed in the terminal summary. Tolerances and trial
counts are the contract values, not tuned to the implementation.
"""
import itertools
import json
import math
import subprocess
import sys
import time
import warnings

import numpy as np
import pytest

from fairassign import (
    Assignment,
    CostEvaluator,
    ProblemInstance,
    RelaxationWarning,
    alpha_bound,
    bottleneck_initial_assignment,
    brute_force_optimal,
    greedy_redundant_assignment,
    iteration_budget,
    min_sum_initial_assignment,
    point_mass,
    random_bipartite,
    solve_fair,
)
from fairassign.bench import ExperimentConfig, run_experiment, summarize
from fairassign.problem import (
    all_pairs,
    check_supermodular,
    nonsupermodular_example,
    max_cost_fn,
    task_cost_fn,
    truncated_avg_fn,
)

pytestmark = pytest.mark.acceptance
TOL = 1e-9


def _by(rows, **match):
    return [r for r in rows if all(getattr(r, k) == v for k, v in match.items())]


def _median(values):
    return float(np.median(values))


# -- criterion 1 -------------------------------------------------------------

def _guarantee_instance(trial):
    """Small instance meeting the sizing rule alpha * (N_d - M) <= N - M.

    Even trials use the truncated-Gaussian family with 500 frozen scenarios,
    odd trials integer point masses under the exact backend. Draws that break
    the sizing rule are redrawn from the next sub-seed.
    """
    for attempt in itertools.count():
        rng = np.random.default_rng([trial, attempt])
        nd = int(rng.choice([3, 4, 5]))
        N = int(rng.integers(nd, 11))
        if trial % 2 == 0:
            inst = random_bipartite(N, 2, seed=int(rng.integers(2**31)), n_deploy=nd)
            O = bottleneck_initial_assignment(inst.mean_costs())
            ev = CostEvaluator.sampled(inst, O, S=500, seed=int(rng.integers(2**31)))
        else:
            costs = rng.integers(1, 8, size=(N, 2))
            inst = ProblemInstance([[point_mass(c) for c in row] for row in costs], n_deploy=nd)
            O = bottleneck_initial_assignment(inst.mean_costs())
            ev = CostEvaluator.exact(inst, O)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RelaxationWarning)
            alpha = alpha_bound(ev)
        if alpha * (nd - 2) <= N - 2:
            return ev, nd, alpha


def test_criterion_1_cost_guarantee(verdict):
    t0 = time.perf_counter()
    bad_cost, bad_size = [], []
    families = {0: 0, 1: 0}
    nds = set()
    for trial in range(200):
        ev, nd, alpha = _guarantee_instance(trial)
        families[trial % 2] += 1
        nds.add(nd)
        res = solve_fair(ev, nd, alpha)
        opt = brute_force_optimal(ev, nd)
        if not res.max_cost <= opt.max_cost + TOL:
            bad_cost.append((trial, res.max_cost, opt.max_cost))
        if not len(res.assignment) <= alpha * (nd - 2):
            bad_size.append(trial)
    elapsed = time.perf_counter() - t0

    # information only: the same family without the sizing rule
    loose_fail = 0
    for trial in range(200):
        rng = np.random.default_rng([10_000, trial])
        nd = int(rng.choice([3, 4, 5]))
        N = int(rng.integers(max(nd, 5), 11))
        inst = random_bipartite(N, 2, seed=trial, n_deploy=nd)
        ev = CostEvaluator.sampled(inst, bottleneck_initial_assignment(inst.mean_costs()),
                                   S=500, seed=trial)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RelaxationWarning)
            alpha = alpha_bound(ev)
            res = solve_fair(ev, nd, alpha)
        loose_fail += res.max_cost > brute_force_optimal(ev, nd).max_cost + TOL
    verdict("1", "info", True, f"without the sizing rule {loose_fail}/200 Gaussian trials exceed the oracle")

    ok = [
        verdict("1", "cost <= oracle in 200/200 trials", not bad_cost,
                f"{200 - len(bad_cost)}/200; families {families}; N_d seen {sorted(nds)}"),
        verdict("1", "|A_f| <= alpha (N_d - M) in 200/200 trials", not bad_size,
                f"{200 - len(bad_size)}/200"),
        verdict("1", "runtime <= 5 min", elapsed <= 300, f"{elapsed:.1f}s"),
    ]
    assert all(ok), bad_cost[:5]


# -- criterion 2 -------------------------------------------------------------

def test_criterion_2_small_bipartite_optimality(verdict):
    t0 = time.perf_counter()
    cfg = ExperimentConfig(generator="bipartite", params={"N": 18, "M": 2}, trials=200,
                           samples=100, policies=["fair", "fair-alpha", "oracle"],
                           n_deploy=[3, 4, 5, 6, 7], alpha="one", initial="bottleneck", seed=2)
    rows = run_experiment(cfg)
    elapsed = time.perf_counter() - t0

    relaxed = _by(rows, policy="fair-alpha")
    exact = _by(rows, policy="fair")
    alphas = [r.alpha for r in relaxed]
    worst_relaxed = max(r.pct_max_vs_oracle for r in relaxed)
    dep = {nd: _median([r.deployment_used for r in _by(relaxed, n_deploy=nd)]) for nd in cfg.n_deploy}
    frac_over = np.mean([r.deployment_used > r.n_deploy for r in relaxed])
    at_opt = np.mean([r.max_after <= r.oracle_max + TOL for r in exact])
    within = np.mean([r.pct_max_vs_oracle <= 10.0 for r in exact])
    per_nd = {nd: round(float(np.mean([r.max_after <= r.oracle_max + TOL
                                       for r in _by(exact, n_deploy=nd)])), 2)
              for nd in cfg.n_deploy}

    ok = [
        verdict("2", "alpha in [3.8, 4.2] for every trial", 3.8 <= min(alphas) and max(alphas) <= 4.2,
                f"observed [{min(alphas):.3f}, {max(alphas):.3f}]"),
        verdict("2", "alpha=eq6 percent difference vs oracle <= 0", worst_relaxed <= TOL,
                f"max {worst_relaxed:.3g}%"),
        verdict("2", "alpha=eq6 median deployment exceeds N_d", all(dep[nd] > nd for nd in dep),
                f"medians {dep}; {frac_over:.0%} of rows exceed N_d"),
        verdict("2", "alpha=1 at oracle optimum in >= 70% of trials", at_opt >= 0.70,
                f"{at_opt:.1%}; by N_d {per_nd}"),
        verdict("2", "alpha=1 within 10% of optimum in >= 95% of trials", within >= 0.95,
                f"{within:.1%}"),
        verdict("2", "runtime <= 15 min", elapsed <= 900, f"{elapsed:.1f}s"),
    ]
    assert all(ok)


# -- criterion 3 -------------------------------------------------------------

def test_criterion_3_policy_ordering(verdict):
    t0 = time.perf_counter()
    cfg = ExperimentConfig(generator="bipartite", params={"N": 40, "M": 10}, trials=200,
                           samples=100, policies=["fair", "repeat-threshold", "random"],
                           n_deploy=[15, 20, 25, 30], alpha="one", initial="bottleneck", seed=3)
    rows = run_experiment(cfg)
    elapsed = time.perf_counter() - t0

    ok = []
    for nd in cfg.n_deploy:
        med = {p: _median([-r.pct_max_vs_initial for r in _by(rows, policy=p, n_deploy=nd)])
               for p in cfg.policies}
        order = med["fair"] > med["repeat-threshold"] > med["random"] >= 0
        ok.append(verdict("3", f"N_d={nd}: fair > repeat-threshold > random >= 0 (median % max-cost gain)",
                          order, ", ".join(f"{p} {v:.2f}" for p, v in med.items())))
    ok.append(verdict("3", "runtime <= 20 min", elapsed <= 1200, f"{elapsed:.1f}s"))
    assert all(ok)


# -- criterion 4 -------------------------------------------------------------

def test_criterion_4_transport_fairness(verdict):
    t0 = time.perf_counter()
    cfg = ExperimentConfig(generator="transport", params={"N": 32, "M": 16}, trials=100,
                           samples=100, policies=["fair", "utilitarian"], n_deploy=[20],
                           alpha="one", initial="min-sum", seed=4)
    rows = run_experiment(cfg)
    elapsed = time.perf_counter() - t0
    s = {e["policy"]: e for e in summarize(rows)}
    fair, util = s["fair"], s["utilitarian"]
    util_miss = 1.0 - util["frac_worst_improved"]
    gain = lambda e, k: -e[f"pct_{k}_vs_initial_median"]

    ok = [
        verdict("4a", "fair improves the worst-off task in 100% of trials",
                fair["frac_worst_improved"] == 1.0, f"{fair['frac_worst_improved']:.0%}"),
        verdict("4a", "utilitarian misses the worst-off task in >= 40% of trials", util_miss >= 0.40,
                f"{util_miss:.0%}"),
        verdict("4b", "median mean-cost gain: utilitarian >= fair", gain(util, "mean") >= gain(fair, "mean"),
                f"utilitarian {gain(util, 'mean'):.2f}%, fair {gain(fair, 'mean'):.2f}%"),
        verdict("4b", "median max-cost gain: fair > utilitarian", gain(fair, "max") > gain(util, "max"),
                f"fair {gain(fair, 'max'):.2f}%, utilitarian {gain(util, 'max'):.2f}%"),
        verdict("4", "runtime <= 20 min", elapsed <= 1200, f"{elapsed:.1f}s"),
    ]
    assert all(ok)


# -- criterion 5 -------------------------------------------------------------

def test_criterion_5_supermodularity(verdict):
    t0 = time.perf_counter()
    per_instance = 200  # 50 instances x 200 chains = 10^4 trials per function family
    violations = {"J_j": 0, "Jbar": 0}
    checked = {"J_j": 0, "Jbar": 0}
    for k in range(50):
        rng = np.random.default_rng([5, k])
        N, M = int(rng.integers(5, 11)), int(rng.integers(2, 4))
        inst = random_bipartite(N, M, seed=k)
        O = bottleneck_initial_assignment(inst.mean_costs())
        ev = CostEvaluator.sampled(inst, O, S=100, seed=k)
        ground = all_pairs(N, M, O)
        for j in range(M):
            rep = check_supermodular(task_cost_fn(ev, j), ground, per_instance, k, O)
            violations["J_j"] += len(rep.violations)
            checked["J_j"] += rep.checked
        xi = float(rng.uniform(5, ev.max_cost()))
        rep = check_supermodular(truncated_avg_fn(ev, xi), ground, per_instance, k, O)
        violations["Jbar"] += len(rep.violations)
        checked["Jbar"] += rep.checked
    inst, O, *_ = nonsupermodular_example()
    ev = CostEvaluator.exact(inst, O)
    nonsub = check_supermodular(max_cost_fn(ev), all_pairs(inst.N, inst.M, O), 1000, 0, O)
    elapsed = time.perf_counter() - t0

    ok = [
        verdict("5", "zero violations for every J_j", violations["J_j"] == 0,
                f"{checked['J_j']} chains checked"),
        verdict("5", "zero violations for the truncated average", violations["Jbar"] == 0,
                f"{checked['Jbar']} chains checked"),
        verdict("5", ">= 1 violation for max_j J_j on the non-supermodular example", len(nonsub.violations) >= 1,
                f"{len(nonsub.violations)} of {nonsub.checked}"),
        verdict("5", "runtime <= 2 min", elapsed <= 120, f"{elapsed:.1f}s"),
    ]
    assert all(ok)


# -- criterion 6 -------------------------------------------------------------

def test_criterion_6_bisection_contract(verdict):
    t0 = time.perf_counter()
    over_budget, bad_min, bad_max, steps = 0, 0, 0, 0
    for k in range(500):
        rng = np.random.default_rng([6, k])
        M = int(rng.integers(1, 5))
        N = int(rng.integers(M + 1, 13))
        nd = int(rng.integers(M, N + 1))
        inst = random_bipartite(N, M, seed=k)
        O = bottleneck_initial_assignment(inst.mean_costs())
        ev = CostEvaluator.sampled(inst, O, S=50, seed=k)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RelaxationWarning)
            alpha = 1.0 if k % 2 else alpha_bound(ev)
            res = solve_fair(ev, nd, alpha)
        over_budget += res.iterations > iteration_budget(M, ev.max_cost())
        for t in res.trace:
            steps += 1
            again = greedy_redundant_assignment(ev, t.xi)
            accepted = again.feasible and len(again.assignment) <= res.budget
            if t.accepted:
                bad_max += not (accepted and ev.max_cost(again.assignment) <= t.xi + TOL)
            else:
                bad_min += accepted
    elapsed = time.perf_counter() - t0

    ok = [
        verdict("6", "iterations <= ceil(log2(M max J(0))) + 1", over_budget == 0,
                f"{over_budget} of 500 over budget"),
        verdict("6", "xi_min endpoints re-verify infeasible", bad_min == 0, f"{bad_min} of {steps} steps"),
        verdict("6", "accepted xi_max endpoints re-verify feasible", bad_max == 0, f"{bad_max} of {steps} steps"),
        verdict("6", "runtime <= 5 min", elapsed <= 300, f"{elapsed:.1f}s"),
    ]
    assert all(ok)


# -- criterion 7 -------------------------------------------------------------

def test_criterion_7_initial_assignment_optimality(verdict):
    t0 = time.perf_counter()
    bad_bottleneck, bad_sum = 0, 0
    for k in range(500):
        rng = np.random.default_rng([7, k])
        M = int(rng.integers(1, 5))
        N = int(rng.integers(M, 9))
        if k % 2:
            cost = rng.integers(0, 6, size=(N, M)).astype(float)
        else:
            cost = rng.uniform(5, 30, size=(N, M))
        perms = list(itertools.permutations(range(N), M))
        best_max = min(max(cost[p[j], j] for j in range(M)) for p in perms)
        best_sum = min(math.fsum(cost[p[j], j] for j in range(M)) for p in perms)
        B = bottleneck_initial_assignment(cost)
        H = min_sum_initial_assignment(cost)
        valid = lambda A: len(A) == M and A.tasks == set(range(M))
        bad_bottleneck += not (valid(B) and max(cost[i, j] for i, j in B) == best_max)
        bad_sum += not (valid(H) and math.fsum(cost[i, j] for i, j in H) == best_sum)
    elapsed = time.perf_counter() - t0

    ok = [
        verdict("7", "bottleneck matches enumeration on 500 instances", bad_bottleneck == 0,
                f"{bad_bottleneck} mismatches"),
        verdict("7", "min-sum matches enumeration on 500 instances", bad_sum == 0, f"{bad_sum} mismatches"),
        verdict("7", "runtime <= 2 min", elapsed <= 120, f"{elapsed:.1f}s"),
    ]
    assert all(ok)


# -- criterion 8 -------------------------------------------------------------

@pytest.mark.parametrize("config", [
    {"generator": "bipartite", "params": {"N": 10, "M": 2}, "trials": 4, "samples": 50,
     "policies": ["fair", "fair-alpha", "utilitarian", "random", "repeat-threshold", "oracle"],
     "n_deploy": [3, 4], "alpha": "one", "initial": "bottleneck", "seed": 8},
    {"generator": "transport", "params": {"nodes": 30, "N": 12, "M": 6}, "trials": 3, "samples": 40,
     "policies": ["fair", "utilitarian", "random"], "n_deploy": [8], "initial": "min-sum", "seed": 8},
], ids=["bipartite", "transport"])
def test_criterion_8_reproducible_benchmark(tmp_path, verdict, config):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config))
    outputs = []
    for run in range(2):
        out = tmp_path / f"run{run}.csv"
        proc = subprocess.run([sys.executable, "-m", "fairassign", "benchmark", str(path), "--out", str(out)],
                              capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        outputs.append(out.read_bytes())
    same = outputs[0] == outputs[1]
    assert verdict("8", f"benchmark CSV byte-identical across two runs ({config['generator']})", same,
                   f"{len(outputs[0])} bytes")
