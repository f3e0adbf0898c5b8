"""Bisection solver against exhaustive search on small random instances.

Eighteen agents, two tasks, truncated-Gaussian travel times. For each
deployment size we run the solver twice: with alpha = 1 (respects N_d) and
with the logarithmic relaxation (may use more agents, never costs more than
the optimum of size N_d).
"""
import warnings

import numpy as np

from fairassign import (
    CostEvaluator,
    RelaxationWarning,
    alpha_bound,
    bottleneck_initial_assignment,
    brute_force_optimal,
    random_bipartite,
    solve_fair,
)

warnings.simplefilter("ignore", RelaxationWarning)
TRIALS = 15

print(" N_d | alpha=1 gap to optimum (median, max) | relaxed gap (max) | relaxed size (median)")
for nd in range(3, 8):
    gap1, gap_r, size_r = [], [], []
    for seed in range(TRIALS):
        inst = random_bipartite(18, 2, seed=seed)
        O = bottleneck_initial_assignment(inst.mean_costs())
        ev = CostEvaluator.sampled(inst, O, S=100, seed=seed)
        best = brute_force_optimal(ev, nd).max_cost
        one = solve_fair(ev, nd, alpha=1.0)
        relaxed = solve_fair(ev, nd, alpha=alpha_bound(ev))
        gap1.append(100 * (one.max_cost - best) / best)
        gap_r.append(100 * (relaxed.max_cost - best) / best)
        size_r.append(relaxed.deployment_used)
    print(f"  {nd}  |        {np.median(gap1):5.2f}%, {max(gap1):5.2f}%"
          f"            |     {max(gap_r):7.2f}%     |   {np.median(size_r):4.1f}")

# Positive gaps are worse than optimal. The relaxed column stays at or below
# zero because it is allowed more agents than N_d.
