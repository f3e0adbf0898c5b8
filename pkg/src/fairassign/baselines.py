"""Initial assignments, comparison policies and the exhaustive oracle."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .exceptions import InfeasibleInstanceError, InvalidParameterError, TooLargeError
from .problem import COST_TOL, EMPTY, Assignment, CostEvaluator

ORACLE_CAP = 10**7


def _as_cost_matrix(mean_costs) -> np.ndarray:
    c = np.asarray(mean_costs, dtype=float)
    if c.ndim != 2 or c.size == 0:
        raise InvalidParameterError(f"expected a non-empty N x M matrix, got shape {c.shape}")
    return c


def _matching_size(mask: np.ndarray) -> tuple:
    # rows of ``mask`` are matched into columns; returns (size, column per row)
    match = maximum_bipartite_matching(csr_matrix(mask.astype(np.int8)), perm_type="column")
    return int((match >= 0).sum()), match


def bottleneck_pairs(cost) -> list:
    """Min-max matching of size ``min(n, m)`` by the threshold method.

    Binary search over the sorted distinct entries for the smallest threshold
    whose admissible edges (``cost <= t``) still admit a matching saturating
    the smaller side; returns ``(row, column)`` pairs.
    """
    cost = _as_cost_matrix(cost)
    n, m = cost.shape
    transpose = n > m
    c = cost.T if transpose else cost  # rows are the smaller side
    need = c.shape[0]
    levels = np.unique(c)
    lo, hi = 0, len(levels) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _matching_size(c <= levels[mid])[0] == need:
            hi = mid
        else:
            lo = mid + 1
    _, match = _matching_size(c <= levels[lo])
    pairs = [(int(r), int(match[r])) for r in range(need)]
    return [(b, a) for a, b in pairs] if transpose else pairs


def bottleneck_initial_assignment(mean_costs) -> Assignment:
    """One agent per task minimising the largest selected mean cost."""
    cost = _as_cost_matrix(mean_costs)
    n, m = cost.shape
    if n < m:
        raise InfeasibleInstanceError(f"{n} agents cannot cover {m} tasks")
    return Assignment.of(bottleneck_pairs(cost))


def min_sum_initial_assignment(mean_costs) -> Assignment:
    """One agent per task minimising the summed mean cost (Hungarian method)."""
    cost = _as_cost_matrix(mean_costs)
    n, m = cost.shape
    if n < m:
        raise InfeasibleInstanceError(f"{n} agents cannot cover {m} tasks")
    rows, cols = linear_sum_assignment(cost)
    return Assignment.of(zip(rows.tolist(), cols.tolist()))


INITIAL_POLICIES = {
    "bottleneck": bottleneck_initial_assignment,
    "min-sum": min_sum_initial_assignment,
}


def initial_assignment(policy: str, mean_costs) -> Assignment:
    try:
        return INITIAL_POLICIES[policy](mean_costs)
    except KeyError:
        raise InvalidParameterError(f"unknown initial policy {policy!r}") from None


def _redundant_budget(n_agents: int, n_tasks: int, n_deploy: int) -> int:
    if not n_tasks <= n_deploy <= n_agents:
        raise InvalidParameterError(f"need M <= N_d <= N, got N_d={n_deploy}")
    return n_deploy - n_tasks


def _free_agents(n_agents: int, initial: Assignment) -> list:
    used = initial.agents
    return [i for i in range(n_agents) if i not in used]


def random_redundant(instance, initial: Assignment, n_deploy: int, seed: int = 0) -> Assignment:
    """``N_d - M`` distinct free agents, each on a uniformly random task."""
    k = _redundant_budget(instance.N, instance.M, n_deploy)
    free = _free_agents(instance.N, initial)
    k = min(k, len(free))
    rng = np.random.default_rng(seed)
    agents = rng.choice(free, size=k, replace=False) if k else []
    tasks = rng.integers(0, instance.M, size=k)
    return Assignment.of(zip(np.asarray(agents).tolist(), tasks.tolist()))


def repeated_threshold(instance, initial: Assignment, n_deploy: int, mean_costs=None) -> Assignment:
    """Rounds of bottleneck assignment over the still-free agents.

    A round that would overshoot the budget is truncated, keeping its
    pairs in increasing mean cost (ties by agent, then task).
    """
    k = _redundant_budget(instance.N, instance.M, n_deploy)
    cost = _as_cost_matrix(instance.mean_costs() if mean_costs is None else mean_costs)
    free = _free_agents(instance.N, initial)
    chosen = []
    while len(chosen) < k and free:
        sub = bottleneck_pairs(cost[free])
        round_pairs = sorted(((cost[free[r], t], free[r], t) for r, t in sub))
        take = round_pairs[: k - len(chosen)]
        chosen.extend((i, t) for _, i, t in take)
        used = {i for _, i, _ in take}
        free = [i for i in free if i not in used]
    return Assignment.of(chosen)


def utilitarian_redundant(ev: CostEvaluator, n_deploy: int) -> Assignment:
    """Greedy on the summed task cost: each step adds the pair with the
    largest total decrease, until the budget is spent or nothing helps."""
    k = _redundant_budget(ev.N, ev.M, n_deploy)
    ev.require_covered()
    on = [ev.agents_on(j) for j in range(ev.M)]
    cost = [ev.cost_of_agents(j, on[j]) for j in range(ev.M)]
    free = ev.unused_agents()
    chosen = []
    while len(chosen) < k and free:
        best = None
        for j in range(ev.M):
            vals = ev.costs_with(j, on[j], free)
            dec = cost[j] - vals
            idx = int(np.argmax(dec))
            cand = (float(dec[idx]), free[idx], j, float(vals[idx]))
            if best is None or cand[0] > best[0] or (
                    cand[0] == best[0] and (cand[1], cand[2]) < (best[1], best[2])):
                best = cand
        if best[0] <= COST_TOL:
            break
        _, i, j, new_cost = best
        chosen.append((i, j))
        on[j] = on[j] | {i}
        cost[j] = new_cost
        free.remove(i)
    return Assignment.of(chosen)


@dataclass(frozen=True)
class OracleResult:
    assignment: Assignment
    max_cost: float
    sets_examined: int

    def to_dict(self) -> dict:
        return {"assignment": self.assignment.to_list(), "max_cost": self.max_cost,
                "sets_examined": self.sets_examined}


def count_redundant_sets(n_free: int, n_tasks: int, k: int) -> int:
    """Number of uniqueness-respecting redundant assignments of size <= k."""
    return sum(math.comb(n_free, t) * n_tasks**t for t in range(min(k, n_free) + 1))


def _task_table(ev: CostEvaluator, task: int, free: list, k: int):
    """All subsets of ``free`` up to size ``k`` with their cost on ``task``."""
    base = ev.agents_on(task)
    masks, sizes, costs = [], [], []
    for t in range(min(k, len(free)) + 1):
        combos = list(itertools.combinations(range(len(free)), t))
        if t == 0:
            vals = np.array([ev.cost_of_agents(task, base)])
        elif ev.backend == "sample" and base:
            fa = np.asarray(free)[np.array(combos)]
            bvec = ev._cols[task, sorted(base)].min(axis=0)
            vals = np.minimum(bvec, ev._cols[task][fa].min(axis=1)).mean(axis=1)
            if ev.integer_costs:
                vals = np.round(vals)
        else:
            vals = np.array([ev.cost_of_agents(task, base | {free[a] for a in c}) for c in combos])
        masks.extend(sum(1 << a for a in c) for c in combos)
        sizes.extend([t] * len(combos))
        costs.append(vals)
    return np.array(masks, dtype=np.int64), np.array(sizes), np.concatenate(costs)


def brute_force_optimal(ev: CostEvaluator, n_deploy: int, cap: int = ORACLE_CAP) -> OracleResult:
    """Exhaustive minimum of ``max_j J_j`` over redundant sets of size <= N_d - M.

    Every task's cost depends only on the agents placed on it, so each task
    gets a table of all agent subsets; the search then walks every disjoint
    combination of per-task subsets (the last task vectorised). Ties go to
    the smaller set, then the lexicographically smaller sorted pair list.
    """
    k = _redundant_budget(ev.N, ev.M, n_deploy)
    ev.require_covered()
    free = ev.unused_agents()
    if len(free) > 62:
        raise TooLargeError("bitmask enumeration supports at most 62 free agents")
    total = count_redundant_sets(len(free), ev.M, k)
    if total > cap:
        raise TooLargeError(f"{total} candidate sets exceed the cap of {cap}")

    tables = [_task_table(ev, j, free, k) for j in range(ev.M)]
    best = [math.inf, math.inf, None]  # cost, size, pair list
    examined = 0

    def pairs_of(choice):
        return sorted((free[a], j) for j, mask in enumerate(choice)
                      for a in range(len(free)) if mask >> a & 1)

    def offer(cost, size, choice):
        if cost > best[0] or (cost == best[0] and size > best[1]):
            return
        pairs = pairs_of(choice)
        if (cost, size) < (best[0], best[1]) or pairs < best[2]:
            best[:] = [cost, size, pairs]

    def walk(j, used, size, cur_max, choice):
        nonlocal examined
        masks, sizes, costs = tables[j]
        ok = ((masks & used) == 0) & (sizes <= k - size)
        if j == ev.M - 1:
            idx = np.flatnonzero(ok)
            examined += len(idx)
            vals = np.maximum(costs[idx], cur_max)
            lo = vals.min()
            if lo > best[0]:
                return
            tied = idx[vals == lo]
            tsize = sizes[tied]
            for t in tied[tsize == tsize.min()]:
                offer(float(lo), size + int(sizes[t]), choice + [int(masks[t])])
            return
        for t in np.flatnonzero(ok):
            walk(j + 1, used | int(masks[t]), size + int(sizes[t]),
                 max(cur_max, costs[t]), choice + [int(masks[t])])

    walk(0, 0, 0, -math.inf, [])
    assignment = Assignment.of(best[2])
    return OracleResult(assignment, ev.max_cost(assignment), examined)
