"""Greedy redundant assignment under a cost budget.

Given a budget ``xi`` the greedy repeatedly adds the free (agent, task) pair
with the largest marginal decrease of the truncated average

    Jbar(A, xi) = (1/M) sum_j max(J_j(A), xi)

until every task cost is at most ``xi``. Because ``Jbar`` is supermodular,
marginal decreases only shrink as ``A`` grows, which is what makes the lazy
(priority queue) variant return exactly the naive result.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidParameterError
from .problem import COST_TOL, Assignment, CostEvaluator, truncate_average


@dataclass(frozen=True)
class GreedyStep:
    pair: tuple
    decrease: float
    truncated_avg: float


@dataclass(frozen=True)
class BudgetSolveOutcome:
    feasible: bool
    assignment: Assignment
    steps: tuple
    xi: float

    @property
    def status(self) -> str:
        return "feasible" if self.feasible else "infeasible"

    def __len__(self):
        return len(self.assignment)


class _State:
    """Per-task agent sets and current costs during one greedy run."""

    def __init__(self, ev: CostEvaluator, xi: float):
        self.ev = ev
        self.xi = xi
        self.on = [ev.agents_on(j) for j in range(ev.M)]
        self.cost = np.array([ev.cost_of_agents(j, self.on[j]) for j in range(ev.M)])
        self.unused = ev.unused_agents()
        self.pairs = []
        self.steps = []

    def excess(self, j: int) -> float:
        return max(self.cost[j] - self.xi, 0.0)

    def decreases(self, j: int, agents) -> tuple:
        """Marginal decreases of ``Jbar`` for putting each of ``agents`` on ``j``."""
        vals = self.ev.costs_with(j, self.on[j], agents)
        dec = (self.excess(j) - np.maximum(vals - self.xi, 0.0)) / self.ev.M
        return dec, vals

    def done(self) -> bool:
        return bool(self.cost.max() <= self.xi + COST_TOL)

    def take(self, i: int, j: int, dec: float, new_cost: float) -> None:
        self.on[j] = self.on[j] | {i}
        self.cost[j] = new_cost
        self.unused.remove(i)
        self.pairs.append((i, j))
        self.steps.append(GreedyStep((i, j), float(dec), truncate_average(self.cost, self.xi)))

    def outcome(self, feasible: bool) -> BudgetSolveOutcome:
        return BudgetSolveOutcome(feasible, Assignment.of(self.pairs), tuple(self.steps), self.xi)


def _naive(state: _State) -> BudgetSolveOutcome:
    M = state.ev.M
    while True:
        if state.done():
            return state.outcome(True)
        if not state.unused:
            return state.outcome(False)
        best = None  # (dec, agent, task, new_cost)
        for j in range(M):
            if state.excess(j) <= 0.0:
                continue
            dec, vals = state.decreases(j, state.unused)
            k = int(np.argmax(dec))  # first maximum, i.e. lowest agent id
            cand = (float(dec[k]), state.unused[k], j, float(vals[k]))
            if best is None or cand[0] > best[0] or (
                    cand[0] == best[0] and (cand[1], cand[2]) < (best[1], best[2])):
                best = cand
        if best is None or best[0] <= COST_TOL:
            return state.outcome(False)
        dec, i, j, new_cost = best
        state.take(i, j, dec, new_cost)


def _lazy(state: _State) -> BudgetSolveOutcome:
    # Entries are (-decrease, agent, task, task_version). Adding a pair only
    # changes its own task's column, so an entry is exact iff its version
    # matches the task's current version; otherwise it is an upper bound.
    M = state.ev.M
    version = [0] * M
    heap = []
    for j in range(M):
        dec, _ = state.decreases(j, state.unused)
        heap.extend((-float(d), i, j, 0) for d, i in zip(dec, state.unused))
    heapq.heapify(heap)
    free = set(state.unused)
    while True:
        if state.done():
            return state.outcome(True)
        while heap and heap[0][1] not in free:
            heapq.heappop(heap)
        if not heap:
            return state.outcome(False)
        neg, i, j, ver = heapq.heappop(heap)
        if ver != version[j]:
            dec, _ = state.decreases(j, [i])
            heapq.heappush(heap, (-float(dec[0]), i, j, version[j]))
            continue
        if -neg <= COST_TOL:
            return state.outcome(False)
        new_cost = float(state.ev.costs_with(j, state.on[j], [i])[0])
        state.take(i, j, -neg, new_cost)
        free.discard(i)
        version[j] += 1


def greedy_redundant_assignment(ev: CostEvaluator, xi: float, *,
                                lazy: bool = True) -> BudgetSolveOutcome:
    """Smallest-first greedy cover of the budget ``xi``.

    Stops as feasible once ``max_j J_j(A) <= xi``; stops as infeasible when
    no free agent is left or no pair lowers ``Jbar`` by more than
    ``COST_TOL``. Ties go to the lowest agent id, then the lowest task id.
    The assignment built so far is returned in both cases.
    """
    if not xi >= 0:
        raise InvalidParameterError(f"xi must be >= 0, got {xi}")
    ev.require_covered()
    state = _State(ev, float(xi))
    return _lazy(state) if lazy else _naive(state)

