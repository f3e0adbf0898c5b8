"""Half-interval search over the cost budget around the greedy sub-solver.

``solve_fair`` keeps an interval ``[xi_min, xi_max]``. Each midpoint is handed
to the greedy; if the greedy covers it with at most ``alpha * (N_d - M)``
redundant agents the midpoint becomes the new ``xi_max`` and its assignment
the incumbent, otherwise it becomes the new ``xi_min``. The loop stops once
the interval is narrower than ``1/M``.

With ``alpha = alpha_bound(ev)`` the returned assignment costs no more than
the best assignment of size ``N_d - M`` (exactly so when task costs are
integers), at the price of using up to ``alpha`` times as many agents.
"""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass

from .gra import greedy_redundant_assignment
from .problem import EMPTY, Assignment, CostEvaluator
from .exceptions import InvalidParameterError


class RelaxationWarning(UserWarning):
    pass


def alpha_from_max_cost(max_cost: float) -> float:
    if max_cost <= 1.0:
        warnings.warn(f"max initial cost {max_cost} <= 1: no relaxation, using alpha = 1",
                      RelaxationWarning, stacklevel=3)
        return 1.0
    # 1 + ln(x - 1) < 1 on (1, 2); alpha below one is not a relaxation
    return max(1.0, 1.0 + math.log(max_cost - 1.0))


def alpha_bound(ev: CostEvaluator) -> float:
    """Cardinality relaxation ``1 + ln(max_j J_j(empty) - 1)``."""
    return alpha_from_max_cost(ev.max_cost(EMPTY))


def iteration_budget(M: int, xi_max: float) -> int:
    """Upper bound on the number of bisection steps from ``[0, xi_max]``."""
    if xi_max <= 0:
        return 0
    return max(math.ceil(math.log2(M * xi_max)) + 1, 0)


@dataclass(frozen=True)
class TraceStep:
    xi: float
    size: int
    greedy_feasible: bool
    accepted: bool
    xi_min: float  # interval after the update
    xi_max: float


@dataclass(frozen=True)
class SolveResult:
    assignment: Assignment
    xi: float
    trace: tuple
    alpha_used: float
    n_deploy: int
    budget: float
    initial_costs: tuple
    task_costs: tuple
    wall_time: float

    @property
    def iterations(self) -> int:
        return len(self.trace)

    @property
    def deployment_used(self) -> int:
        return len(self.assignment) + len(self.task_costs)

    @property
    def max_cost(self) -> float:
        return max(self.task_costs)

    @property
    def mean_cost(self) -> float:
        return math.fsum(self.task_costs) / len(self.task_costs)

    def to_dict(self, include_timing: bool = True) -> dict:
        out = {
            "assignment": self.assignment.to_list(),
            "xi": self.xi,
            "iterations": self.iterations,
            "alpha_used": self.alpha_used,
            "n_deploy": self.n_deploy,
            "budget": self.budget,
            "deployment_used": self.deployment_used,
            "max_cost": self.max_cost,
            "mean_cost": self.mean_cost,
            "initial_costs": list(self.initial_costs),
            "task_costs": list(self.task_costs),
            "trace": [
                {"xi": t.xi, "size": t.size, "greedy_feasible": t.greedy_feasible,
                 "accepted": t.accepted, "xi_min": t.xi_min, "xi_max": t.xi_max}
                for t in self.trace
            ],
        }
        if include_timing:
            out["wall_time"] = self.wall_time
        return out


def solve_fair(ev: CostEvaluator, n_deploy: int, alpha: float = 1.0, *,
               lazy: bool = True) -> SolveResult:
    """Fair redundant assignment for deployment size ``n_deploy``.

    ``ev`` carries the cost model and the initial assignment, which must
    cover every task. Returns the last accepted greedy assignment (empty if
    no midpoint was accepted) together with the final ``xi_max``.
    """
    t0 = time.perf_counter()
    M, N = ev.M, ev.N
    if not alpha >= 1:
        raise InvalidParameterError(f"alpha must be >= 1, got {alpha}")
    if not M <= n_deploy <= N:
        raise InvalidParameterError(f"need M <= N_d <= N, got N_d={n_deploy}")
    ev.require_covered()
    budget = alpha * (n_deploy - M)
    free = len(ev.unused_agents())
    if budget > free:
        warnings.warn(
            f"alpha*(N_d - M) = {budget:.3g} exceeds the {free} free agents; "
            "the relaxation may be vacuous", RelaxationWarning, stacklevel=2)

    initial = ev.task_costs(EMPTY)
    xi_min, xi_max = 0.0, float(initial.max())
    best = EMPTY
    trace = []
    while xi_max - xi_min >= 1.0 / M:
        xi = (xi_min + xi_max) / 2
        out = greedy_redundant_assignment(ev, xi, lazy=lazy)
        accepted = out.feasible and len(out.assignment) <= budget
        if accepted:
            xi_max, best = xi, out.assignment
        else:
            xi_min = xi
        trace.append(TraceStep(xi, len(out.assignment), out.feasible, accepted, xi_min, xi_max))

    return SolveResult(
        assignment=best,
        xi=xi_max,
        trace=tuple(trace),
        alpha_used=float(alpha),
        n_deploy=n_deploy,
        budget=budget,
        initial_costs=tuple(float(c) for c in initial),
        task_costs=tuple(float(c) for c in ev.task_costs(best)),
        wall_time=time.perf_counter() - t0,
    )
