"""Problem model: instances, assignments and the expected-min task costs.

Task ``j``'s cost given a redundant assignment ``A`` (and the fixed initial
assignment ``O`` held by the evaluator) is the expected first arrival among
the agents on ``j``::

    J_j(A) = E[ min_i C_ij  over (i, j) in A | O ]

Agents and tasks are 0-based integer ids throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .distributions import (
    DEFAULT_SAMPLES,
    EXACT_SUPPORT_CAP,
    Discrete,
    SampleMatrix,
    distribution_from_dict,
    exact_min_expectation,
    expected_values,
    point_mass,
    sample_cost_matrix,
)
from .exceptions import (
    IncompleteInstanceError,
    InvalidAugmentationError,
    InvalidParameterError,
    UncoveredTaskError,
)

COST_TOL = 1e-9

Pair = tuple  # (agent, task)


@dataclass(frozen=True)
class ProblemInstance:
    """Fully connected agent-task graph with one cost law per edge.

    ``edges[i][j]`` is the distribution of agent ``i``'s cost on task ``j``;
    ``n_deploy`` is the total deployment size (initial plus redundant).
    """

    edges: tuple
    n_deploy: int
    agent_labels: tuple | None = None
    task_labels: tuple | None = None

    def __post_init__(self):
        edges = tuple(tuple(row) for row in self.edges)
        object.__setattr__(self, "edges", edges)
        if not edges or not edges[0]:
            raise InvalidParameterError("instance needs at least one agent and one task")
        n, m = len(edges), len(edges[0])
        if any(len(row) != m for row in edges):
            raise IncompleteInstanceError("every agent needs a distribution for every task")
        for i, row in enumerate(edges):
            for j, d in enumerate(row):
                if d is None:
                    raise IncompleteInstanceError(f"missing distribution for edge ({i}, {j})")
        if n < m:
            raise InvalidParameterError(f"need N >= M, got N={n}, M={m}")
        if not m <= self.n_deploy <= n:
            raise InvalidParameterError(f"need M <= N_d <= N, got N_d={self.n_deploy}")
        if self.agent_labels is not None and len(self.agent_labels) != n:
            raise InvalidParameterError("agent_labels length differs from N")
        if self.task_labels is not None and len(self.task_labels) != m:
            raise InvalidParameterError("task_labels length differs from M")

    @property
    def N(self) -> int:
        return len(self.edges)

    @property
    def M(self) -> int:
        return len(self.edges[0])

    def with_deployment(self, n_deploy: int) -> "ProblemInstance":
        return ProblemInstance(self.edges, n_deploy, self.agent_labels, self.task_labels)

    def mean_costs(self) -> np.ndarray:
        flat = expected_values(d for row in self.edges for d in row)
        return flat.reshape(self.N, self.M)

    def to_dict(self) -> dict:
        out = {
            "N": self.N,
            "M": self.M,
            "n_deploy": self.n_deploy,
            "edges": [[d.to_dict() for d in row] for row in self.edges],
        }
        if self.agent_labels is not None:
            out["agent_labels"] = list(self.agent_labels)
        if self.task_labels is not None:
            out["task_labels"] = list(self.task_labels)
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "ProblemInstance":
        try:
            edges = [[distribution_from_dict(e) for e in row] for row in d["edges"]]
            inst = cls(edges, int(d["n_deploy"]),
                       tuple(d["agent_labels"]) if "agent_labels" in d else None,
                       tuple(d["task_labels"]) if "task_labels" in d else None)
        except (KeyError, TypeError) as exc:
            raise InvalidParameterError(f"malformed instance: {exc}") from exc
        if ("N" in d and d["N"] != inst.N) or ("M" in d and d["M"] != inst.M):
            raise InvalidParameterError("N/M fields disagree with the edge table")
        return inst


@dataclass(frozen=True)
class Assignment:
    """Set of ``(agent, task)`` pairs with each agent used at most once."""

    pairs: frozenset = frozenset()

    def __post_init__(self):
        pairs = frozenset((int(i), int(j)) for i, j in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        agents = [i for i, _ in pairs]
        if len(agents) != len(set(agents)):
            raise InvalidAugmentationError("an agent appears in two pairs")
        if any(i < 0 or j < 0 for i, j in pairs):
            raise InvalidParameterError("agent and task ids must be non-negative")

    @classmethod
    def of(cls, pairs: Iterable[Sequence[int]] = ()) -> "Assignment":
        return cls(frozenset(tuple(p) for p in pairs))

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(sorted(self.pairs))

    def __contains__(self, pair):
        return tuple(pair) in self.pairs

    @property
    def agents(self) -> frozenset:
        return frozenset(i for i, _ in self.pairs)

    def agents_on(self, task: int) -> frozenset:
        return frozenset(i for i, j in self.pairs if j == task)

    @property
    def tasks(self) -> frozenset:
        return frozenset(j for _, j in self.pairs)

    def add(self, pair: Pair) -> "Assignment":
        i, j = pair
        if i in self.agents:
            raise InvalidAugmentationError(f"agent {i} is already assigned")
        return Assignment(self.pairs | {(int(i), int(j))})

    def union(self, other: "Assignment") -> "Assignment":
        return Assignment(self.pairs | other.pairs)

    def check_range(self, n_agents: int, n_tasks: int) -> None:
        for i, j in self.pairs:
            if not (0 <= i < n_agents and 0 <= j < n_tasks):
                raise InvalidParameterError(f"pair ({i}, {j}) out of range")

    def to_list(self) -> list:
        return [[i, j] for i, j in self]

    @classmethod
    def from_list(cls, data) -> "Assignment":
        try:
            return cls.of((int(i), int(j)) for i, j in data)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, InvalidAugmentationError):
                raise
            raise InvalidParameterError(f"malformed assignment: {exc}") from exc


EMPTY = Assignment()


class CostEvaluator:
    """Evaluates ``J_j`` for a fixed initial assignment.

    Two backends exist. The sample backend averages the per-scenario minimum
    over a frozen ``SampleMatrix``; the exact backend enumerates the product
    support of discrete edge laws. Values are cached per ``(task, agent set)``
    so evaluations are pure for the life of the evaluator.

    Not thread-safe: the cache is written without locking, so share an
    evaluator between threads only for reads after warm-up, or give each
    thread its own.
    """

    def __init__(self, n_agents: int, n_tasks: int, initial: Assignment = EMPTY, *,
                 matrix: SampleMatrix | None = None, distributions=None,
                 integer_costs: bool = False, exact_cap: int = EXACT_SUPPORT_CAP):
        if (matrix is None) == (distributions is None):
            raise InvalidParameterError("give exactly one of matrix or distributions")
        initial = initial if isinstance(initial, Assignment) else Assignment.of(initial)
        initial.check_range(n_agents, n_tasks)
        self.N = n_agents
        self.M = n_tasks
        self.initial = initial
        self.integer_costs = integer_costs
        self.exact_cap = exact_cap
        self._cache: dict = {}
        self._initial_on = [initial.agents_on(j) for j in range(n_tasks)]
        if matrix is not None:
            if matrix.shape[1:] != (n_agents, n_tasks):
                raise InvalidParameterError(
                    f"matrix shape {matrix.shape} does not match N={n_agents}, M={n_tasks}")
            self.backend = "sample"
            self.matrix = matrix
            # task-major copy: each (task, agent) scenario vector is contiguous
            self._cols = np.ascontiguousarray(matrix.samples.transpose(2, 1, 0))
            self._dists = None
        else:
            for row in distributions:
                for d in row:
                    if not isinstance(d, Discrete):
                        raise InvalidParameterError("exact backend needs discrete distributions")
            self.backend = "exact"
            self.matrix = None
            self._cols = None
            self._dists = distributions

    @classmethod
    def sampled(cls, instance: ProblemInstance, initial: Assignment = EMPTY,
                S: int = DEFAULT_SAMPLES, seed: int = 0, **kw) -> "CostEvaluator":
        return cls(instance.N, instance.M, initial,
                   matrix=sample_cost_matrix(instance, S, seed), **kw)

    @classmethod
    def from_matrix(cls, matrix: SampleMatrix, initial: Assignment = EMPTY, **kw):
        _, n, m = matrix.shape
        return cls(n, m, initial, matrix=matrix, **kw)

    @classmethod
    def exact(cls, instance: ProblemInstance, initial: Assignment = EMPTY, **kw):
        return cls(instance.N, instance.M, initial, distributions=instance.edges, **kw)

    def agents_on(self, task: int, A: Assignment = EMPTY) -> frozenset:
        return self._initial_on[task] | A.agents_on(task)

    def uncovered_tasks(self) -> list:
        return [j for j in range(self.M) if not self._initial_on[j]]

    def require_covered(self) -> None:
        missing = self.uncovered_tasks()
        if missing:
            raise UncoveredTaskError(f"initial assignment leaves tasks {missing} uncovered")

    def _finish(self, value: float) -> float:
        return float(np.round(value)) if self.integer_costs else float(value)

    def cost_of_agents(self, task: int, agents: frozenset) -> float:
        key = (task, agents)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        if not agents:
            raise UncoveredTaskError(f"task {task} has no assigned agent")
        idx = sorted(agents)
        if self.backend == "sample":
            value = self._cols[task, idx].min(axis=0).mean()
        else:
            value = exact_min_expectation([self._dists[i][task] for i in idx], self.exact_cap)
        value = self._finish(value)
        self._cache[key] = value
        return value

    def task_cost(self, task: int, A: Assignment = EMPTY) -> float:
        return self.cost_of_agents(task, self.agents_on(task, A))

    def task_costs(self, A: Assignment = EMPTY) -> np.ndarray:
        return np.array([self.task_cost(j, A) for j in range(self.M)])

    def costs_with(self, task: int, agents: frozenset, candidates: Sequence[int]) -> np.ndarray:
        """``J_task(agents + {i})`` for every candidate agent ``i``.

        The sample backend evaluates all candidates in one vectorised pass;
        results are bit-identical to ``cost_of_agents`` on the enlarged set.
        """
        candidates = list(candidates)
        if not candidates:
            return np.empty(0)
        if self.backend == "sample" and agents:
            base = self._cols[task, sorted(agents)].min(axis=0)
            vals = np.minimum(base[None, :], self._cols[task, candidates]).mean(axis=1)
            return np.round(vals) if self.integer_costs else vals
        return np.array([self.cost_of_agents(task, agents | {i}) for i in candidates])

    def max_cost(self, A: Assignment = EMPTY) -> float:
        return float(self.task_costs(A).max())

    def mean_cost(self, A: Assignment = EMPTY) -> float:
        return math.fsum(self.task_costs(A)) / self.M

    def unused_agents(self, A: Assignment = EMPTY) -> list:
        used = self.initial.agents | A.agents
        return [i for i in range(self.N) if i not in used]


def task_cost(ev: CostEvaluator, j: int, A: Assignment = EMPTY) -> float:
    return ev.task_cost(j, A)


def truncate_average(costs, xi: float) -> float:
    """Mean of ``max(c, xi)``, written as ``xi`` plus the mean excess.

    The excess form returns exactly ``xi`` when every cost is at most ``xi``.
    """
    m = len(costs)
    return xi + math.fsum(max(float(c) - xi, 0.0) for c in costs) / m


def truncated_avg_cost(ev: CostEvaluator, A: Assignment, xi: float) -> float:
    if xi < 0:
        raise InvalidParameterError(f"xi must be >= 0, got {xi}")
    return truncate_average(ev.task_costs(A), xi)


SetFunction = Callable[[Assignment], float]


def task_cost_fn(ev: CostEvaluator, j: int) -> SetFunction:
    return lambda A: ev.task_cost(j, A)


def truncated_avg_fn(ev: CostEvaluator, xi: float) -> SetFunction:
    return lambda A: truncated_avg_cost(ev, A, xi)


def max_cost_fn(ev: CostEvaluator) -> SetFunction:
    return ev.max_cost


def sum_cost_fn(ev: CostEvaluator) -> SetFunction:
    return lambda A: math.fsum(ev.task_costs(A))


def marginal_decrease(f: SetFunction, x: Pair, A: Assignment,
                      initial: Assignment = EMPTY) -> float:
    """``f(A) - f(A + {x})`` for a pair ``x`` whose agent is still free."""
    x = (int(x[0]), int(x[1]))
    if x in A.pairs:
        raise InvalidAugmentationError(f"{x} is already in the assignment")
    if x[0] in A.agents or x[0] in initial.agents:
        raise InvalidAugmentationError(f"agent {x[0]} is already assigned")
    return f(A) - f(A.add(x))


@dataclass
class SupermodularityReport:
    trials: int
    checked: int
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def check_supermodular(f: SetFunction, ground: Iterable[Pair], trials: int = 1000,
                       seed: int = 0, initial: Assignment = EMPTY,
                       tol: float = COST_TOL) -> SupermodularityReport:
    """Search random chains ``A <= B`` and ``x`` outside ``B`` for a
    diminishing-returns violation ``D(x|A) < D(x|B) - tol``.

    Chains respect per-agent uniqueness (also against ``initial``). ``B``
    always leaves one ground agent free, so every trial is checked unless the
    ground set is empty.
    """
    if trials < 1:
        raise InvalidParameterError("trials must be >= 1")
    blocked = initial.agents
    ground = sorted({(int(i), int(j)) for i, j in ground if i not in blocked})
    report = SupermodularityReport(trials=trials, checked=0)
    if not ground:
        return report
    rng = np.random.default_rng(seed)
    n_agents = len({i for i, _ in ground})
    for _ in range(trials):
        order = rng.permutation(len(ground))
        # leave at least one agent free so that some x outside B exists
        target = rng.integers(0, n_agents)
        B, used = [], set()
        for k in order:
            if len(B) >= target:
                break
            i, j = ground[k]
            if i not in used:
                B.append((i, j))
                used.add(i)
        free = [p for p in ground if p[0] not in used]
        if not free:
            continue
        x = free[rng.integers(len(free))]
        keep = rng.random(len(B)) < rng.random()
        A_set = Assignment.of(p for p, k in zip(B, keep) if k)
        B_set = Assignment.of(B)
        dA = marginal_decrease(f, x, A_set, initial)
        dB = marginal_decrease(f, x, B_set, initial)
        report.checked += 1
        if dA < dB - tol:
            report.violations.append((A_set, B_set, x, dA, dB))
    return report


def nonsupermodular_example() -> tuple:
    """Small instance on which ``max_j J_j`` violates diminishing returns.

    Returns ``(instance, initial, A, B, x)``. Under ``initial`` task 0 costs
    14 and task 1 costs 10. ``x`` puts agent 2 on task 1 (cost 8): with
    ``A = {}`` the maximum stays 14, so ``x`` gains nothing. ``B`` adds agent
    3 to task 0 (cost 6), after which task 1 is the maximum and ``x`` lowers
    it from 10 to 8.
    """
    costs = [[14, 50], [50, 10], [50, 8], [6, 50]]
    inst = ProblemInstance([[point_mass(c) for c in row] for row in costs], n_deploy=4)
    initial = Assignment.of([(0, 0), (1, 1)])
    return inst, initial, EMPTY, Assignment.of([(3, 0)]), (2, 1)


def all_pairs(n_agents: int, n_tasks: int, initial: Assignment = EMPTY) -> list:
    """Ground set ``F_O``: every pair whose agent is not used by ``initial``."""
    used = initial.agents
    return [(i, j) for i in range(n_agents) if i not in used for j in range(n_tasks)]
