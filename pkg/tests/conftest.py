import numpy as np
import pytest

from fairassign import (
    Assignment,
    CostEvaluator,
    ProblemInstance,
    SampleMatrix,
    make_discrete,
    point_mass,
)

_ACCEPTANCE_LINES = []


@pytest.fixture
def verdict():
    """Record one pass/fail line per acceptance check; printed after the run."""

    def record(criterion: str, label: str, ok: bool, detail: str = "") -> bool:
        tag = "PASS" if ok else "FAIL"
        _ACCEPTANCE_LINES.append(f"[{tag}] criterion {criterion}: {label}" + (f" ({detail})" if detail else ""))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def derived():
    """Two tasks, three agents.

    Agent 0 holds task 0 at cost 10 and agent 1 holds task 1 at cost 14.
    Agent 2 is free: useless on task 0, a coin flip between 10 and 30 on task 1.
    """
    coin = make_discrete([(10, 0.5), (30, 0.5)])
    edges = [
        [point_mass(10), point_mass(40)],
        [point_mass(40), point_mass(14)],
        [point_mass(40), coin],
    ]
    inst = ProblemInstance(edges, n_deploy=3)
    O = Assignment.of([(0, 0), (1, 1)])
    return inst, O, CostEvaluator.exact(inst, O)


@pytest.fixture
def matrix_ev():
    """Factory: evaluator over uniform random scenarios, agent j initially on task j."""

    def make(seed, N, M, S=50):
        samples = np.random.default_rng(seed).uniform(5, 30, size=(S, N, M))
        return CostEvaluator.from_matrix(SampleMatrix(samples),
                                         Assignment.of((j, j) for j in range(M)))

    return make
