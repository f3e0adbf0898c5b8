"""Fair redundant multi-agent task assignment under uncertain costs.

The solver minimises the worst expected task cost by bisection over a cost
budget around a greedy supermodular redundant-assignment routine.
"""
from .baselines import (
    OracleResult,
    bottleneck_initial_assignment,
    brute_force_optimal,
    min_sum_initial_assignment,
    random_redundant,
    repeated_threshold,
    utilitarian_redundant,
)
from .distributions import (
    Discrete,
    SampleMatrix,
    TruncatedGaussian,
    exact_min_expectation,
    make_discrete,
    make_truncated_gaussian,
    point_mass,
    sample_cost_matrix,
)
from .exceptions import (
    DisconnectedError,
    FairAssignError,
    IncompleteInstanceError,
    InfeasibleInstanceError,
    InvalidAugmentationError,
    InvalidParameterError,
    TooLargeError,
    UncoveredTaskError,
)
from .fsra import RelaxationWarning, SolveResult, alpha_bound, iteration_budget, solve_fair
from .gra import BudgetSolveOutcome, greedy_redundant_assignment
from .netgen import (
    TransportNetwork,
    network_to_instance,
    random_bipartite,
    random_transport_network,
)
from .problem import (
    EMPTY,
    Assignment,
    CostEvaluator,
    ProblemInstance,
    check_supermodular,
    marginal_decrease,
    task_cost,
    truncated_avg_cost,
)

__version__ = "0.1.0"
