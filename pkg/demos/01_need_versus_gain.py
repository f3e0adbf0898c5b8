"""Who should the one spare robot help?

Two people wait for supplies. Person 0's robot is erratic (10 or 50 minutes,
equally likely); person 1's robot reliably takes 35. A spare robot could
reach person 0 in 10 minutes or person 1 in 30.
"""
import numpy as np

from fairassign import (
    Assignment,
    CostEvaluator,
    ProblemInstance,
    make_discrete,
    point_mass,
    solve_fair,
    utilitarian_redundant,
)

edges = [
    [make_discrete([(10, 0.5), (50, 0.5)]), point_mass(60)],
    [point_mass(60), point_mass(35)],
    [point_mass(10), point_mass(30)],  # the spare robot
]
instance = ProblemInstance(edges, n_deploy=3)
initial = Assignment.of([(0, 0), (1, 1)])
ev = CostEvaluator.exact(instance, initial)  # exact expectations, no sampling

print("expected waits with one robot each:", ev.task_costs())

# Sending the spare to person 0 saves 20 minutes of expected wait, to person 1 only 5.
util = utilitarian_redundant(ev, n_deploy=3)
print("utilitarian sends", list(util), "->", ev.task_costs(util))

# The fair solver looks at the worst wait instead, which is person 1's 35.
fair = solve_fair(ev, n_deploy=3)
print("fair sends      ", list(fair.assignment), "->", np.array(fair.task_costs))
print(f"worst wait: utilitarian {ev.max_cost(util):.0f}, fair {fair.max_cost:.0f}")
print(f"mean wait:  utilitarian {ev.mean_cost(util):.1f}, fair {fair.mean_cost:.1f}")
