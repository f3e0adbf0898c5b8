"""Robots on a random road network, 16 tasks, 4 spare robots.

Travel times are shortest paths under random edge delays, so two robots
sharing a road are correlated. We count how often each task, ranked by its
initial expected wait, receives help under the fair and utilitarian rules.
"""
import numpy as np

from fairassign.bench import ExperimentConfig, build_trial, run_experiment

config = ExperimentConfig(
    generator="transport",
    params={"nodes": 50, "N": 32, "M": 16},
    trials=25,
    samples=100,
    policies=["fair", "utilitarian"],
    n_deploy=[20],
    initial="min-sum",
    seed=1,
)
rows = run_experiment(config)

# rank 0 is the task with the shortest initial wait, rank 15 the longest
ranking = {}
for t in range(config.trials):
    _, ev, _ = build_trial(config, t)
    ranking[t] = np.argsort(ev.task_costs(), kind="stable")

for policy in config.policies:
    picked = [r for r in rows if r.policy == policy]
    helped = np.zeros(16)
    for r in picked:
        flags = np.array([c == "1" for c in r.improved_tasks])
        helped += flags[ranking[r.trial]]
    bar = "".join(" .:-=+*#%@"[min(9, int(9 * h / len(picked)))] for h in helped)
    worst = np.mean([r.worst_task_improved for r in picked])
    gain_max = np.median([-r.pct_max_vs_initial for r in picked])
    gain_mean = np.median([-r.pct_mean_vs_initial for r in picked])
    print(f"{policy:>12} |{bar}| worst helped {worst:.0%}, "
          f"median gain: max {gain_max:.1f}%, mean {gain_mean:.1f}%")
print(" " * 13 + "  best ....... worst  (initial wait)")
