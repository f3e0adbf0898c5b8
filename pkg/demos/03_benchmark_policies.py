"""Fair redundancy against two simple baselines on 40 agents and 10 tasks.

Percent change of the worst expected task cost relative to the initial
one-agent-per-task assignment (negative is better), median over trials.
"""
from fairassign.bench import ExperimentConfig, run_experiment, summarize

config = ExperimentConfig(
    generator="bipartite",
    params={"N": 40, "M": 10},
    trials=20,
    samples=100,
    policies=["fair", "repeat-threshold", "random"],
    n_deploy=[15, 20, 25, 30],
    alpha="one",
    seed=7,
)
rows = run_experiment(config)

table = {}
for entry in summarize(rows):
    table.setdefault(entry["n_deploy"], {})[entry["policy"]] = entry["pct_max_vs_initial_median"]

print("N_d " + "".join(f"{p:>18}" for p in config.policies))
for nd, by_policy in sorted(table.items()):
    print(f"{nd:<4}" + "".join(f"{by_policy[p]:>17.1f}%" for p in config.policies))
