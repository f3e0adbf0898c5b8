"""Experiment harness: trial batches across policies, summaries, CSV/JSON output.

Trial ``t`` of a run with master seed ``m`` draws every random stream from
``numpy.random.SeedSequence(m, spawn_key=(t, stream))``, so any single trial
can be regenerated without running the ones before it.
"""
from __future__ import annotations

import csv
import io
import json
import math
import time
import warnings
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .baselines import (
    INITIAL_POLICIES,
    brute_force_optimal,
    initial_assignment,
    random_redundant,
    repeated_threshold,
    utilitarian_redundant,
)
from .exceptions import InvalidParameterError, TooLargeError
from .fsra import RelaxationWarning, alpha_bound, solve_fair
from .netgen import network_to_instance, random_bipartite, random_transport_network
from .problem import COST_TOL, EMPTY, CostEvaluator

REPORT_VERSION = 1
POLICIES = ("fair", "fair-alpha", "utilitarian", "random", "repeat-threshold", "oracle")
STREAM_INSTANCE, STREAM_SAMPLES, STREAM_POLICY = 0, 1, 2


def derive_seed(master: int, trial: int, stream: int) -> int:
    """Counter-based per-trial seed: independent of how many trials run."""
    ss = np.random.SeedSequence(master, spawn_key=(trial, stream))
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def parse_alpha(value) -> str | float:
    if value in ("eq6", "one"):
        return value
    if value in (1, "1"):
        return "one"
    try:
        alpha = float(value)
    except (TypeError, ValueError):
        raise InvalidParameterError(f"alpha must be eq6, 1 or a real >= 1, got {value!r}") from None
    if not alpha >= 1:
        raise InvalidParameterError(f"alpha must be >= 1, got {alpha}")
    return alpha


def resolve_alpha(mode, ev: CostEvaluator) -> float:
    if mode == "eq6":
        return alpha_bound(ev)
    if mode == "one":
        return 1.0
    return float(mode)


@dataclass
class ExperimentConfig:
    generator: str = "bipartite"
    params: dict = field(default_factory=dict)
    trials: int = 10
    samples: int = 100
    policies: list = field(default_factory=lambda: ["fair", "random", "repeat-threshold"])
    n_deploy: list = field(default_factory=lambda: [3])
    alpha: object = "one"
    initial: str = "bottleneck"
    seed: int = 0
    oracle_cap: int = 10**7

    def __post_init__(self):
        if self.generator not in ("bipartite", "transport"):
            raise InvalidParameterError(f"unknown generator {self.generator!r}")
        if int(self.trials) < 1 or int(self.samples) < 1:
            raise InvalidParameterError("trials and samples must be >= 1")
        unknown = set(self.policies) - set(POLICIES)
        if unknown:
            raise InvalidParameterError(f"unknown policies {sorted(unknown)}")
        if self.initial not in INITIAL_POLICIES:
            raise InvalidParameterError(f"unknown initial policy {self.initial!r}")
        self.alpha = parse_alpha(self.alpha)
        m = self.params.get("M", 2 if self.generator == "bipartite" else 16)
        if any(nd < m for nd in self.n_deploy):
            raise InvalidParameterError("every N_d must be >= M")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise InvalidParameterError(f"unknown config keys {sorted(extra)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ReportRow:
    trial: int
    policy: str
    n_deploy: int
    alpha: float
    n_redundant: int
    deployment_used: int
    max_before: float
    max_after: float
    mean_before: float
    mean_after: float
    pct_max_vs_initial: float
    pct_mean_vs_initial: float
    pct_max_vs_oracle: float
    oracle_max: float
    worst_task_improved: bool
    improved_tasks: str
    note: str = ""
    wall_time: float = 0.0


CSV_COLUMNS = [f.name for f in fields(ReportRow) if f.name != "wall_time"]


def pct_diff(value: float, reference: float) -> float:
    return float(100.0 * (value - reference) / reference) if reference else math.nan


def build_trial(config: ExperimentConfig, trial: int):
    """Instance, evaluator and initial assignment for one trial."""
    p = dict(config.params)
    s_inst = derive_seed(config.seed, trial, STREAM_INSTANCE)
    s_samp = derive_seed(config.seed, trial, STREAM_SAMPLES)
    if config.generator == "bipartite":
        inst = random_bipartite(p.get("N", 18), p.get("M", 2),
                                tuple(p.get("mean_range", (15.0, 20.0))),
                                tuple(p.get("std_range", (5.0, 10.0))),
                                p.get("truncation", 5.0), seed=s_inst)
        O = initial_assignment(config.initial, inst.mean_costs())
        ev = CostEvaluator.sampled(inst, O, S=config.samples, seed=s_samp)
    else:
        net = random_transport_network(p.get("nodes", 50), p.get("N", 32), p.get("M", 16),
                                       tuple(p.get("edge_mean_range", (10.0, 20.0))),
                                       tuple(p.get("edge_std_range", (5.0, 10.0))),
                                       p.get("extra_edge_density", 0.2), seed=s_inst)
        inst, matrix = network_to_instance(net, config.samples, s_samp)
        O = initial_assignment(config.initial, inst.mean_costs())
        ev = CostEvaluator.from_matrix(matrix, O)
    return inst, ev, O


def _run_policy(policy, config, inst, ev, nd, trial):
    alpha = math.nan
    if policy == "fair":
        alpha = resolve_alpha(config.alpha, ev)
        A = solve_fair(ev, nd, alpha).assignment
    elif policy == "fair-alpha":
        alpha = alpha_bound(ev)
        A = solve_fair(ev, nd, alpha).assignment
    elif policy == "utilitarian":
        A = utilitarian_redundant(ev, nd)
    elif policy == "random":
        A = random_redundant(inst, ev.initial, nd, derive_seed(config.seed, trial, STREAM_POLICY))
    elif policy == "repeat-threshold":
        A = repeated_threshold(inst, ev.initial, nd, inst.mean_costs())
    else:
        raise InvalidParameterError(f"unknown policy {policy!r}")
    return A, alpha


def run_trial(config: ExperimentConfig, trial: int) -> list:
    inst, ev, _ = build_trial(config, trial)
    before = ev.task_costs(EMPTY)
    worst = int(np.argmax(before))
    rows = []
    for nd in config.n_deploy:
        oracle, oracle_note, oracle_time = None, "", 0.0
        if "oracle" in config.policies:
            t0 = time.perf_counter()
            try:
                oracle = brute_force_optimal(ev, nd, config.oracle_cap)
            except TooLargeError:
                oracle_note = "oracle-skipped"
            oracle_time = time.perf_counter() - t0
        oracle_max = oracle.max_cost if oracle else math.nan
        for policy in config.policies:
            if policy == "oracle":
                if oracle is None:
                    continue
                A, alpha, elapsed = oracle.assignment, math.nan, oracle_time
            else:
                t0 = time.perf_counter()
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", RelaxationWarning)
                    A, alpha = _run_policy(policy, config, inst, ev, nd, trial)
                elapsed = time.perf_counter() - t0
            after = ev.task_costs(A)
            improved = after < before - COST_TOL
            rows.append(ReportRow(
                trial=trial, policy=policy, n_deploy=nd, alpha=float(alpha),
                n_redundant=len(A), deployment_used=len(A) + ev.M,
                max_before=float(before.max()), max_after=float(after.max()),
                mean_before=math.fsum(before) / ev.M, mean_after=math.fsum(after) / ev.M,
                pct_max_vs_initial=pct_diff(after.max(), before.max()),
                pct_mean_vs_initial=pct_diff(math.fsum(after), math.fsum(before)),
                pct_max_vs_oracle=pct_diff(after.max(), oracle_max),
                oracle_max=float(oracle_max),
                worst_task_improved=bool(improved[worst]),
                improved_tasks="".join("1" if f else "0" for f in improved),
                note=oracle_note, wall_time=elapsed))
    return rows


def run_experiment(config: ExperimentConfig, trials=None) -> list:
    """Rows for every trial, ``N_d`` and policy, ordered by trial id."""
    ids = range(config.trials) if trials is None else trials
    rows = []
    for t in sorted(ids):
        rows.extend(run_trial(config, t))
    return rows


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (float, np.floating)):
        return "" if math.isnan(value) else repr(float(value))
    return str(value)


def rows_to_csv(rows, include_timing: bool = False) -> str:
    cols = CSV_COLUMNS + (["wall_time"] if include_timing else [])
    buf = io.StringIO()
    buf.write(f"# fairassign report v{REPORT_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        d = asdict(r)
        w.writerow([_fmt(d[c]) for c in cols])
    return buf.getvalue()


def _json_value(v):
    if isinstance(v, (float, np.floating)):
        return None if math.isnan(v) else float(v)
    return v


def rows_to_json(rows, include_timing: bool = False) -> str:
    cols = CSV_COLUMNS + (["wall_time"] if include_timing else [])
    data = [{c: _json_value(asdict(r)[c]) for c in cols} for r in rows]
    return json.dumps({"version": REPORT_VERSION, "rows": data}, indent=1)


def _quartiles(values):
    v = np.array([x for x in values if not math.isnan(x)])
    if not len(v):
        return math.nan, math.nan, math.nan
    q1, med, q3 = np.percentile(v, [25, 50, 75])
    return float(q1), float(med), float(q3)


def summarize(rows) -> list:
    """Per (policy, N_d): quartiles of the percent differences, fraction of
    trials improving the worst-off task, and fraction at the oracle optimum."""
    if not rows:
        raise InvalidParameterError("nothing to summarise")
    groups = {}
    for r in rows:
        groups.setdefault((r.policy, r.n_deploy), []).append(r)
    out = []
    for (policy, nd), rs in groups.items():
        entry = {"policy": policy, "n_deploy": nd, "trials": len(rs)}
        for key in ("pct_max_vs_initial", "pct_mean_vs_initial", "pct_max_vs_oracle"):
            q1, med, q3 = _quartiles([getattr(r, key) for r in rs])
            entry[f"{key}_q1"], entry[f"{key}_median"], entry[f"{key}_q3"] = q1, med, q3
        entry["frac_worst_improved"] = float(np.mean([r.worst_task_improved for r in rs]))
        with_oracle = [r for r in rs if not math.isnan(r.oracle_max)]
        entry["frac_at_oracle"] = (
            float(np.mean([r.max_after <= r.oracle_max + COST_TOL for r in with_oracle]))
            if with_oracle else math.nan)
        entry["median_deployment"] = float(np.median([r.deployment_used for r in rs]))
        alphas = [r.alpha for r in rs if not math.isnan(r.alpha)]
        entry["alpha_min"] = min(alphas) if alphas else math.nan
        entry["alpha_max"] = max(alphas) if alphas else math.nan
        out.append(entry)
    return out


def summary_to_csv(summary) -> str:
    buf = io.StringIO()
    buf.write(f"# fairassign summary v{REPORT_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    cols = list(summary[0])
    w.writerow(cols)
    for e in summary:
        w.writerow([_fmt(e[c]) for c in cols])
    return buf.getvalue()


def summary_to_json(summary) -> str:
    data = [{k: _json_value(v) for k, v in e.items()} for e in summary]
    return json.dumps({"version": REPORT_VERSION, "summary": data}, indent=1)
