"""Command-line front end: ``generate``, ``solve``, ``benchmark`` and ``oracle``.

Exit status is 0 on success, 2 for invalid input, 3 for an infeasible
instance and 4 when the oracle's enumeration cap is exceeded.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path

from .baselines import (
    ORACLE_CAP,
    brute_force_optimal,
    initial_assignment,
    random_redundant,
    repeated_threshold,
    utilitarian_redundant,
)
from .bench import (
    POLICIES,
    ExperimentConfig,
    parse_alpha,
    resolve_alpha,
    rows_to_csv,
    rows_to_json,
    run_experiment,
    summarize,
    summary_to_csv,
    summary_to_json,
)
from .distributions import DEFAULT_SAMPLES
from .exceptions import (
    DisconnectedError,
    IncompleteInstanceError,
    InfeasibleInstanceError,
    InvalidAugmentationError,
    InvalidParameterError,
    TooLargeError,
    UncoveredTaskError,
)
from .fsra import alpha_bound, solve_fair
from .netgen import TransportNetwork, network_to_instance, random_bipartite, random_transport_network
from .problem import EMPTY, Assignment, CostEvaluator, ProblemInstance

EXIT_OK, EXIT_INVALID, EXIT_INFEASIBLE, EXIT_CAP = 0, 2, 3, 4


def _clean(obj):
    # JSON has no NaN; emit null instead
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _emit_json(obj, out) -> None:
    _emit(json.dumps(_clean(obj), indent=1, allow_nan=False), out)


def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise InvalidParameterError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidParameterError(f"{path} is not valid JSON: {exc}") from exc


def _load_problem(args):
    """Instance, evaluator and initial assignment from an instance or network file."""
    data = _read_json(args.instance)
    if not isinstance(data, dict):
        raise InvalidParameterError("instance file must hold a JSON object")
    backend = getattr(args, "backend", "sample")
    if "nodes" in data:
        if backend == "exact":
            raise InvalidParameterError("transport networks only support the sample backend")
        net = TransportNetwork.from_dict(data)
        inst, matrix = network_to_instance(net, args.samples, args.seed)
        O = _initial(data, args, inst)
        ev = CostEvaluator.from_matrix(matrix, O, integer_costs=args.integer_costs)
    else:
        inst = ProblemInstance.from_dict(data)
        O = _initial(data, args, inst)
        if backend == "exact":
            ev = CostEvaluator.exact(inst, O, integer_costs=args.integer_costs)
        else:
            ev = CostEvaluator.sampled(inst, O, S=args.samples, seed=args.seed,
                                       integer_costs=args.integer_costs)
    ev.require_covered()
    return inst, ev


def _initial(data, args, inst) -> Assignment:
    if "initial" in data:
        O = Assignment.from_list(data["initial"])
        O.check_range(inst.N, inst.M)
        return O
    return initial_assignment(args.initial, inst.mean_costs())


def _alpha_arg(text):
    try:
        return parse_alpha(text)
    except InvalidParameterError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _n_deploy(args, inst) -> int:
    return inst.n_deploy if args.nd is None else args.nd


def cmd_generate(args) -> int:
    if args.kind == "bipartite":
        nd = args.M if args.nd is None else args.nd
        inst = random_bipartite(args.N, args.M, tuple(args.mean_range), tuple(args.std_range),
                                args.truncation, seed=args.seed, n_deploy=nd)
        _emit_json(inst.to_dict(), args.out)
    else:
        net = random_transport_network(args.nodes, args.N, args.M,
                                       extra_edge_density=args.density, seed=args.seed)
        _emit_json(net.to_dict(), args.out)
    return EXIT_OK


def cmd_solve(args) -> int:
    inst, ev = _load_problem(args)
    nd = _n_deploy(args, inst)
    policy = args.policy
    if policy in ("fair", "fair-alpha"):
        alpha = alpha_bound(ev) if policy == "fair-alpha" else resolve_alpha(args.alpha, ev)
        result = solve_fair(ev, nd, alpha)
        out = result.to_dict()
    elif policy == "oracle":
        return cmd_oracle(args)
    else:
        if policy == "utilitarian":
            A = utilitarian_redundant(ev, nd)
        elif policy == "random":
            A = random_redundant(inst, ev.initial, nd, args.seed)
        else:
            A = repeated_threshold(inst, ev.initial, nd)
        costs = ev.task_costs(A)
        out = {"assignment": A.to_list(), "n_deploy": nd, "deployment_used": len(A) + ev.M,
               "max_cost": float(costs.max()), "mean_cost": float(costs.mean()),
               "initial_costs": ev.task_costs(EMPTY).tolist(), "task_costs": costs.tolist()}
    out = {"policy": policy, "initial": ev.initial.to_list(), **out}
    _emit_json(out, args.out)
    return EXIT_OK


def cmd_oracle(args) -> int:
    inst, ev = _load_problem(args)
    res = brute_force_optimal(ev, _n_deploy(args, inst), args.cap)
    _emit_json({"initial": ev.initial.to_list(), **res.to_dict()}, args.out)
    return EXIT_OK


def cmd_benchmark(args) -> int:
    raw = _read_json(args.config)
    if not isinstance(raw, dict):
        raise InvalidParameterError("config file must hold a JSON object")
    for key, value in (("seed", args.seed), ("samples", args.samples),
                       ("alpha", args.alpha), ("initial", args.initial)):
        if value is not None:
            raw[key] = value
    if args.policy:
        raw["policies"] = args.policy
    if args.nd:
        raw["n_deploy"] = args.nd
    config = ExperimentConfig.from_dict(raw)
    rows = run_experiment(config)
    as_json = args.format == "json" or (args.format is None and str(args.out).endswith(".json"))
    render = rows_to_json if as_json else rows_to_csv
    _emit(render(rows, include_timing=args.timing), args.out)
    if args.summary:
        summary = summarize(rows)
        text = (summary_to_json(summary) if args.summary.endswith(".json")
                else summary_to_csv(summary))
        Path(args.summary).write_text(text)
    return EXIT_OK


def _add_model_flags(p, nd_help="deployment size N_d (default: the instance's)"):
    p.add_argument("instance", help="instance or transport-network JSON file")
    p.add_argument("--nd", type=int, help=nd_help)
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES, help="scenarios S")
    p.add_argument("--seed", type=int, default=0, help="sampling seed")
    p.add_argument("--initial", choices=["bottleneck", "min-sum"], default="bottleneck",
                   help="initial assignment when the file carries none")
    p.add_argument("--backend", choices=["sample", "exact"], default="sample")
    p.add_argument("--integer-costs", action="store_true",
                   help="round every task cost to the nearest integer")
    p.add_argument("--out", help="output path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fairassign", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a random instance as JSON")
    g.add_argument("--kind", choices=["bipartite", "transport"], default="bipartite")
    g.add_argument("--N", type=int, default=18, help="agents")
    g.add_argument("--M", type=int, default=2, help="tasks")
    g.add_argument("--nd", type=int, help="deployment size stored in the instance")
    g.add_argument("--nodes", type=int, default=50, help="transport: node count")
    g.add_argument("--density", type=float, default=0.2, help="transport: extra-edge density")
    g.add_argument("--mean-range", type=float, nargs=2, default=(15.0, 20.0))
    g.add_argument("--std-range", type=float, nargs=2, default=(5.0, 10.0))
    g.add_argument("--truncation", type=float, default=5.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="redundant assignment for one instance")
    _add_model_flags(s)
    s.add_argument("--policy", choices=POLICIES, default="fair")
    s.add_argument("--alpha", type=_alpha_arg, default="one", help="eq6, 1 or a real >= 1")
    s.add_argument("--cap", type=int, default=ORACLE_CAP, help="oracle enumeration cap")
    s.set_defaults(func=cmd_solve)

    o = sub.add_parser("oracle", help="exhaustive optimum for a small instance")
    _add_model_flags(o)
    o.add_argument("--cap", type=int, default=ORACLE_CAP, help="max candidate sets")
    o.set_defaults(func=cmd_oracle)

    b = sub.add_parser("benchmark", help="run an experiment config")
    b.add_argument("config", help="experiment config JSON")
    b.add_argument("--policy", nargs="+", choices=POLICIES)
    b.add_argument("--nd", type=int, nargs="+")
    b.add_argument("--alpha", type=_alpha_arg)
    b.add_argument("--samples", type=int)
    b.add_argument("--seed", type=int)
    b.add_argument("--initial", choices=["bottleneck", "min-sum"])
    b.add_argument("--format", choices=["csv", "json"])
    b.add_argument("--summary", help="also write a per-policy summary (.csv or .json)")
    b.add_argument("--timing", action="store_true", help="include wall_time column")
    b.add_argument("--out")
    b.set_defaults(func=cmd_benchmark)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except TooLargeError as exc:
        print(f"fairassign: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (InfeasibleInstanceError, UncoveredTaskError) as exc:
        print(f"fairassign: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (InvalidParameterError, IncompleteInstanceError, InvalidAugmentationError,
            DisconnectedError, ValueError) as exc:
        print(f"fairassign: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
