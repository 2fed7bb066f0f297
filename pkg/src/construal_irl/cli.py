"""Command line entry point.

Subcommands:
  run    full reproduction: trajectories, both models, reports, plot data
  infer  posterior for one recorded trajectory on one maze
  bound  performance-gap bound report for a construal of one maze
  stats  human-summary statistics (binomial table, model comparison)

Errors print a machine-readable JSON object to stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import sys

from .bounds import verify_bound
from .demonstrator import load_trajectory
from .errors import ConstrualIrlError, IngestError
from .gridworld import FULLY_AWARE, NOTCH_UNAWARE, compile_mdp, load_grid
from .harness import (
    ScenarioResult,
    compare_models,
    default_config_path,
    human_binomial_table,
    ingest_human_summary,
    run_experiment,
)
from .inference import (
    default_hypothesis_space,
    joint_posterior,
    posterior_to_json_dict,
    reward_only_posterior,
)
from .mdp import DEFAULT_BETA, DEFAULT_DISCOUNT

_CONSTRUALS = {"aware": FULLY_AWARE, "unaware": NOTCH_UNAWARE}


def _emit(obj, out_path):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _add_hypothesis_args(parser):
    parser.add_argument("--beta", type=float, default=DEFAULT_BETA,
                        help="softmax temperature used for inference planning")
    parser.add_argument("--gamma", type=float, default=DEFAULT_DISCOUNT)
    parser.add_argument("--preferred-reward", type=float, default=1.0)
    parser.add_argument("--other-reward", type=float, default=0.5)
    parser.add_argument("--step-reward", type=float, default=-0.01)


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="construal-irl",
        description="Joint reward-and-construal inference on notched maze tasks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the full experiment")
    p_run.add_argument("--config", default=None,
                       help="key = value config file (default: packaged config)")
    p_run.add_argument("--out", required=True, help="output directory")

    p_infer = sub.add_parser("infer", help="posterior for one trajectory")
    p_infer.add_argument("--grid", required=True, help="maze file")
    p_infer.add_argument("--traj", required=True, help="trajectory JSON file")
    p_infer.add_argument("--model", choices=("reward-only", "joint"), default="joint")
    p_infer.add_argument("--out", default=None, help="write JSON here instead of stdout")
    _add_hypothesis_args(p_infer)

    p_bound = sub.add_parser("bound", help="performance-gap bound report")
    p_bound.add_argument("--grid", required=True, help="maze file")
    p_bound.add_argument("--construal", choices=sorted(_CONSTRUALS), default="unaware")
    p_bound.add_argument("--preferred-goal", choices=("pink", "yellow"), default="pink")
    p_bound.add_argument("--out", default=None, help="write JSON here instead of stdout")
    _add_hypothesis_args(p_bound)

    p_stats = sub.add_parser("stats", help="statistics over human summaries")
    p_stats.add_argument("--human", required=True, help="summary CSV")
    p_stats.add_argument("--results", default=None,
                         help="scenario_results.json from a run, for model comparison")
    p_stats.add_argument("--out", default=None, help="write JSON here instead of stdout")
    return parser


def _cmd_run(args):
    config_path = args.config if args.config is not None else default_config_path()
    results = run_experiment(config_path, out_dir=args.out)
    for res in results:
        print(
            f"{res.scenario:>14}: reward_only {res.reward_only_judgment:+.3f}  "
            f"joint {res.joint_reward_judgment:+.3f}  "
            f"construal {res.joint_construal_judgment:+.3f}"
        )
    print(f"wrote {args.out}")
    return 0


def _load_results_json(path):
    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    except FileNotFoundError:
        raise IngestError(f"results file not found: {path}")
    except json.JSONDecodeError as exc:
        raise IngestError(f"results file is not valid JSON: {exc}")
    if not isinstance(data, list):
        raise IngestError("results file must hold a list of scenario results")
    try:
        return [
            ScenarioResult(
                grid_id=row["grid_id"],
                scenario=row["scenario"],
                reward_only_judgment=row["reward_only_judgment"],
                joint_reward_judgment=row["joint_reward_judgment"],
                joint_construal_judgment=row["joint_construal_judgment"],
                human_mean=row.get("human_mean"),
                human_se=row.get("human_se"),
            )
            for row in data
        ]
    except (KeyError, TypeError) as exc:
        raise IngestError(f"results file rows are missing fields: {exc}")


def _cmd_infer(args):
    grid = load_grid(args.grid)
    traj = load_trajectory(args.traj)
    space = default_hypothesis_space(args.preferred_reward, args.other_reward, args.step_reward)
    fn = joint_posterior if args.model == "joint" else reward_only_posterior
    posterior = fn([traj], space, grid, beta=args.beta, discount=args.gamma)
    _emit(posterior_to_json_dict(posterior), args.out)
    return 0


def _cmd_bound(args):
    grid = load_grid(args.grid)
    space = default_hypothesis_space(args.preferred_reward, args.other_reward, args.step_reward)
    reward = next(r for r in space.rewards if r.preferred_goal == args.preferred_goal)
    true_mdp = compile_mdp(grid, FULLY_AWARE, reward, args.gamma)
    construed = compile_mdp(grid, _CONSTRUALS[args.construal], reward, args.gamma)
    report = verify_bound(true_mdp, construed, beta=args.beta)
    _emit(report.to_json_dict(), args.out)
    return 0


def _cmd_stats(args):
    human = ingest_human_summary(args.human)
    out = {"binomial_tests": human_binomial_table(human)}
    if args.results is not None:
        out["model_comparison"] = compare_models(_load_results_json(args.results), human)
    _emit(out, args.out)
    return 0


_COMMANDS = {"run": _cmd_run, "infer": _cmd_infer, "bound": _cmd_bound, "stats": _cmd_stats}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConstrualIrlError as exc:
        payload = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(payload, sort_keys=True), file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        payload = {"error": "FileNotFoundError", "message": str(exc)}
        print(json.dumps(payload, sort_keys=True), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
