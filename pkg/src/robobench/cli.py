"""Command-line interface.

Verbs: list, run, eval, train, report. Settings resolve in three layers,
lowest priority first: built-in defaults, an INI config file (--config),
then explicit command-line flags. Exit codes: 0 success, 2 usage or
configuration problem, 3 transport failure, 4 policy failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Any, Dict, Optional

from .backend.base import RobotBackend
from .backend.hardware import BusServoBackend
from .config import (CEM_DEFAULTS, HARDWARE_DEFAULTS, RUN_DEFAULTS,
                     load_config_file, resolve, to_jsonable)
from .cem import CemConfig, cem_optimize
from .env import Env, evaluate, make_env, run_episode
from .errors import (ConfigurationError, PolicyError, TransportError,
                     UsageError)
from .policies import make_builtin_policy, save_policy
from .registry import CATALOG, TASK_NAMES, task_info
from .report import build_report
from .trajlog import write_episode_log
from .version import VERSION

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_TRANSPORT = 3
EXIT_POLICY = 4


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--task", help="task name (see the list verb)")
    parser.add_argument("--backend", choices=("sim", "hardware"))
    parser.add_argument("--seed", type=int)
    parser.add_argument("--episodes", type=int)
    parser.add_argument("--horizon", type=int)
    parser.add_argument("--dt", type=float)
    parser.add_argument("--policy",
                        help="'zero', 'random', or a saved .json policy")
    parser.add_argument("--output", help="directory for episode logs")


def _add_hardware_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--device", help="serial device path")
    parser.add_argument("--baud", type=int)
    parser.add_argument("--ids", help="comma-separated servo ids, joint order")
    parser.add_argument("--object-id", type=int, dest="object_id",
                        help="passive object servo id (claw object tasks)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="robobench",
        description="Robot manipulation/locomotion benchmark runner.")
    parser.add_argument("--version", action="version", version=VERSION)
    sub = parser.add_subparsers(dest="verb", required=True)

    p_list = sub.add_parser("list", help="print the task catalog")
    p_list.add_argument("--robot", choices=("dclaw", "dkitty"),
                        help="only tasks for this robot")
    p_list.set_defaults(func=cmd_list)

    p_run = sub.add_parser("run", help="run episodes and write JSONL logs")
    p_run.add_argument("--config", help="INI config file")
    _add_run_flags(p_run)
    _add_hardware_flags(p_run)
    p_run.set_defaults(func=cmd_run)

    p_eval = sub.add_parser(
        "eval", help="evaluate a policy over seeded episodes")
    p_eval.add_argument("--config", help="INI config file")
    _add_run_flags(p_eval)
    _add_hardware_flags(p_eval)
    p_eval.set_defaults(func=cmd_eval)

    p_train = sub.add_parser("train", help="train a linear policy with CEM")
    p_train.add_argument("--config", help="INI config file")
    p_train.add_argument("--task", help="task name (see the list verb)")
    p_train.add_argument("--seed", type=int)
    p_train.add_argument("--dt", type=float)
    p_train.add_argument("--population", type=int)
    p_train.add_argument("--elite-frac", type=float, dest="elite_frac")
    p_train.add_argument("--iterations", type=int)
    p_train.add_argument("--sigma", type=float)
    p_train.add_argument("--std-floor", type=float, dest="std_floor")
    p_train.add_argument("--episodes-per-candidate", type=int,
                         dest="episodes_per_candidate")
    p_train.add_argument("--train-horizon", type=int, dest="train_horizon")
    p_train.add_argument("--out", default="policy.json",
                         help="where to save the trained policy")
    p_train.add_argument("--eval-episodes", type=int, default=10,
                         dest="eval_episodes")
    p_train.add_argument("--eval-horizon", type=int, default=100,
                         dest="eval_horizon")
    p_train.add_argument("--stop-at-success", type=float, default=None,
                         dest="stop_at_success",
                         help="stop once the best policy reaches this "
                              "success fraction on the eval episodes")
    p_train.set_defaults(func=cmd_train)

    p_report = sub.add_parser(
        "report", help="aggregate logs into a table, CSV, and figures")
    p_report.add_argument("logs", help="directory of episode logs")
    p_report.add_argument("--output",
                          help="output directory (default: the log dir)")
    p_report.add_argument("--no-figures", action="store_true")
    p_report.set_defaults(func=cmd_report)
    return parser


# -- configuration plumbing ------------------------------------------------------


def _file_sections(args: argparse.Namespace) -> Dict[str, Dict[str, Any]]:
    path = getattr(args, "config", None)
    return load_config_file(path) if path else {}


def _overrides(args: argparse.Namespace, keys) -> Dict[str, Any]:
    return {k: getattr(args, k) for k in keys
            if getattr(args, k, None) is not None}


def _resolved_run(args: argparse.Namespace) -> Dict[str, Any]:
    sections = _file_sections(args)
    run_cfg = resolve(RUN_DEFAULTS, sections.get("run"),
                      _overrides(args, RUN_DEFAULTS))
    if not run_cfg["task"]:
        raise UsageError("no task given (use --task or a config file)")
    hw_cfg = resolve(HARDWARE_DEFAULTS, sections.get("hardware"),
                     _overrides(args, HARDWARE_DEFAULTS))
    run_cfg["hardware"] = hw_cfg
    return run_cfg


def _parse_ids(raw: str) -> list:
    try:
        return [int(part) for part in raw.split(",") if part.strip()]
    except ValueError:
        raise ConfigurationError(f"bad servo id list: {raw!r}") from None


def _build_backend(run_cfg: Dict[str, Any]) -> Optional[RobotBackend]:
    """None means let make_env construct the default sim backend."""
    if run_cfg["backend"] == "sim":
        return None
    if run_cfg["backend"] != "hardware":
        raise ConfigurationError(
            f"unknown backend {run_cfg['backend']!r}")
    hw = run_cfg["hardware"]
    if not hw["device"]:
        raise ConfigurationError("hardware backend needs --device")
    if not hw["ids"]:
        raise ConfigurationError("hardware backend needs --ids")
    from .backend.transport import SerialTransport
    from .robots import spec_for

    info = task_info(run_cfg["task"])
    transport = SerialTransport(hw["device"], hw["baud"])
    object_id = hw["object_id"] if hw["object_id"] >= 0 else None
    return BusServoBackend(spec_for(info.robot), transport,
                           ids=_parse_ids(hw["ids"]), object_id=object_id)


def _make_env_from(run_cfg: Dict[str, Any]) -> Env:
    backend = _build_backend(run_cfg)
    extra = {"policy": run_cfg["policy"]}
    return make_env(run_cfg["task"], backend=backend, seed=run_cfg["seed"],
                    horizon=run_cfg["horizon"], dt=run_cfg["dt"],
                    extra_config=extra)


def _policy_from(run_cfg: Dict[str, Any], env: Env):
    return make_builtin_policy(run_cfg["policy"], env.action_low,
                               env.action_high, seed=run_cfg["seed"])


# -- verbs -----------------------------------------------------------------------


def cmd_list(args: argparse.Namespace) -> int:
    print(f"{'name':<26} {'robot':<7} {'level':<15} {'obs':>4} {'act':>4}")
    for name in TASK_NAMES:
        info = CATALOG[name]
        if args.robot and info.robot != args.robot:
            continue
        print(f"{name:<26} {info.robot:<7} {info.level:<15} "
              f"{info.observation_dim:>4} {info.action_dim:>4}")
    return EXIT_OK


def _log_path(output: str, task: str, seed: int, episode: int) -> str:
    return os.path.join(output, f"{task}_seed{seed}_ep{episode:04d}.jsonl")


def cmd_run(args: argparse.Namespace) -> int:
    run_cfg = _resolved_run(args)
    env = _make_env_from(run_cfg)
    policy_failed = False
    try:
        policy = _policy_from(run_cfg, env)
        successes = 0
        for episode in range(run_cfg["episodes"]):
            result = run_episode(env, policy, episode=episode)
            path = _log_path(run_cfg["output"], env.task.name,
                             run_cfg["seed"], episode)
            write_episode_log(path, result.meta, result.records,
                              result.footer())
            successes += int(result.success)
            flag = ""
            if result.policy_error:
                policy_failed = True
                flag = f" policy_error={result.policy_error!r}"
            print(f"episode {episode}: steps={result.steps} "
                  f"reward={result.total_reward:.2f} "
                  f"score={result.final_score:.4f} "
                  f"success={result.success}{flag}")
        n = run_cfg["episodes"]
        print(f"success {successes}/{n} "
              f"({successes / n:.2f})  logs in {run_cfg['output']}")
        print(f"config digest {env.config_digest}")
    finally:
        env.close()
    return EXIT_POLICY if policy_failed else EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    run_cfg = _resolved_run(args)
    env = _make_env_from(run_cfg)
    try:
        policy = _policy_from(run_cfg, env)
        report = evaluate(env, policy, n_episodes=run_cfg["episodes"])
        for k, (success, err) in enumerate(zip(report.per_episode,
                                               report.errors)):
            suffix = f" error={err!r}" if err else ""
            print(f"episode {k}: success={success}{suffix}")
        print(f"success fraction {report.success_fraction:.3f} "
              f"over {report.n_episodes} episodes")
        print(f"mean return {report.mean_return:.3f}  "
              f"mean final score {report.mean_final_score:.4f}")
    finally:
        env.close()
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    sections = _file_sections(args)
    cem_cfg = resolve(CEM_DEFAULTS, sections.get("cem"),
                      _overrides(args, CEM_DEFAULTS))
    run_file = sections.get("run", {})
    task = args.task or run_file.get("task")
    if not task:
        raise UsageError("no task given (use --task or a config file)")
    seed = args.seed if args.seed is not None else run_file.get("seed", 0)
    dt = args.dt if args.dt is not None else run_file.get("dt", 0.1)

    config = CemConfig(seed=seed, **cem_cfg)
    train_env = make_env(task, seed=seed, horizon=config.train_horizon, dt=dt)
    eval_env = make_env(task, seed=seed, horizon=args.eval_horizon, dt=dt)

    def print_iteration(iteration, result):
        entry = result.curve[-1]
        print(f"iter {iteration:3d}  best {entry['best_score']:9.2f}  "
              f"elite mean {entry['elite_mean']:9.2f}  "
              f"std {entry['std_mean']:.4f}")
        if args.stop_at_success is None:
            return False
        from .policies import LinearPolicy
        params = result.best_params
        if result.parameter_scale is not None:
            params = params * result.parameter_scale
        candidate = LinearPolicy.from_flat(
            params, eval_env.observation_dim,
            eval_env.action_low, eval_env.action_high)
        score = evaluate(eval_env, candidate,
                         n_episodes=args.eval_episodes).success_fraction
        print(f"          eval success {score:.2f}")
        return score >= args.stop_at_success

    try:
        policy, result = cem_optimize(train_env, config,
                                      on_iteration=print_iteration)
    finally:
        train_env.close()

    try:
        report = evaluate(eval_env, policy, n_episodes=args.eval_episodes)
    finally:
        eval_env.close()
    meta = {
        "task": task,
        "seed": seed,
        "dt": dt,
        "cem": to_jsonable(cem_cfg),
        "train_config_digest": train_env.config_digest,
        "iterations_used": len(result.curve),
        "best_score": result.best_score,
        "curve": result.curve,
        "eval_success_fraction": report.success_fraction,
    }
    save_policy(args.out, policy, meta=meta)
    print(f"trained {len(result.curve)} iterations, "
          f"best training score {result.best_score:.2f}")
    print(f"eval success fraction {report.success_fraction:.3f} "
          f"over {args.eval_episodes} episodes")
    print(f"policy saved to {args.out}")
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    table = build_report(args.logs, output_directory=args.output,
                         figures=not args.no_figures)
    print(table)
    out_dir = args.output or args.logs
    print(f"\nreport.csv{'' if args.no_figures else ' and figures'} "
          f"written to {out_dir}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TransportError as exc:
        print(f"transport error: {exc}", file=sys.stderr)
        return EXIT_TRANSPORT
    except PolicyError as exc:
        print(f"policy error: {exc}", file=sys.stderr)
        return EXIT_POLICY


if __name__ == "__main__":
    sys.exit(main())
