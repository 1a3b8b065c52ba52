"""Command-line interface: train, eval, compare.

Each command validates its configuration up front, runs single-process,
and writes an atomic run directory containing a config snapshot, a
manifest, and the reward CSV(s).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__
from .config import ConfigError, load_config, override
from .experiments import compare_modes, evaluate, make_env, make_library, train
from .storage import (
    StorageError,
    check_qtable_matches,
    load_qtable,
    save_qtable,
    staged_run_dir,
    write_csv,
    write_manifest,
)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", required=True, help="experiment config JSON")
    p.add_argument("--seed", type=int, default=None, help="override run.seed")
    p.add_argument("--out", default=None, help="override output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swarmq",
        description="Multi-robot behavior switching: train a behavior-selection "
                    "table, evaluate it, and compare against baselines.")
    parser.add_argument("--version", action="version", version=f"swarmq {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="run training episodes, save the Q-table")
    _add_common(p_train)

    p_eval = sub.add_parser("eval", help="score one mode over evaluation episodes")
    _add_common(p_eval)
    p_eval.add_argument("--qtable", default=None, help="Q-table JSON (trained mode)")
    p_eval.add_argument("--mode", required=True, choices=["trained", "random", "adhoc"])

    p_cmp = sub.add_parser("compare", help="trained vs baselines on paired episodes")
    _add_common(p_cmp)
    p_cmp.add_argument("--qtable", required=True, help="Q-table JSON")
    return parser


def _load(args):
    cfg = load_config(args.config)
    cfg = override(cfg, seed=args.seed, out_dir=args.out)
    if cfg.out_dir is None:
        raise ConfigError("no output directory: set out_dir in the config or pass --out")
    return cfg


def _manifest(cfg, started: float, extra: dict) -> dict:
    doc = {
        "tool": "swarmq",
        "version": __version__,
        "seed": cfg.run.seed,
        "config": cfg.to_dict(),
        "started_unix": started,
        "finished_unix": time.time(),
    }
    doc.update(extra)
    return doc


def _load_checked_qtable(path, cfg):
    q = load_qtable(path)
    env = make_env(cfg)
    lib = make_library(cfg)
    check_qtable_matches(q, env.n_states, [s.id.name for s in lib],
                         env.discretization_id)
    return q


def cmd_train(args) -> int:
    cfg = _load(args)
    started = time.time()
    result = train(cfg)
    with staged_run_dir(cfg.out_dir) as stage:
        (stage / "config.json").write_text(json.dumps(cfg.to_dict(), indent=1))
        save_qtable(result.qtable, stage / "qtable.json")
        write_csv(stage / "train_rewards.csv", ["episode", "total_reward"],
                  list(enumerate(result.episode_rewards)))
        write_manifest(stage / "manifest.json", _manifest(cfg, started, {
            "command": "train",
            "episodes": cfg.run.episodes,
            "episode_rewards": result.episode_rewards,
        }))
    print(f"trained {cfg.run.episodes} episodes on {cfg.mission}; "
          f"outputs in {cfg.out_dir}")
    return 0


def cmd_eval(args) -> int:
    cfg = _load(args)
    q = _load_checked_qtable(args.qtable, cfg) if args.mode == "trained" else None
    if args.mode == "trained" and args.qtable is None:
        raise ConfigError("--qtable is required for mode=trained")
    started = time.time()
    result = evaluate(cfg, args.mode, q)
    with staged_run_dir(cfg.out_dir) as stage:
        (stage / "config.json").write_text(json.dumps(cfg.to_dict(), indent=1))
        write_csv(stage / f"eval_{args.mode}_rewards.csv",
                  ["episode", "total_reward"],
                  list(enumerate(result.episode_rewards)))
        write_manifest(stage / "manifest.json", _manifest(cfg, started, {
            "command": "eval",
            "mode": args.mode,
            "episodes": cfg.run.eval_episodes,
            "episode_rewards": result.episode_rewards,
            "summary": {"mean": result.mean, "std": result.std},
        }))
    print(f"eval mode={args.mode} over {cfg.run.eval_episodes} episodes: "
          f"mean={result.mean:.6g} std={result.std:.6g}")
    return 0


def cmd_compare(args) -> int:
    cfg = _load(args)
    q = _load_checked_qtable(args.qtable, cfg)
    started = time.time()
    results = compare_modes(cfg, q)
    modes = list(results)
    rows = [[i] + [results[m].episode_rewards[i] for m in modes]
            for i in range(cfg.run.eval_episodes)]
    with staged_run_dir(cfg.out_dir) as stage:
        (stage / "config.json").write_text(json.dumps(cfg.to_dict(), indent=1))
        write_csv(stage / "compare_rewards.csv", ["episode"] + modes, rows)
        write_manifest(stage / "manifest.json", _manifest(cfg, started, {
            "command": "compare",
            "episodes": cfg.run.eval_episodes,
            "summary": {m: {"mean": r.mean, "std": r.std} for m, r in results.items()},
        }))
    for m in modes:
        print(f"{m:>8}: mean={results[m].mean:.6g} std={results[m].std:.6g}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"train": cmd_train, "eval": cmd_eval, "compare": cmd_compare}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (StorageError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
