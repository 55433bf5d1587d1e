"""Command line: ``satedge {train,eval,sweep,compare}``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import load_config, preset_path
from .errors import ConfigError


def _seeds(text: str) -> list[int]:
    return [int(s) for s in text.split(",") if s.strip()]


def _floats(text: str) -> list[float]:
    return [float(s) for s in text.split(",") if s.strip()]


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="satedge", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="verb", required=True)
    for verb in ("train", "eval", "sweep", "compare"):
        s = sub.add_parser(verb)
        s.add_argument("--config", help="TOML file, or 'preset:NAME' (published, desk)")
        s.add_argument("--seed", type=_seeds, help="seed or comma list")
        s.add_argument("--out", help="output directory")
        s.add_argument("--timesteps", type=int)
        s.add_argument("--episodes", type=int)
        if verb != "train":
            s.add_argument("--policy", help="policy name or comma list")
        if verb == "sweep":
            s.add_argument("--sweep-axis", required=True)
            s.add_argument("--sweep-values", type=_floats, required=True)
        if verb == "eval":
            s.add_argument("--checkpoint", help="PPO checkpoint to evaluate instead of training")
    return p


def _load(args):
    path = args.config
    if path and path.startswith("preset:"):
        path = preset_path(path.split(":", 1)[1])
    overrides = {}
    if args.seed:
        overrides["seeds"] = args.seed
    if args.out:
        overrides["out_dir"] = args.out
    if args.timesteps is not None:
        overrides["total_timesteps"] = args.timesteps
    if args.episodes is not None:
        overrides["episodes"] = args.episodes
    if getattr(args, "policy", None):
        overrides["policy"] = args.policy
    if getattr(args, "sweep_axis", None):
        overrides["sweep_axis"] = args.sweep_axis
        overrides["sweep_values"] = args.sweep_values
    return load_config(path, overrides)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _load(args)
    except ConfigError as exc:
        print(f"satedge: config error: {exc}", file=sys.stderr)
        return 2

    from . import runner
    from .ppo.agent import load_checkpoint

    out = Path(cfg["out_dir"])
    try:
        if args.verb == "train":
            for seed in cfg["seeds"]:
                res = runner.train_cell(cfg, seed, out, "base")
                print(f"seed {seed}: {res.env_steps} steps, "
                      f"final mean episode reward {res.final_reward():.4f}")
        elif args.verb == "eval":
            models = None
            if args.checkpoint:
                model, _ = load_checkpoint(args.checkpoint)
                models = {(None, s): model for s in cfg["seeds"]}
            records = runner.run(cfg.with_overrides(sweep_axis="none"), out_dir=out, models=models)
            _print_summary(records)
        elif args.verb == "sweep":
            _print_summary(runner.run(cfg, out_dir=out))
        else:
            records = runner.run(cfg, out_dir=out)
            rows = runner.compare(records)
            runner.write_ranking(out / "ranking.csv", rows)
            for r in rows:
                print(f"{r['rank']:>2}  {r['group']:<16} mean cost {r['mean_cost']:.4f}  "
                      f"diff {r['mean_diff_vs_best']:+.4f} +- {r['paired_std_err']:.4f}")
    except (ValueError, FloatingPointError) as exc:
        print(f"satedge: error: {exc}", file=sys.stderr)
        return 1
    return 0


def _print_summary(records) -> None:
    from .runner import summarize
    for row in summarize(records):
        val = "" if row["sweep_value"] is None else f"{row['sweep_axis']}={row['sweep_value']:g} "
        print(f"{val}{row['policy']:<16} cost {row['mean_cost']:.4f} +- {row['std_cost']:.4f} "
              f"(n={row['n']})")


if __name__ == "__main__":
    sys.exit(main())
