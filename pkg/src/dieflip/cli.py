"""Command-line front end.

Subcommands:

* ``collect`` — run the random policy on the simulator and write a trial log
* ``select``  — cross-validated (radius, w) grid search over a trial log
* ``eval``    — run a policy campaign and write a campaign report file
* ``report``  — turn campaign report files into delimited exports and figures
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .configio import ConfigError, RunConfig, read_config
from .core import GoalSpec
from .harness import (
    face_change_eval,
    read_campaign,
    run_campaign,
    write_campaign,
)
from .neighbors import NeighborModel, ScalarizedMetric
from .plots import render_curves, render_histogram, render_scatter
from .policy import GreedyPolicy, Mpc2Policy, RandomPolicy
from .selection import select_hyperparams, write_selection_report
from .simulator import PlateSimulator, default_config
from .trials import collect, load_trials, save_trials


class CliError(Exception):
    """User-facing failure with a distinct message."""


def _load_setup(config_path: str | None):
    if config_path is None:
        return default_config(), RunConfig()
    try:
        return read_config(config_path)
    except OSError as exc:
        raise CliError(f"cannot read config file: {exc}") from exc
    except ConfigError as exc:
        raise CliError(f"invalid config: {exc}") from exc


def _load_log(path: str | None, needed_by: str | None = None):
    if path is None:
        if needed_by is not None:
            raise CliError(
                f"missing model data: the {needed_by} policy requires --log <trial log>"
            )
        return None
    try:
        return load_trials(path)
    except OSError as exc:
        raise CliError(f"cannot read trial log: {exc}") from exc
    except ValueError as exc:
        raise CliError(f"malformed trial log: {exc}") from exc


def _cmd_collect(args) -> int:
    plate, run = _load_setup(args.config)
    seed = run.seed if args.seed is None else args.seed
    n = run.n_trials if args.n is None else args.n
    dataset = collect(plate, n, seed)
    save_trials(dataset, args.out)
    invalid = sum(1 for t in dataset if not t.valid)
    print(f"collected {len(dataset)} trials ({invalid} invalid) -> {args.out}")
    return 0


def _parse_grid(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise CliError(f"bad grid {text!r}: {exc}") from exc


def _cmd_select(args) -> int:
    plate, run = _load_setup(args.config)
    dataset = _load_log(args.log)
    if dataset is None:
        raise CliError("missing model data: select requires --log <trial log>")
    goal = GoalSpec.any_other() if args.goal == "any-other" else GoalSpec.target()
    result = select_hyperparams(
        dataset,
        goal,
        _parse_grid(args.r_grid),
        _parse_grid(args.w_grid),
        k=args.folds,
        seed=run.seed if args.seed is None else args.seed,
        angle_mode=run.angle_mode,
        min_support=run.min_support,
    )
    write_selection_report(result, args.out)
    mean = result.mean_by_cell[(result.radius, result.w)]
    print(f"selected r={result.radius} w={result.w} (mean AUROC {mean:.3f}) -> {args.out}")
    return 0


def _build_policy(args, plate, run, rng_unused=None):
    name = args.policy
    if name == "random":
        return RandomPolicy()
    dataset = _load_log(args.log, needed_by=name)
    radius = run.radius if args.r is None else args.r
    w = run.w if args.w is None else args.w
    metric = ScalarizedMetric(w, run.angle_mode)
    model = NeighborModel.build(dataset, metric, radius, run.min_support)
    if name == "greedy":
        return GreedyPolicy(model)
    return Mpc2Policy(model, args.rollout_cap if args.rollout_cap else run.rollout_cap)


def _cmd_eval(args) -> int:
    plate, run = _load_setup(args.config)
    policy = _build_policy(args, plate, run)
    sim = PlateSimulator(plate)
    seed = run.seed if args.seed is None else args.seed
    task = run.task if args.task is None else args.task
    n = run.n_goals if args.n is None else args.n
    if task == "target":
        report = run_campaign(sim, policy, n_goals=n, seed=seed,
                              max_impulses=args.max_impulses or run.max_impulses)
    else:
        report = face_change_eval(sim, policy, n_impulses=n, seed=seed)
    out = args.out or f"campaign_{policy.name}.tsv"
    write_campaign(report, out, task=task)
    curve = report.cumulative_success()
    print(
        f"{policy.name} on {task}: first-impulse {curve[0]:.3f}, "
        f"within-{report.max_impulses} {curve[-1]:.3f} -> {out}"
    )
    return 0


def _cmd_report(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    summaries = []
    for path in args.campaigns:
        try:
            summaries.append(read_campaign(path))
        except OSError as exc:
            raise CliError(f"cannot read campaign file: {exc}") from exc
        except ValueError as exc:
            raise CliError(f"malformed campaign file: {exc}") from exc

    labels = []
    for s in summaries:
        label = s.policy_name
        while label in labels:
            label += "'"
        labels.append(label)

    max_len = max(len(s.cumulative_success) for s in summaries)
    with open(out_dir / "curve.tsv", "w", encoding="utf-8") as fh:
        fh.write("impulse_count\t" + "\t".join(labels) + "\n")
        for i in range(max_len):
            row = [str(i + 1)]
            for s in summaries:
                c = s.cumulative_success
                row.append(repr(float(c[min(i, len(c) - 1)])))
            fh.write("\t".join(row) + "\n")

    first = summaries[0]
    with open(out_dir / "histogram.tsv", "w", encoding="utf-8") as fh:
        fh.write("solenoid\tfired\tsucceeded\n")
        for sol in range(7):
            fh.write(f"{sol}\t{first.fired[sol]}\t{first.succeeded[sol]}\n")
    with open(out_dir / "scatter.tsv", "w", encoding="utf-8") as fh:
        fh.write("x\ty\tsolenoid\n")
        for x, y, sol in first.scatter:
            fh.write(f"{x!r}\t{y!r}\t{sol}\n")
    with open(out_dir / "summary.tsv", "w", encoding="utf-8") as fh:
        fh.write("policy\ttask\tn_goals\tfirst_impulse\twithin_max\n")
        for label, s in zip(labels, summaries):
            c = s.cumulative_success
            fh.write(
                f"{label}\t{s.task}\t{s.n_goals}\t{float(c[0])!r}\t{float(c[-1])!r}\n"
            )

    render_curves(
        {label: s.cumulative_success for label, s in zip(labels, summaries)},
        out_dir / "curve.png",
    )
    render_histogram(first.fired, first.succeeded, out_dir / "histogram.png",
                     title=f"Impulses per solenoid ({labels[0]})")
    render_scatter(first.scatter, out_dir / "scatter.png",
                   title=f"Decisions ({labels[0]})")
    print(f"wrote curve/histogram/scatter/summary exports and figures -> {out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dieflip",
        description="Learning controller for flipping a die with an impulse plate",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("collect", help="log random-policy trials from the simulator")
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--n", type=int, help="number of trials")
    p.add_argument("--seed", type=int, help="random seed")
    p.add_argument("--out", required=True, help="output trial log path")
    p.set_defaults(func=_cmd_collect)

    p = sub.add_parser("select", help="cross-validated (r, w) grid search")
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--log", required=True, help="trial log to train/validate on")
    p.add_argument("--r-grid", default="1,2,3,5,8,13", help="comma-separated radii (mm)")
    p.add_argument("--w-grid", default="0,1,5,10", help="comma-separated w values (mm/deg)")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--seed", type=int)
    p.add_argument("--goal", choices=("any-other", "target"), default="any-other")
    p.add_argument("--out", required=True, help="output selection report path")
    p.set_defaults(func=_cmd_select)

    p = sub.add_parser("eval", help="run a policy campaign on the simulator")
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--log", help="trial log backing the learned model")
    p.add_argument("--policy", choices=("random", "greedy", "mpc2"), default="greedy")
    p.add_argument("--task", choices=("target", "face-change"))
    p.add_argument("--n", type=int, help="number of goals (or impulses for face-change)")
    p.add_argument("--seed", type=int)
    p.add_argument("--r", type=float, help="neighborhood radius (mm)")
    p.add_argument("--w", type=float, help="angle weight (mm/deg)")
    p.add_argument("--max-impulses", type=int)
    p.add_argument("--rollout-cap", type=int)
    p.add_argument("--out", help="output campaign report path")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("report", help="export curves, histograms, scatter and figures")
    p.add_argument("campaigns", nargs="+", help="campaign report files from eval")
    p.add_argument("--out-dir", default="reports", help="directory for exports")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
