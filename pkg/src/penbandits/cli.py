"""Command-line interface.

Subcommands: prophet, bounds, run, sweep, ingest-movielens, plot.
Instance configs are JSON or TOML files with the arms[] schema; reports
print as JSON on stdout. The default output directory comes from the
PENBANDITS_OUT environment variable.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import harness, plots
from .distributions import derive_stream
from .engine import run as run_rounds
from .errors import TiedSums
from .ingest import build_instance, parse_ratings
from .model import classify_arms, instance_to_config
from .oracle import (
    gap_dependent_bound,
    gap_independent_bound,
    maximal_deficit_coefficients,
    penalized_regret,
    prophet_allocation,
)
from .policies import POLICY_NAMES


def _print_json(payload) -> None:
    json.dump(payload, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def _cmd_prophet(args) -> int:
    instance = harness.load_instance_file(args.config)
    alloc = prophet_allocation(instance)
    cls = classify_arms(instance)
    _print_json(
        {
            "y": list(alloc.y),
            "l_star_rate": alloc.l_star_rate,
            "reference_opt_arm": alloc.reference_opt_arm,
            "mu_star": cls.mu_star,
            "gaps": list(cls.gaps),
            "opt": sorted(cls.opt),
            "cr": sorted(cls.cr),
            "non_cr": sorted(cls.non_cr),
        }
    )
    return 0


def _cmd_bounds(args) -> int:
    instance = harness.load_instance_file(args.config)
    dep = gap_dependent_bound(instance, args.T)
    indep = gap_independent_bound(instance, args.T, C=args.C)
    try:
        coeffs = {str(k): v for k, v in sorted(maximal_deficit_coefficients(instance).items())}
        tie_note = None
    except TiedSums as exc:
        coeffs = None
        tie_note = str(exc)
    _print_json(
        {
            "T": args.T,
            "gap_dependent": {"value": dep.value, "additive_term": dep.additive_term},
            "gap_independent": {"value": indep, "universal_constant": args.C},
            "max_deficit_coefficients": coeffs,
            "tie_note": tie_note,
        }
    )
    return 0


def _cmd_run(args) -> int:
    instance = harness.load_instance_file(args.config)
    stream = derive_stream(args.seed, 0)
    traj = run_rounds(
        instance, args.policy, args.T, stream, trace_deficits=args.trace_deficits
    )
    report = penalized_regret(
        instance,
        traj.running_counts,
        traj.total_reward,
        args.T,
        max_deficits=traj.max_deficits,
    )
    _print_json(
        {
            "policy": args.policy,
            "T": args.T,
            "seed": args.seed,
            "counts": [int(c) for c in traj.running_counts],
            "total_reward": report.total_reward,
            "realized_loss": report.realized_loss,
            "l_star": report.l_star,
            "penalized_regret": report.penalized_regret,
            "per_arm_unfairness": list(report.per_arm_unfairness),
            "max_deficit": list(report.max_deficit),
        }
    )
    return 0


def _cmd_sweep(args) -> int:
    overrides = {}
    for name in ("K", "tau", "case", "kind", "T", "replications", "min_count"):
        value = getattr(args, name)
        if value is not None:
            overrides[name] = value
    if args.ratings is not None:
        overrides["ratings"] = args.ratings
    if args.horizons is not None:
        overrides["horizons"] = [int(t) for t in args.horizons.split(",")]
    if args.policies is not None:
        overrides["policies"] = args.policies.split(",")
    if args.eta_points is not None:
        overrides["eta_grid"] = [i / args.eta_points for i in range(1, args.eta_points + 1)]
    config = harness.preset(
        args.setting,
        base_seed=args.seed,
        out_dir=args.out,
        trace_deficits=args.trace_deficits,
        **overrides,
    )
    manifest = harness.run_sweep(config, workers=args.workers)
    _print_json(manifest)
    return 0


def _cmd_ingest(args) -> int:
    records = parse_ratings(args.ratings)
    instance = build_instance(
        records,
        min_count=args.min_count,
        penalty=args.penalty,
        tau=args.tau,
        inclusive=args.inclusive,
    )
    payload = instance_to_config(instance)
    Path(args.out).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {instance.K} arms to {args.out}")
    return 0


def _cmd_plot(args) -> int:
    out = plots.emit_plot(args.csv, args.kind, args.out)
    print(f"wrote {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="penbandits",
        description="Penalized multi-armed bandit simulation and analysis",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prophet", help="closed-form optimal allocation for a config")
    p.add_argument("--config", required=True)
    p.set_defaults(fn=_cmd_prophet)

    p = sub.add_parser("bounds", help="regret-bound diagnostics for a config")
    p.add_argument("--config", required=True)
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--C", type=float, default=1.0)
    p.set_defaults(fn=_cmd_bounds)

    p = sub.add_parser("run", help="one replication of one policy")
    p.add_argument("--config", required=True)
    p.add_argument("--policy", required=True, choices=POLICY_NAMES)
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--trace-deficits", action="store_true")
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("sweep", help="run an experiment preset")
    p.add_argument("--setting", required=True, choices=harness.SETTINGS)
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--K", type=int, default=None)
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--case", type=int, default=None)
    p.add_argument("--kind", default=None)
    p.add_argument("--T", type=int, default=None)
    p.add_argument("--horizons", default=None, help="comma-separated T values")
    p.add_argument("--replications", type=int, default=None)
    p.add_argument("--policies", default=None, help="comma-separated policy names")
    p.add_argument("--eta-points", type=int, default=None, help="penalty-scale grid size")
    p.add_argument("--ratings", default=None)
    p.add_argument("--min-count", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--trace-deficits", action="store_true")
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("ingest-movielens", help="ratings file to instance config")
    p.add_argument("--ratings", required=True)
    p.add_argument("--min-count", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--penalty", type=float, default=0.5)
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--inclusive", action="store_true", help="filter with >= instead of >")
    p.set_defaults(fn=_cmd_ingest)

    p = sub.add_parser("plot", help="render a plot from a sweep CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--kind", required=True, choices=plots.PLOT_KINDS)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_plot)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
