"""Static plots from sweep CSVs.

Four kinds, matching the sweep schemas: regret growth against the
horizon, per-arm unfairness paths over the penalty-scale grid, the
reward/unfairness tradeoff, and final pull counts against the inverse
squared gaps with the fairness level drawn as a horizontal line.

Output is deterministic: the Agg backend, a fixed SVG hash salt, and
suppressed date metadata.
"""
from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path
from statistics import mean

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .errors import SchemaMismatch

PLOT_KINDS = (
    "regret-vs-T",
    "unfairness-path",
    "reward-vs-unfairness",
    "count-vs-inverse-gap",
)

_REQUIRED = {
    "regret-vs-T": {"policy", "T", "replication", "penalized_regret"},
    "unfairness-path": {"policy", "eta", "arm", "replication", "final_unfairness"},
    "reward-vs-unfairness": {"policy", "eta", "replication", "total_reward", "total_unfairness"},
    "count-vs-inverse-gap": {"policy", "T", "arm", "mu", "tau", "penalty", "replication", "count"},
}

plt.rcParams["svg.hashsalt"] = "penbandits"


def _read_rows(csv_path) -> list[dict]:
    with open(csv_path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _check_schema(rows: list[dict], kind: str) -> None:
    required = _REQUIRED[kind]
    have = set(rows[0].keys()) if rows else set()
    missing = required - have
    if missing:
        raise SchemaMismatch(
            f"{kind} needs columns {sorted(required)}; missing {sorted(missing)}"
        )


def _save(fig, out_path) -> None:
    out_path = Path(out_path)
    metadata = {}
    suffix = out_path.suffix.lower()
    if suffix == ".svg":
        metadata = {"Date": None}
    elif suffix == ".pdf":
        metadata = {"CreationDate": None}
    fig.savefig(out_path, metadata=metadata)
    plt.close(fig)


def emit_plot(csv_path, kind: str, out_path) -> Path:
    """Render one plot kind from a sweep CSV to a graphics file."""
    if kind not in PLOT_KINDS:
        raise SchemaMismatch(f"unknown plot kind {kind!r}; choose from {PLOT_KINDS}")
    rows = _read_rows(csv_path)
    _check_schema(rows, kind)
    try:
        fig = _RENDERERS[kind](rows)
    except ValueError as exc:
        raise SchemaMismatch(f"{kind}: malformed column values ({exc})") from exc
    _save(fig, out_path)
    return Path(out_path)


def _plot_regret_vs_t(rows):
    by_cell = defaultdict(list)
    for row in rows:
        by_cell[(row["policy"], int(row["T"]))].append(float(row["penalized_regret"]))
    policies = sorted({p for p, _ in by_cell})
    fig, ax = plt.subplots(figsize=(6, 4))
    for policy in policies:
        ts = sorted(t for p, t in by_cell if p == policy)
        ys = [mean(by_cell[(policy, t)]) for t in ts]
        ax.plot(ts, ys, marker="o", label=policy)
    ax.set_xlabel("horizon T")
    ax.set_ylabel("mean penalized regret")
    ax.set_xscale("log")
    ax.legend()
    fig.tight_layout()
    return fig


def _plot_unfairness_path(rows):
    by_cell = defaultdict(list)
    for row in rows:
        by_cell[(row["policy"], float(row["eta"]), int(row["arm"]))].append(
            float(row["final_unfairness"])
        )
    policies = sorted({p for p, _, _ in by_cell})
    fig, axes = plt.subplots(1, len(policies), figsize=(4 * len(policies), 3.5), squeeze=False)
    for ax, policy in zip(axes[0], policies):
        arms = sorted({a for p, _, a in by_cell if p == policy})
        for arm in arms:
            etas = sorted(e for p, e, a in by_cell if p == policy and a == arm)
            ys = [mean(by_cell[(policy, e, arm)]) for e in etas]
            ax.plot(etas, ys, label=f"arm {arm}")
        ax.set_title(policy)
        ax.set_xlabel("penalty scale")
        ax.set_ylabel("final unfairness")
    axes[0][-1].legend(fontsize="x-small")
    fig.tight_layout()
    return fig


def _plot_reward_vs_unfairness(rows):
    by_cell = defaultdict(lambda: ([], []))
    for row in rows:
        rewards, unfair = by_cell[(row["policy"], float(row["eta"]))]
        rewards.append(float(row["total_reward"]))
        unfair.append(float(row["total_unfairness"]))
    policies = sorted({p for p, _ in by_cell})
    fig, ax = plt.subplots(figsize=(6, 4))
    for policy in policies:
        etas = sorted(e for p, e in by_cell if p == policy)
        xs = [mean(by_cell[(policy, e)][1]) for e in etas]
        ys = [mean(by_cell[(policy, e)][0]) for e in etas]
        ax.plot(xs, ys, marker="o", label=policy)
    ax.set_xlabel("total unfairness")
    ax.set_ylabel("total reward")
    ax.legend()
    fig.tight_layout()
    return fig


def _plot_count_vs_inverse_gap(rows):
    by_arm = defaultdict(list)
    arm_info = {}
    for row in rows:
        key = (row["policy"], int(row["T"]), row["eta"], int(row["arm"]))
        by_arm[key].append(float(row["count"]))
        arm_info[key] = (float(row["mu"]), float(row["tau"]), float(row["penalty"]))
    groups = sorted({key[:3] for key in by_arm})
    fig, axes = plt.subplots(1, 2, figsize=(9, 4))
    for group in groups:
        policy, T, eta = group
        arms = sorted(k[3] for k in by_arm if k[:3] == group)
        mu_star = max(arm_info[group + (a,)][0] for a in arms)
        fairness_levels = []
        noncr_x, noncr_y, cr_x, cr_y = [], [], [], []
        for a in arms:
            mu, tau, penalty = arm_info[group + (a,)]
            gap = mu_star - mu
            n_mean = mean(by_arm[group + (a,)])
            fairness_levels.append(tau * T)
            if gap > penalty:
                noncr_x.append(1.0 / (gap - penalty) ** 2)
                noncr_y.append(n_mean)
            elif gap > 0.0:
                cr_x.append(1.0 / gap**2)
                cr_y.append(n_mean)
        label = policy if eta in ("", None) else f"{policy} eta={eta}"
        if noncr_x:
            axes[0].plot(noncr_x, noncr_y, "o", label=label)
        if cr_x:
            axes[1].plot(cr_x, cr_y, "o", label=label)
        level = mean(fairness_levels)
        for ax in axes:
            ax.axhline(level, color="tab:blue", linewidth=1)
    axes[0].set_xlabel("1 / (gap - penalty)^2")
    axes[0].set_ylabel("mean final count")
    axes[0].set_title("non-critical arms")
    axes[1].set_xlabel("1 / gap^2")
    axes[1].set_ylabel("mean final count")
    axes[1].set_title("critical arms")
    for ax in axes:
        if ax.get_legend_handles_labels()[0]:
            ax.legend(fontsize="x-small")
    fig.tight_layout()
    return fig


_RENDERERS = {
    "regret-vs-T": _plot_regret_vs_t,
    "unfairness-path": _plot_unfairness_path,
    "reward-vs-unfairness": _plot_reward_vs_unfairness,
    "count-vs-inverse-gap": _plot_count_vs_inverse_gap,
}
