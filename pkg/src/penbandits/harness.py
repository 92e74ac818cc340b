"""Experiment presets, sweep drivers, and file output.

A preset materializes one experiment configuration: the instance (inline,
randomly generated, or ingested from a ratings file), the policies, the
horizon grid, and — for tradeoff studies — the penalty-scale grid eta.
Under an eta sweep the proposed policies run with all penalty rates set
to eta, Flearn runs with alpha = (1 - eta) * tau_1 * T, and LFG with
eta0 = (1 - eta) * T, so the three tuning axes are comparable.

Sweeps write two CSVs (per-replication run metrics and per-arm metrics)
plus a JSON manifest. Every row carries the config hash, base seed, and
replication index; floats are written with 17 significant digits; rewrites
with the same config and seed are byte-identical.
"""
from __future__ import annotations

import hashlib
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .distributions import derive_named_stream
from .engine import run_batch
from .errors import UnknownSetting
from .ingest import build_instance, parse_ratings
from .model import (
    ArmSpec,
    BanditInstance,
    Bernoulli,
    Beta,
    Gaussian,
    instance_from_config,
    instance_to_config,
    validate_instance,
)

#: Default penalty-scale grid: 21 points in (0, 1].
DEFAULT_ETA_GRID = tuple(i / 21 for i in range(1, 22))

DEFAULT_HORIZONS = (500, 1000, 2000, 4000, 8000, 16000)

DEFAULT_REPLICATIONS = 50

SETTINGS = ("1", "2a", "2b", "3", "4a", "4b", "5")

#: Environment variable naming the default output directory.
OUT_DIR_ENV = "PENBANDITS_OUT"

RUNS_COLUMNS = (
    "config_hash",
    "label",
    "policy",
    "K",
    "tau_total",
    "T",
    "eta",
    "replication",
    "base_seed",
    "penalized_regret",
    "total_reward",
    "total_unfairness",
    "realized_loss",
    "l_star",
)

ARMS_COLUMNS = (
    "config_hash",
    "label",
    "policy",
    "T",
    "eta",
    "arm",
    "mu",
    "tau",
    "penalty",
    "replication",
    "base_seed",
    "count",
    "final_unfairness",
    "max_deficit",
)


@dataclass
class ExperimentConfig:
    """One fully materialized experiment."""

    label: str
    instance: BanditInstance | None
    policies: list[str]
    horizons: list[int]
    replications: int
    base_seed: int
    eta_grid: list[float] | None = None
    alpha: float | None = None
    eta0: float | None = None
    trace_deficits: bool = False
    out_dir: Path | None = None
    ingest_source: dict | None = None
    metadata: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if not self.policies:
            raise ValueError("policy list is empty")
        if self.eta_grid is not None:
            for eta in self.eta_grid:
                if not 0.0 < eta <= 1.0:
                    raise ValueError(f"eta grid values must lie in (0, 1], got {eta}")
        if self.instance is not None:
            for T in self.horizons:
                if T < self.instance.K:
                    raise ValueError(f"horizon {T} shorter than K={self.instance.K}")

    def resolve_instance(self) -> BanditInstance:
        """The instance to run; ingests the ratings file when needed."""
        if self.instance is not None:
            return self.instance
        src = self.ingest_source
        if src is None:
            raise ValueError("config has neither an instance nor an ingest source")
        records = parse_ratings(src["ratings"])
        self.instance = build_instance(
            records,
            min_count=src["min_count"],
            penalty=src.get("penalty", 0.5),
            tau=src.get("tau", 0.5),
            inclusive=src.get("inclusive", False),
        )
        return self.instance

    def to_dict(self) -> dict:
        """Canonical identity of the experiment (output paths excluded)."""
        return {
            "label": self.label,
            "instance": None if self.instance is None else instance_to_config(self.instance),
            "policies": list(self.policies),
            "horizons": list(self.horizons),
            "replications": self.replications,
            "base_seed": self.base_seed,
            "eta_grid": None if self.eta_grid is None else list(self.eta_grid),
            "alpha": self.alpha,
            "eta0": self.eta0,
            "trace_deficits": self.trace_deficits,
            "ingest_source": None
            if self.ingest_source is None
            else {k: str(v) if isinstance(v, Path) else v for k, v in self.ingest_source.items()},
        }


def config_hash(config: ExperimentConfig) -> str:
    """Stable 12-hex-digit digest of the experiment identity."""
    canonical = json.dumps(config.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:12]


def load_instance_file(path) -> BanditInstance:
    """Instance config from a JSON or TOML file.

    Schema: arms[].mu, arms[].tau, arms[].penalty, arms[].dist.kind,
    arms[].dist.params (see model.instance_from_config).
    """
    path = Path(path)
    raw = path.read_bytes()
    if path.suffix.lower() == ".toml":
        if sys.version_info >= (3, 11):
            import tomllib
        else:
            import tomli as tomllib
        data = tomllib.loads(raw.decode())
    else:
        data = json.loads(raw.decode())
    return instance_from_config(data)


def _random_means(K: int, base_seed: int) -> list[float]:
    stream = derive_named_stream(base_seed, "mean-vector")
    return [float(stream.uniform()) for _ in range(K)]


def _gaussian_arms(mus, taus, penalties) -> BanditInstance:
    K = len(mus)
    return validate_instance(
        [
            ArmSpec(k, mus[k], taus[k], penalties[k], Gaussian(mus[k], 1.0 / K**2))
            for k in range(K)
        ]
    )


def _reward_dist(kind: str, mu: float, K: int):
    if kind == "gaussian":
        return Gaussian(mu, 1.0 / K**2)
    if kind == "beta":
        return Beta(mu, 1.0 - mu)
    if kind == "bernoulli":
        return Bernoulli(mu)
    raise UnknownSetting(f"unknown reward kind {kind!r}; pick gaussian, beta, or bernoulli")


SETTING_2A_MU = (0.9, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1)
SETTING_2B_MU = (0.95, 0.7, 0.65, 0.6, 0.2, 0.15, 0.1, 0.05)

SETTING_4A = {
    1: ((0.9, 0.8, 0.7, 0.6, 0.6, 0.4, 0.3, 0.2, 0.1), 0.45),
    2: ((0.95, 0.8, 0.7, 0.6, 0.6, 0.4, 0.3, 0.2, 0.1), 0.41),
    3: ((0.9, 0.8, 0.7, 0.6, 0.6, 0.425, 0.4, 0.375, 0.35), 0.45),
}

SETTING_4B = {
    1: ((0.9, 0.86, 0.84, 0.82, 0.6, 0.4, 0.3, 0.2, 0.1), 0.45),
    2: ((0.9, 0.85, 0.84, 0.83, 0.82, 0.4, 0.3, 0.2, 0.1), 0.45),
    3: ((0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1), 0.45),
}

_BASELINE_POLICIES = ["ht-ucb", "lfg", "flearn"]


def preset(setting, **overrides) -> ExperimentConfig:
    """Materialize one of the built-in experiment parameterizations.

    Accepted overrides vary by setting: K, tau, case, kind, T, horizons,
    replications, base_seed, policies, eta_grid, ratings, min_count,
    out_dir, trace_deficits.
    """
    setting = str(setting)
    base_seed = int(overrides.pop("base_seed", 42))
    out_dir = overrides.pop("out_dir", None)
    policies = overrides.pop("policies", None)
    replications = int(overrides.pop("replications", DEFAULT_REPLICATIONS))
    trace_deficits = bool(overrides.pop("trace_deficits", False))

    if setting == "1":
        K = int(overrides.pop("K", 5))
        tau_total = float(overrides.pop("tau", 0.2))
        horizons = list(overrides.pop("horizons", DEFAULT_HORIZONS))
        _reject_extras(setting, overrides)
        mus = _random_means(K, base_seed)
        penalty = (max(mus) - min(mus)) / 2.0
        instance = _gaussian_arms(mus, [tau_total / K] * K, [penalty] * K)
        return ExperimentConfig(
            label=f"setting1-K{K}-tau{tau_total}",
            instance=instance,
            policies=list(policies or _BASELINE_POLICIES),
            horizons=horizons,
            replications=replications,
            base_seed=base_seed,
            alpha=0.0,
            eta0=None,
            out_dir=out_dir,
            metadata={"realized_mu": mus, "penalty_rate": penalty},
        )

    if setting in ("2a", "2b"):
        T = int(overrides.pop("T", 10000))
        eta_grid = list(overrides.pop("eta_grid", DEFAULT_ETA_GRID))
        _reject_extras(setting, overrides)
        if setting == "2a":
            mus = SETTING_2A_MU
            taus = [1.0 / 16.0] * 8
        else:
            mus = SETTING_2B_MU
            taus = [0.8 / 8.0] * 4 + [0.4 * 0.8 / 8.0] * 4
        instance = _gaussian_arms(list(mus), taus, [0.5] * 8)
        return ExperimentConfig(
            label=f"setting{setting}",
            instance=instance,
            policies=list(policies or _BASELINE_POLICIES),
            horizons=[T],
            replications=replications,
            base_seed=base_seed,
            eta_grid=eta_grid,
            out_dir=out_dir,
        )

    if setting == "3":
        ratings = overrides.pop("ratings", None)
        if ratings is None:
            raise UnknownSetting("setting 3 needs ratings=<path to ratings.dat>")
        min_count = int(overrides.pop("min_count", 2500))
        T = int(overrides.pop("T", 10000))
        tau_total = float(overrides.pop("tau", 0.5))
        eta_grid = list(overrides.pop("eta_grid", DEFAULT_ETA_GRID))
        inclusive = bool(overrides.pop("inclusive", False))
        _reject_extras(setting, overrides)
        return ExperimentConfig(
            label=f"setting3-m{min_count}",
            instance=None,
            policies=list(policies or _BASELINE_POLICIES),
            horizons=[T],
            replications=replications,
            base_seed=base_seed,
            eta_grid=eta_grid,
            out_dir=out_dir,
            ingest_source={
                "ratings": str(ratings),
                "min_count": min_count,
                "penalty": 0.5,
                "tau": tau_total,
                "inclusive": inclusive,
            },
        )

    if setting in ("4a", "4b"):
        case = int(overrides.pop("case", 1))
        T = int(overrides.pop("T", 20000))
        _reject_extras(setting, overrides)
        table = SETTING_4A if setting == "4a" else SETTING_4B
        if case not in table:
            raise UnknownSetting(f"setting {setting} has cases 1-3, got {case}")
        mus, penalty = table[case]
        instance = _gaussian_arms(list(mus), [1.0 / 20.0] * 9, [penalty] * 9)
        return ExperimentConfig(
            label=f"setting{setting}-case{case}",
            instance=instance,
            policies=list(policies or ["ht-ucb"]),
            horizons=[T],
            replications=replications,
            base_seed=base_seed,
            alpha=0.0,
            eta0=None,
            out_dir=out_dir,
        )

    if setting == "5":
        K = int(overrides.pop("K", 5))
        tau_total = float(overrides.pop("tau", 0.2))
        kind = str(overrides.pop("kind", "gaussian"))
        T = int(overrides.pop("T", 10000))
        eta_grid = list(overrides.pop("eta_grid", DEFAULT_ETA_GRID))
        _reject_extras(setting, overrides)
        mus = _random_means(K, base_seed)
        taus = [tau_total / K] * K
        instance = validate_instance(
            [
                ArmSpec(k, mus[k], taus[k], 0.5, _reward_dist(kind, mus[k], K))
                for k in range(K)
            ]
        )
        return ExperimentConfig(
            label=f"setting5-K{K}-tau{tau_total}-{kind}",
            instance=instance,
            policies=list(policies or _BASELINE_POLICIES),
            horizons=[T],
            replications=replications,
            base_seed=base_seed,
            eta_grid=eta_grid,
            out_dir=out_dir,
            metadata={"realized_mu": mus, "reward_kind": kind},
        )

    raise UnknownSetting(f"unknown setting {setting!r}; choose from {', '.join(SETTINGS)}")


def _reject_extras(setting: str, overrides: dict) -> None:
    if overrides:
        raise UnknownSetting(
            f"setting {setting} does not accept overrides: {', '.join(sorted(overrides))}"
        )


def _with_penalty(instance: BanditInstance, penalty: float) -> BanditInstance:
    """Copy of the instance with every penalty rate replaced."""
    return validate_instance(
        [
            ArmSpec(a.id, a.mu, a.tau, float(penalty), a.dist)
            for a in instance.arms
        ]
    )


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _write_atomic(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + f".tmp-{os.getpid()}")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def default_out_dir() -> Path:
    return Path(os.environ.get(OUT_DIR_ENV, "penbandits-out"))


def run_sweep(config: ExperimentConfig, workers: int = 1) -> dict:
    """Run every (policy, T, eta) cell and write runs.csv, arms.csv, and
    manifest.json into the config's output directory.

    Returns the manifest. Partially written outputs are removed when a
    cell fails.
    """
    config.validate()
    instance = config.resolve_instance()
    config.validate()
    out_dir = Path(config.out_dir) if config.out_dir is not None else default_out_dir()
    out_dir.mkdir(parents=True, exist_ok=True)
    digest = config_hash(config)

    eta_cells = config.eta_grid if config.eta_grid is not None else [None]
    runs_rows: list[tuple] = []
    arms_rows: list[tuple] = []
    written: list[Path] = []
    try:
        for T in config.horizons:
            for eta in eta_cells:
                if eta is None:
                    cell_instance = instance
                    knobs_by_policy = {
                        "flearn": {"alpha": config.alpha},
                        "lfg": {"eta0": config.eta0},
                    }
                else:
                    cell_instance = _with_penalty(instance, eta)
                    knobs_by_policy = {
                        "flearn": {"alpha": (1.0 - eta) * instance.arms[0].tau * T},
                        "lfg": {"eta0": (1.0 - eta) * T},
                    }
                for policy in config.policies:
                    batch = run_batch(
                        cell_instance,
                        policy,
                        T,
                        config.base_seed,
                        config.replications,
                        workers=workers,
                        trace_deficits=config.trace_deficits,
                        **knobs_by_policy.get(policy, {}),
                    )
                    tau_total = math.fsum(cell_instance.taus)
                    for r, report in enumerate(batch.reports):
                        runs_rows.append(
                            (
                                digest,
                                config.label,
                                policy,
                                cell_instance.K,
                                tau_total,
                                T,
                                eta,
                                r,
                                config.base_seed,
                                report.penalized_regret,
                                report.total_reward,
                                math.fsum(report.per_arm_unfairness),
                                report.realized_loss,
                                report.l_star,
                            )
                        )
                        for k, arm in enumerate(cell_instance.arms):
                            arms_rows.append(
                                (
                                    digest,
                                    config.label,
                                    policy,
                                    T,
                                    eta,
                                    k,
                                    arm.mu,
                                    arm.tau,
                                    arm.penalty,
                                    r,
                                    config.base_seed,
                                    int(batch.counts[r, k]),
                                    report.per_arm_unfairness[k],
                                    float(batch.max_deficits[r, k]),
                                )
                            )

        runs_path = out_dir / f"runs-{config.label}.csv"
        arms_path = out_dir / f"arms-{config.label}.csv"
        manifest_path = out_dir / f"manifest-{config.label}.json"
        _write_atomic(runs_path, _csv_text(RUNS_COLUMNS, runs_rows))
        written.append(runs_path)
        _write_atomic(arms_path, _csv_text(ARMS_COLUMNS, arms_rows))
        written.append(arms_path)
        manifest = {
            "config_hash": digest,
            "config": config.to_dict(),
            "metadata": config.metadata,
            "files": [runs_path.name, arms_path.name],
        }
        _write_atomic(
            manifest_path,
            json.dumps(manifest, indent=2, sort_keys=True) + "\n",
        )
        written.append(manifest_path)
        return manifest
    except Exception:
        for path in written:
            path.unlink(missing_ok=True)
        raise


def _csv_text(columns, rows) -> str:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"
