"""Round loop and replication batches.

run() drives one policy against one instance for T rounds: forced
initialization for the first K rounds, then select/observe, drawing the
reward only for the chosen arm, in choice order, from the replication's
stream. Output is a pure function of (instance, policy, T, seed, flags).

run_batch() executes independent replications — serially or on a process
pool — and always collates results by replication index, so worker count
never changes the output.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .distributions import RngStream, derive_stream, sample
from .errors import HorizonTooShort
from .model import BanditInstance
from .oracle import RegretReport, penalized_regret
from .policies import Policy, init_state, make_policy


@dataclass(frozen=True)
class Trajectory:
    """Per-round record of one replication.

    max_deficits holds, for every arm, the running maximum of the
    fairness shortfall (tau_k * t - N_k(t))_+ over t = 1..T; it is always
    computed. deficit_trace is the full (T, K) shortfall matrix, kept
    only when tracing was requested.
    """

    choices: np.ndarray
    rewards: np.ndarray
    running_counts: np.ndarray
    max_deficits: np.ndarray
    deficit_trace: np.ndarray | None = None

    @property
    def total_reward(self) -> float:
        return float(self.rewards.sum())


def run(
    instance: BanditInstance,
    policy: str | Policy,
    T: int,
    stream: RngStream,
    trace_deficits: bool = False,
    *,
    penalty=None,
    alpha: float | None = None,
    eta0: float | None = None,
) -> Trajectory:
    """One replication of T rounds; deterministic given the stream."""
    K = instance.K
    if T < K:
        raise HorizonTooShort(f"horizon {T} is shorter than the number of arms {K}")
    pol = make_policy(policy)
    state = init_state(instance, pol, T, penalty=penalty, alpha=alpha, eta0=eta0)
    dists = [arm.dist for arm in instance.arms]
    taus = instance.taus

    choices = [0] * T
    rewards = [0.0] * T
    counts = state.counts
    max_def = [0.0] * K
    trace = np.zeros((T, K)) if trace_deficits else None
    tau_vec = np.asarray(taus) if trace_deficits else None
    rounds = np.arange(1, T + 1).reshape(-1, 1) if trace_deficits else None

    choose = pol.choose
    observe = pol.observe
    for n in range(1, T + 1):
        arm = n - 1 if n <= K else choose(state)
        # The shortfall of an arm peaks on the round just before each of
        # its pulls (and at T); checking here keeps max tracking O(1).
        d = taus[arm] * (n - 1) - counts[arm]
        if d > max_def[arm]:
            max_def[arm] = d
        r = sample(dists[arm], stream)
        observe(state, arm, r)
        choices[n - 1] = arm
        rewards[n - 1] = r
        assert state.n == n + 1 and sum(counts) == n, "count conservation broke"

    for k in range(K):
        d = taus[k] * T - counts[k]
        if d > max_def[k]:
            max_def[k] = d

    if trace is not None:
        # Reconstruct per-round counts from the choices, then shortfalls.
        onehot = np.zeros((T, K))
        onehot[np.arange(T), choices] = 1.0
        running = onehot.cumsum(axis=0)
        np.maximum(tau_vec * rounds - running, 0.0, out=trace)

    return Trajectory(
        choices=np.asarray(choices, dtype=np.int64),
        rewards=np.asarray(rewards),
        running_counts=np.asarray(counts, dtype=np.int64),
        max_deficits=np.asarray(max_def),
        deficit_trace=trace,
    )


@dataclass(frozen=True)
class BatchResult:
    """Replication batch, collated by replication index.

    counts and max_deficits are (R, K) matrices; the aggregate fields are
    arithmetic means and standard errors over replications.
    """

    reports: tuple[RegretReport, ...]
    counts: np.ndarray
    max_deficits: np.ndarray
    mean_regret: float
    se_regret: float
    mean_reward: float
    se_reward: float
    mean_unfairness: float
    se_unfairness: float

    @property
    def replications(self) -> int:
        return len(self.reports)


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    mean = float(values.mean())
    if values.size < 2:
        return mean, 0.0
    return mean, float(values.std(ddof=1) / np.sqrt(values.size))


def _replicate(args) -> tuple[RegretReport, np.ndarray, np.ndarray]:
    instance, policy_name, T, base_seed, replication, trace_deficits, knobs = args
    stream = derive_stream(base_seed, replication)
    traj = run(
        instance, policy_name, T, stream, trace_deficits=trace_deficits, **knobs
    )
    report = penalized_regret(
        instance,
        traj.running_counts,
        traj.total_reward,
        T,
        max_deficits=traj.max_deficits,
    )
    return report, traj.running_counts, traj.max_deficits


def run_batch(
    instance: BanditInstance,
    policy: str | Policy,
    T: int,
    base_seed: int,
    replications: int,
    *,
    workers: int = 1,
    trace_deficits: bool = False,
    penalty=None,
    alpha: float | None = None,
    eta0: float | None = None,
) -> BatchResult:
    """Replicated runs with streams derived from (base_seed, index).

    Execution order is a scheduling detail; results are collated by
    replication index, so any worker count produces the same batch.
    """
    if replications < 1:
        raise ValueError(f"need at least one replication, got {replications}")
    policy_name = make_policy(policy).name
    knobs = {"penalty": penalty, "alpha": alpha, "eta0": eta0}
    tasks = [
        (instance, policy_name, T, base_seed, r, trace_deficits, knobs)
        for r in range(replications)
    ]
    if workers > 1 and replications > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_replicate, tasks))
    else:
        results = [_replicate(t) for t in tasks]

    reports = tuple(res[0] for res in results)
    counts = np.stack([res[1] for res in results])
    max_deficits = np.stack([res[2] for res in results])
    regrets = np.asarray([rep.penalized_regret for rep in reports])
    rewards = np.asarray([rep.total_reward for rep in reports])
    unfairness = np.asarray([sum(rep.per_arm_unfairness) for rep in reports])
    mean_regret, se_regret = _mean_se(regrets)
    mean_reward, se_reward = _mean_se(rewards)
    mean_unf, se_unf = _mean_se(unfairness)
    return BatchResult(
        reports=reports,
        counts=counts,
        max_deficits=max_deficits,
        mean_regret=mean_regret,
        se_regret=se_regret,
        mean_reward=mean_reward,
        se_reward=se_reward,
        mean_unfairness=mean_unf,
        se_unfairness=se_unf,
    )
