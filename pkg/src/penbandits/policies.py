"""Decision rules behind one interface.

Five policies share the same driver contract: forced initialization for
rounds 1..K (round n pulls arm n-1), then a per-round score vector whose
argmax — ties broken by lowest arm id — is the pull. The policy objects
are stateless rule tables; all mutable data lives in PolicyState, owned
by a single replication.

Indices use the natural logarithm throughout. The exploration bonus at
round n is sqrt(2 ln n / N_k(n-1)); the fairness indicator compares the
count N_k(n-1) against tau_k * n for the current round n with a strict
'<'.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import log, sqrt

from .errors import DivisionByZeroCount
from .model import BanditInstance

POLICY_NAMES = ("ht-ucb", "soft-ucb", "ucb1", "lfg", "flearn")


@dataclass
class PolicyState:
    """Per-replication mutable state.

    n is the current round (1-based). counts and reward_sums hold
    N_k(n-1) and R_k(n-1); at the start of round n their sum is n-1.
    queues is the LFG virtual-queue vector, None for other policies.
    """

    n: int
    counts: list[int]
    reward_sums: list[float]
    tau: tuple[float, ...]
    penalty: tuple[float, ...]
    queues: list[float] | None = None
    alpha: float = 0.0
    eta0: float = 0.0
    weights: tuple[float, ...] | None = None

    @property
    def K(self) -> int:
        return len(self.counts)


@dataclass(frozen=True)
class PolicyDecision:
    arm: int
    index_values: tuple[float, ...] | None


def ht_ucb_index(k: int, state: PolicyState) -> float:
    """Hard-threshold index: mean estimate, plus the full penalty rate
    while the arm sits below its fairness level, plus the UCB bonus."""
    N = state.counts[k]
    if N == 0:
        raise DivisionByZeroCount(f"arm {k} has no pulls at round {state.n}")
    n = state.n
    value = state.reward_sums[k] / N + sqrt(2.0 * log(n) / N)
    if N < state.tau[k] * n:
        value += state.penalty[k]
    return value


def soft_ucb_index(k: int, state: PolicyState) -> float:
    """Soft-threshold ablation: the penalty enters scaled by the relative
    shortfall instead of jumping. Defined as 0 when tau_k = 0."""
    N = state.counts[k]
    if N == 0:
        raise DivisionByZeroCount(f"arm {k} has no pulls at round {state.n}")
    n = state.n
    value = state.reward_sums[k] / N + sqrt(2.0 * log(n) / N)
    level = state.tau[k] * n
    if level > 0.0:
        shortfall = level - N
        if shortfall > 0.0:
            value += state.penalty[k] * shortfall / level
    return value


def ucb1_index(k: int, state: PolicyState) -> float:
    """Classical UCB1 index (no fairness term)."""
    N = state.counts[k]
    if N == 0:
        raise DivisionByZeroCount(f"arm {k} has no pulls at round {state.n}")
    return state.reward_sums[k] / N + sqrt(2.0 * log(state.n) / N)


def _argmax(values) -> int:
    best = values[0]
    arg = 0
    for k in range(1, len(values)):
        v = values[k]
        if v > best:
            best = v
            arg = k
    return arg


class Policy:
    """Stateless rule table; subclasses define the per-round scores."""

    name: str = ""
    uses_queues = False

    def scores(self, state: PolicyState) -> list[float]:
        """Score vector whose argmax is this round's pull (n > K only)."""
        raise NotImplementedError

    def choose(self, state: PolicyState) -> int:
        if state.n <= state.K:
            return state.n - 1
        return _argmax(self.scores(state))

    def observe(self, state: PolicyState, arm: int, reward: float) -> None:
        state.counts[arm] += 1
        state.reward_sums[arm] += reward
        state.n += 1

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"


class HardThresholdUCB(Policy):
    name = "ht-ucb"

    def scores(self, state: PolicyState) -> list[float]:
        n = state.n
        two_ln_n = 2.0 * log(n)
        counts = state.counts
        sums = state.reward_sums
        tau = state.tau
        penalty = state.penalty
        out = [0.0] * len(counts)
        for k in range(len(counts)):
            N = counts[k]
            if N == 0:
                raise DivisionByZeroCount(f"arm {k} has no pulls at round {n}")
            v = sums[k] / N + sqrt(two_ln_n / N)
            if N < tau[k] * n:
                v += penalty[k]
            out[k] = v
        return out


class SoftThresholdUCB(Policy):
    name = "soft-ucb"

    def scores(self, state: PolicyState) -> list[float]:
        return [soft_ucb_index(k, state) for k in range(state.K)]


class ClassicalUCB1(Policy):
    name = "ucb1"

    def scores(self, state: PolicyState) -> list[float]:
        n = state.n
        two_ln_n = 2.0 * log(n)
        counts = state.counts
        sums = state.reward_sums
        out = [0.0] * len(counts)
        for k in range(len(counts)):
            N = counts[k]
            if N == 0:
                raise DivisionByZeroCount(f"arm {k} has no pulls at round {n}")
            out[k] = sums[k] / N + sqrt(two_ln_n / N)
        return out


class LFG(Policy):
    """Queue-based baseline: virtual fairness queues plus a capped UCB
    index, combined as Q_k + eta0 * w_k * min(ucb_k, 1)."""

    name = "lfg"
    uses_queues = True

    def scores(self, state: PolicyState) -> list[float]:
        n = state.n
        two_ln_n = 2.0 * log(n)
        counts = state.counts
        sums = state.reward_sums
        queues = state.queues
        weights = state.weights
        eta0 = state.eta0
        out = [0.0] * len(counts)
        for k in range(len(counts)):
            N = counts[k]
            if N == 0:
                raise DivisionByZeroCount(f"arm {k} has no pulls at round {n}")
            capped = min(sums[k] / N + sqrt(two_ln_n / N), 1.0)
            out[k] = queues[k] + eta0 * weights[k] * capped
        return out

    def observe(self, state: PolicyState, arm: int, reward: float) -> None:
        super().observe(state, arm, reward)
        queues = state.queues
        tau = state.tau
        for k in range(len(queues)):
            q = queues[k] + tau[k] - (1.0 if k == arm else 0.0)
            queues[k] = q if q > 0.0 else 0.0


class Flearn(Policy):
    """Deficit-first baseline: if any arm's fairness deficit
    tau_k*(n-1) - N_k(n-1) exceeds alpha (strict), pull the most
    deficient arm; otherwise fall back to UCB1."""

    name = "flearn"

    def scores(self, state: PolicyState) -> list[float]:
        n = state.n
        counts = state.counts
        tau = state.tau
        deficits = [tau[k] * (n - 1) - counts[k] for k in range(len(counts))]
        if max(deficits) > state.alpha:
            return deficits
        two_ln_n = 2.0 * log(n)
        sums = state.reward_sums
        out = [0.0] * len(counts)
        for k in range(len(counts)):
            N = counts[k]
            if N == 0:
                raise DivisionByZeroCount(f"arm {k} has no pulls at round {n}")
            out[k] = sums[k] / N + sqrt(two_ln_n / N)
        return out


_POLICIES = {
    cls.name: cls
    for cls in (HardThresholdUCB, SoftThresholdUCB, ClassicalUCB1, LFG, Flearn)
}


def make_policy(name: str | Policy) -> Policy:
    """Resolve a policy by its CLI name ('ht-ucb', 'soft-ucb', 'ucb1',
    'lfg', 'flearn'); a Policy instance passes through."""
    if isinstance(name, Policy):
        return name
    try:
        return _POLICIES[name]()
    except KeyError:
        raise ValueError(
            f"unknown policy {name!r}; choose from {', '.join(POLICY_NAMES)}"
        ) from None


def init_state(
    instance: BanditInstance,
    policy: Policy,
    T: int,
    *,
    penalty=None,
    alpha: float | None = None,
    eta0: float | None = None,
) -> PolicyState:
    """Fresh round-1 state for one replication.

    penalty overrides the instance's per-arm rates (scalar or sequence);
    alpha defaults to 0 (Flearn) and eta0 to sqrt(T) (LFG).
    """
    K = instance.K
    if penalty is None:
        pen = instance.penalties
    elif isinstance(penalty, (int, float)):
        pen = (float(penalty),) * K
    else:
        pen = tuple(float(a) for a in penalty)
        if len(pen) != K:
            raise ValueError(f"penalty override has length {len(pen)}, expected {K}")
    return PolicyState(
        n=1,
        counts=[0] * K,
        reward_sums=[0.0] * K,
        tau=instance.taus,
        penalty=pen,
        queues=[0.0] * K if policy.uses_queues else None,
        alpha=0.0 if alpha is None else float(alpha),
        eta0=sqrt(T) if eta0 is None else float(eta0),
        weights=(1.0,) * K if policy.uses_queues else None,
    )


def select_arm(policy: Policy, state: PolicyState, rng=None) -> PolicyDecision:
    """Public decision op: forced initialization through round K, then
    the policy's score argmax with lowest-id tie-breaking.

    rng is accepted for interface stability; no current policy draws
    randomness during selection (ties are deterministic).
    """
    if state.n <= state.K:
        return PolicyDecision(arm=state.n - 1, index_values=None)
    values = policy.scores(state)
    return PolicyDecision(arm=_argmax(values), index_values=tuple(values))


def observe(policy: Policy, state: PolicyState, arm: int, reward: float) -> PolicyState:
    """Public update op: record the pull, advance the round counter, and
    (LFG) refresh every virtual queue. Mutates and returns state."""
    policy.observe(state, arm, reward)
    return state
