"""Closed-form analytics: prophet benchmark, penalized loss and regret,
theory diagnostics, and a brute-force verification oracle.

Everything here evaluates against the true arm means of the instance (the
analyst's view), never against policy estimates. All functions are pure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CountMismatch, TiedSums, TooLarge
from .model import BanditInstance, classify_arms

#: Two arms whose mu + penalty differ by no more than this are ties.
TIE_TOL = 1e-12


@dataclass(frozen=True)
class ProphetAllocation:
    """Optimal real-valued pull fractions for a known-means planner.

    The reference optimal arm absorbs all slack; critical and surplus
    optimal arms sit exactly at their fairness fractions; non-critical
    arms are abandoned.
    """

    y: tuple[float, ...]
    l_star_rate: float
    reference_opt_arm: int


@dataclass(frozen=True)
class RegretReport:
    """Realized penalized loss of one run against the prophet optimum."""

    total_reward: float
    realized_loss: float
    l_star: float
    penalized_regret: float
    per_arm_unfairness: tuple[float, ...]
    max_deficit: tuple[float, ...] | None = None


@dataclass(frozen=True)
class GapDependentBound:
    """Leading value of the gap-dependent regret bound; the unquantified
    O(K) remainder is reported separately, never folded in."""

    value: float
    additive_term: float


def prophet_allocation(instance: BanditInstance) -> ProphetAllocation:
    """Optimal fractions and the per-round optimal loss rate.

    The reference optimal arm is the lowest-id optimal arm, making the
    allocation deterministic.
    """
    cls = classify_arms(instance)
    k_star = min(cls.opt)
    taus = instance.taus
    y = [0.0] * instance.K
    held = 0.0
    for k in sorted(cls.cr | (cls.opt - {k_star})):
        y[k] = taus[k]
        held += taus[k]
    y[k_star] = 1.0 - held
    rate = math.fsum(
        min(cls.gaps[k], instance.arms[k].penalty) * taus[k] for k in range(instance.K)
    )
    return ProphetAllocation(y=tuple(y), l_star_rate=rate, reference_opt_arm=k_star)


def l_star(instance: BanditInstance, T: int) -> float:
    """Minimum achievable penalized loss over real-valued allocations."""
    if T < 1:
        raise ValueError(f"horizon must be >= 1, got {T}")
    return T * prophet_allocation(instance).l_star_rate


def realized_loss(instance: BanditInstance, counts, T: int) -> float:
    """Penalized loss of a realized count vector: gap cost of every pull
    plus penalty-rate charges on fairness shortfalls at the horizon."""
    cls = classify_arms(instance)
    terms = []
    for k, arm in enumerate(instance.arms):
        shortfall = arm.tau * T - counts[k]
        terms.append(cls.gaps[k] * counts[k] + arm.penalty * (shortfall if shortfall > 0.0 else 0.0))
    return math.fsum(terms)


def penalized_regret(
    instance: BanditInstance,
    counts,
    total_reward: float,
    T: int,
    deficit_history: np.ndarray | None = None,
    max_deficits=None,
) -> RegretReport:
    """Score one finished run against the prophet optimum.

    counts must sum to T (CountMismatch otherwise). deficit_history, when
    given, is the (T, K) per-round shortfall trace; its per-arm maxima
    land in the report. Precomputed maxima can be passed directly via
    max_deficits instead.
    """
    counts = [int(c) for c in counts]
    if len(counts) != instance.K:
        raise CountMismatch(f"got {len(counts)} counts for {instance.K} arms")
    total = sum(counts)
    if total != T:
        raise CountMismatch(f"counts sum to {total}, horizon is {T}")
    loss = realized_loss(instance, counts, T)
    opt_loss = l_star(instance, T)
    unfairness = tuple(
        max(arm.tau * T - counts[k], 0.0) for k, arm in enumerate(instance.arms)
    )
    if max_deficits is None and deficit_history is not None:
        max_deficits = np.asarray(deficit_history).max(axis=0)
    return RegretReport(
        total_reward=float(total_reward),
        realized_loss=loss,
        l_star=opt_loss,
        penalized_regret=loss - opt_loss,
        per_arm_unfairness=unfairness,
        max_deficit=None if max_deficits is None else tuple(float(d) for d in max_deficits),
    )


def regret_by_classification(instance: BanditInstance, counts, T: int) -> float:
    """Penalized regret assembled term-by-term over the three arm sets.

    Algebraically identical to realized_loss - l_star; kept as an
    independent cross-check of the bookkeeping.
    """
    cls = classify_arms(instance)
    terms = []
    for k, arm in enumerate(instance.arms):
        shortfall_plus = max(arm.tau * T - counts[k], 0.0)
        if k in cls.opt:
            terms.append(arm.penalty * shortfall_plus)
        elif k in cls.cr:
            terms.append(cls.gaps[k] * (counts[k] - arm.tau * T) + arm.penalty * shortfall_plus)
        else:
            terms.append(cls.gaps[k] * counts[k] + arm.penalty * (shortfall_plus - arm.tau * T))
    return math.fsum(terms)


def brute_force_l_star(instance: BanditInstance, T: int) -> float:
    """Exhaustive minimum loss over integer allocations of T pulls.

    Test-only oracle; enumeration is capped at K <= 4, T <= 30.
    """
    K = instance.K
    if K > 4 or T > 30:
        raise TooLarge(f"enumeration bound is K <= 4, T <= 30; got K={K}, T={T}")
    cls = classify_arms(instance)
    gaps = cls.gaps
    taus = instance.taus
    pens = instance.penalties

    best = math.inf

    def rec(k: int, remaining: int, acc: float) -> None:
        nonlocal best
        if k == K - 1:
            shortfall = taus[k] * T - remaining
            loss = acc + gaps[k] * remaining + pens[k] * (shortfall if shortfall > 0.0 else 0.0)
            if loss < best:
                best = loss
            return
        for n_k in range(remaining + 1):
            shortfall = taus[k] * T - n_k
            term = gaps[k] * n_k + pens[k] * (shortfall if shortfall > 0.0 else 0.0)
            rec(k + 1, remaining - n_k, acc + term)

    rec(0, T, 0.0)
    return best


def gap_dependent_bound(
    instance: BanditInstance, T: int, per_arm_constant: float = 1.0
) -> GapDependentBound:
    """Leading term of the logarithmic regret bound for fixed gaps.

    Optimal arms contribute nothing; the unquantified remainder is
    reported as per_arm_constant * K in additive_term. Note the
    sufficient conditions behind this bound are not checked here.
    """
    if T < 2:
        raise ValueError(f"horizon must be >= 2, got {T}")
    cls = classify_arms(instance)
    ln_t = math.log(T)
    terms = []
    for k, arm in enumerate(instance.arms):
        if k in cls.non_cr:
            margin = cls.gaps[k] - arm.penalty
            capped = min(8.0 * ln_t / margin, margin * arm.tau * T)
            terms.append(max(capped, 8.0 * ln_t / cls.gaps[k]))
        elif k in cls.cr:
            terms.append(max(8.0 * ln_t / cls.gaps[k] - arm.tau * T, 0.0))
    return GapDependentBound(
        value=math.fsum(terms), additive_term=per_arm_constant * instance.K
    )


def gap_independent_bound(instance: BanditInstance, T: int, C: float = 1.0) -> float:
    """Gap-free sqrt(T log T)-scale regret bound; C is the universal
    constant of the third term (default 1)."""
    if T < 2:
        raise ValueError(f"horizon must be >= 2, got {T}")
    if C <= 0.0:
        raise ValueError(f"universal constant must be > 0, got {C}")
    taus = instance.taus
    K = instance.K
    t_ln_t = T * math.log(T)
    return (
        8.0 * math.sqrt(t_ln_t) * math.fsum(math.sqrt(t) for t in taus)
        + 8.0 * math.sqrt((1.0 - min(taus)) * K * t_ln_t)
        + C * math.sqrt(K * t_ln_t)
    )


def maximal_deficit_coefficients(instance: BanditInstance) -> dict[int, float]:
    """Per-arm slope of the log-horizon bound on the running maximum
    fairness shortfall, for optimal and critical arms.

    Arms are ordered by mu + penalty descending; ties within 1e-12 make
    the coefficients undefined (TiedSums). The returned dict maps arm id
    to its coefficient.
    """
    cls = classify_arms(instance)
    mus = instance.mus
    pens = instance.penalties
    order = sorted(range(instance.K), key=lambda k: (-(mus[k] + pens[k]), k))
    sums = [mus[k] + pens[k] for k in order]
    for i in range(len(sums) - 1):
        if abs(sums[i] - sums[i + 1]) <= TIE_TOL:
            raise TiedSums(
                f"arms {order[i]} and {order[i + 1]} share mu + penalty = {sums[i]}"
            )

    def per_position(d: int) -> float:
        acc = 0.0
        for m in range(d):
            den = sums[d] - mus[order[m]]
            if den == 0.0:
                raise TiedSums(
                    f"arm {order[d]} has mu + penalty equal to the mean of arm {order[m]}"
                )
            acc += 1.0 / (den * den)
        for m in range(d + 1, len(sums)):
            den = sums[d] - sums[m]
            acc += 1.0 / (den * den)
        return acc

    # Optimal and critical arms have mu + penalty >= mu_star while
    # non-critical arms sit strictly below it, so the eligible arms form
    # a prefix of the descending order.
    eligible = cls.opt | cls.cr
    coeffs: dict[int, float] = {}
    b: list[float] = []
    for j, arm_id in enumerate(order):
        if arm_id not in eligible:
            break
        b.append(per_position(j))
        coeffs[arm_id] = 8.0 * math.fsum((j - d + 1) * b[d] for d in range(j + 1))
    return coeffs
