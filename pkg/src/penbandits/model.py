"""Domain types: arms, reward distributions, instances, and arm classification.

Everything here is immutable after construction and safe to share across
concurrent replications.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

from .errors import BadDistribution, FairnessInfeasible, TooFewArms

#: Declared arm means must match the analytic mean of the distribution
#: to this tolerance.
MEAN_MATCH_TOL = 1e-12

#: Categorical probabilities must sum to 1 within this tolerance.
PROB_SUM_TOL = 1e-12


@dataclass(frozen=True)
class Gaussian:
    mean: float
    variance: float

    def __post_init__(self):
        if not math.isfinite(self.mean):
            raise BadDistribution(f"Gaussian mean must be finite, got {self.mean}")
        if not (self.variance > 0.0 and math.isfinite(self.variance)):
            raise BadDistribution(f"Gaussian variance must be > 0, got {self.variance}")

    def analytic_mean(self) -> float:
        return self.mean


@dataclass(frozen=True)
class Beta:
    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0.0 and self.beta > 0.0):
            raise BadDistribution(
                f"Beta parameters must be > 0, got ({self.alpha}, {self.beta})"
            )

    def analytic_mean(self) -> float:
        return self.alpha / (self.alpha + self.beta)


@dataclass(frozen=True)
class Bernoulli:
    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise BadDistribution(f"Bernoulli p must lie in [0, 1], got {self.p}")

    def analytic_mean(self) -> float:
        return self.p


@dataclass(frozen=True)
class Categorical:
    support: tuple[float, ...]
    probs: tuple[float, ...]
    # Cumulative probabilities, precomputed for the samplers.
    cumulative: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        support = tuple(float(v) for v in self.support)
        probs = tuple(float(p) for p in self.probs)
        if len(support) != len(probs) or not support:
            raise BadDistribution("Categorical support and probs must be non-empty and equal-length")
        if any(not math.isfinite(v) for v in support):
            raise BadDistribution("Categorical support values must be finite")
        if any(p < 0.0 for p in probs):
            raise BadDistribution("Categorical probabilities must be non-negative")
        total = math.fsum(probs)
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise BadDistribution(f"Categorical probabilities sum to {total}, not 1")
        cum = []
        acc = 0.0
        for p in probs:
            acc += p
            cum.append(acc)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "cumulative", tuple(cum))

    def analytic_mean(self) -> float:
        return math.fsum(v * p for v, p in zip(self.support, self.probs))


@dataclass(frozen=True)
class Deterministic:
    value: float

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise BadDistribution(f"Deterministic value must be finite, got {self.value}")

    def analytic_mean(self) -> float:
        return self.value


RewardDist = Gaussian | Beta | Bernoulli | Categorical | Deterministic

_DIST_KINDS = {
    "gaussian": Gaussian,
    "beta": Beta,
    "bernoulli": Bernoulli,
    "categorical": Categorical,
    "deterministic": Deterministic,
}


def dist_from_config(kind: str, params: dict) -> RewardDist:
    """Build a reward distribution from its config-file form."""
    try:
        cls = _DIST_KINDS[kind.lower()]
    except KeyError:
        raise BadDistribution(f"unknown distribution kind {kind!r}") from None
    try:
        if cls is Categorical:
            return Categorical(tuple(params["support"]), tuple(params["probs"]))
        return cls(**params)
    except TypeError as exc:
        raise BadDistribution(f"bad parameters for {kind}: {exc}") from None


def dist_to_config(dist: RewardDist) -> dict:
    """Inverse of :func:`dist_from_config`."""
    if isinstance(dist, Gaussian):
        return {"kind": "gaussian", "params": {"mean": dist.mean, "variance": dist.variance}}
    if isinstance(dist, Beta):
        return {"kind": "beta", "params": {"alpha": dist.alpha, "beta": dist.beta}}
    if isinstance(dist, Bernoulli):
        return {"kind": "bernoulli", "params": {"p": dist.p}}
    if isinstance(dist, Categorical):
        return {"kind": "categorical", "params": {"support": list(dist.support), "probs": list(dist.probs)}}
    if isinstance(dist, Deterministic):
        return {"kind": "deterministic", "params": {"value": dist.value}}
    raise TypeError(f"not a reward distribution: {dist!r}")


@dataclass(frozen=True)
class ArmSpec:
    """One arm: true mean, fairness fraction, penalty rate, reward law.

    The declared mean must agree with the distribution's analytic mean;
    means outside [0, 1] are allowed (the Gaussian settings use unbounded
    support) but draw a warning.
    """

    id: int
    mu: float
    tau: float
    penalty: float
    dist: RewardDist

    def __post_init__(self):
        if not 0.0 <= self.tau < 1.0:
            raise ValueError(f"arm {self.id}: tau must lie in [0, 1), got {self.tau}")
        if self.penalty < 0.0:
            raise ValueError(f"arm {self.id}: penalty rate must be >= 0, got {self.penalty}")
        if abs(self.dist.analytic_mean() - self.mu) > MEAN_MATCH_TOL:
            raise BadDistribution(
                f"arm {self.id}: declared mu {self.mu} differs from the "
                f"distribution mean {self.dist.analytic_mean()}"
            )
        if not 0.0 <= self.mu <= 1.0:
            warnings.warn(
                f"arm {self.id}: mean {self.mu} lies outside [0, 1]; "
                "regret analysis assumes rewards in the unit interval",
                stacklevel=3,
            )


@dataclass(frozen=True)
class BanditInstance:
    """Validated, ordered collection of arms plus the fairness slack
    1 - sum(tau_k), which must be strictly positive."""

    arms: tuple[ArmSpec, ...]
    slack: float = field(init=False)

    def __post_init__(self):
        arms = tuple(self.arms)
        object.__setattr__(self, "arms", arms)
        if len(arms) < 2:
            raise TooFewArms(f"need at least 2 arms, got {len(arms)}")
        for pos, arm in enumerate(arms):
            if arm.id != pos:
                raise ValueError(
                    f"arm ids must be 0..K-1 in order; position {pos} has id {arm.id}"
                )
        total_tau = math.fsum(a.tau for a in arms)
        if total_tau >= 1.0:
            raise FairnessInfeasible(
                f"fairness fractions sum to {total_tau}; must be strictly below 1"
            )
        object.__setattr__(self, "slack", 1.0 - total_tau)

    @property
    def K(self) -> int:
        return len(self.arms)

    @property
    def mus(self) -> tuple[float, ...]:
        return tuple(a.mu for a in self.arms)

    @property
    def taus(self) -> tuple[float, ...]:
        return tuple(a.tau for a in self.arms)

    @property
    def penalties(self) -> tuple[float, ...]:
        return tuple(a.penalty for a in self.arms)


def validate_instance(arms) -> BanditInstance:
    """Validate a list of ArmSpecs into an instance with computed slack.

    Raises TooFewArms, FairnessInfeasible, or BadDistribution.
    """
    return BanditInstance(tuple(arms))


@dataclass(frozen=True)
class ArmClassification:
    """Partition of the arms by how the penalty rate compares to the gap.

    opt:    gap exactly 0 (best arms)
    cr:     suboptimal, penalty >= gap (worth keeping at the fairness level)
    non_cr: suboptimal, gap > penalty (worth abandoning)
    """

    mu_star: float
    gaps: tuple[float, ...]
    opt: frozenset[int]
    cr: frozenset[int]
    non_cr: frozenset[int]


def classify_arms(instance: BanditInstance) -> ArmClassification:
    """Split arms into optimal / critical / non-critical sets.

    Optimality is exact: an arm is optimal iff its gap is 0.0 after
    computing mu_star = max of the means, with no epsilon band.
    """
    mus = instance.mus
    mu_star = max(mus)
    gaps = tuple(mu_star - mu for mu in mus)
    opt, cr, non_cr = set(), set(), set()
    for k, arm in enumerate(instance.arms):
        if gaps[k] == 0.0:
            opt.add(k)
        elif arm.penalty >= gaps[k]:
            cr.add(k)
        else:
            non_cr.add(k)
    return ArmClassification(
        mu_star=mu_star,
        gaps=gaps,
        opt=frozenset(opt),
        cr=frozenset(cr),
        non_cr=frozenset(non_cr),
    )


def instance_from_config(config: dict) -> BanditInstance:
    """Build an instance from the config-file schema.

    Schema: {"arms": [{"mu": float, "tau": float, "penalty": float,
    "dist": {"kind": str, "params": {...}}}, ...]}. Arm ids are assigned
    by position.
    """
    try:
        arm_entries = config["arms"]
    except (KeyError, TypeError):
        raise ValueError("instance config must have a top-level 'arms' list") from None
    arms = []
    for k, entry in enumerate(arm_entries):
        dist = dist_from_config(entry["dist"]["kind"], entry["dist"]["params"])
        arms.append(
            ArmSpec(
                id=k,
                mu=float(entry["mu"]),
                tau=float(entry["tau"]),
                penalty=float(entry["penalty"]),
                dist=dist,
            )
        )
    return validate_instance(arms)


def instance_to_config(instance: BanditInstance) -> dict:
    """Inverse of :func:`instance_from_config`."""
    return {
        "arms": [
            {
                "mu": arm.mu,
                "tau": arm.tau,
                "penalty": arm.penalty,
                "dist": dist_to_config(arm.dist),
            }
            for arm in instance.arms
        ]
    }
