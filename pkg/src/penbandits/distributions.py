"""Seeded reward generation with a strict reproducibility contract.

Every stream is a PCG64 generator (seedable, platform-stable, documented).
Sampling consumes exactly one uniform double per draw for every
distribution kind except Deterministic, which consumes none; the uniform
is pushed through the kind's inverse CDF. This fixed-consumption rule is
what makes golden-trajectory tests possible: the stream position after n
draws depends only on how many non-deterministic draws happened, never on
the values drawn.

Replication streams are derived by mixing (base_seed, replication) through
the SplitMix64 finalizer, a bijective 64-bit hash, so distinct replication
indices can never collide for a given base seed.
"""
from __future__ import annotations

from bisect import bisect_right
import math

import numpy as np
from scipy import special

from .model import (
    Bernoulli,
    Beta,
    Categorical,
    Deterministic,
    Gaussian,
    RewardDist,
)

_MASK64 = (1 << 64) - 1
#: SplitMix64 increment (golden-ratio constant); odd, so the map
#: r -> base + GAMMA * (r + 1) mod 2^64 is injective in r.
_GAMMA = 0x9E3779B97F4A7C15

#: A uniform draw of exactly 0.0 (probability 2^-53) would map to -inf
#: under the Gaussian inverse CDF; it is nudged to half an ulp instead.
_MIN_UNIFORM = 2.0 ** -53


def _splitmix64(z: int) -> int:
    """Bijective 64-bit finalizer from the SplitMix64 generator."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


class RngStream:
    """One random stream, owned by exactly one replication at a time."""

    __slots__ = ("seed", "_gen")

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK64
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def uniform(self) -> float:
        """One double in [0, 1); the raw unit every sampler consumes."""
        return self._gen.random()

    def uniforms(self, n: int) -> np.ndarray:
        """n doubles in [0, 1), identical to n successive uniform() calls."""
        return self._gen.random(n)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed})"


def derive_stream(base_seed: int, replication: int) -> RngStream:
    """Deterministic, collision-free stream for one replication index."""
    if replication < 0:
        raise ValueError(f"replication index must be >= 0, got {replication}")
    mixed = _splitmix64((int(base_seed) + _GAMMA * (replication + 1)) & _MASK64)
    return RngStream(mixed)


def derive_named_stream(base_seed: int, label: str) -> RngStream:
    """Stream for a named non-replication purpose (parameter generation),
    kept apart from the replication streams by hashing the label in."""
    z = int(base_seed) & _MASK64
    for byte in label.encode():
        z = _splitmix64(z ^ byte)
    return RngStream(_splitmix64(z ^ _GAMMA))


def sample(dist: RewardDist, rng: RngStream) -> float:
    """Draw one reward, consuming one uniform (none for Deterministic)."""
    kind = type(dist)
    if kind is Deterministic:
        return dist.value
    u = rng.uniform()
    if kind is Bernoulli:
        return 1.0 if u < dist.p else 0.0
    if kind is Gaussian:
        if u == 0.0:
            u = _MIN_UNIFORM
        return dist.mean + math.sqrt(dist.variance) * float(special.ndtri(u))
    if kind is Beta:
        return float(special.betaincinv(dist.alpha, dist.beta, u))
    if kind is Categorical:
        idx = bisect_right(dist.cumulative, u)
        if idx >= len(dist.support):
            idx = len(dist.support) - 1
        return dist.support[idx]
    raise TypeError(f"not a reward distribution: {dist!r}")


def sample_many(dist: RewardDist, rng: RngStream, n: int) -> np.ndarray:
    """Vectorized draws; bit-identical to n successive sample() calls."""
    kind = type(dist)
    if kind is Deterministic:
        return np.full(n, dist.value)
    u = rng.uniforms(n)
    if kind is Bernoulli:
        return (u < dist.p).astype(np.float64)
    if kind is Gaussian:
        u = np.where(u == 0.0, _MIN_UNIFORM, u)
        return dist.mean + math.sqrt(dist.variance) * special.ndtri(u)
    if kind is Beta:
        return special.betaincinv(dist.alpha, dist.beta, u)
    if kind is Categorical:
        idx = np.searchsorted(np.asarray(dist.cumulative), u, side="right")
        idx = np.minimum(idx, len(dist.support) - 1)
        return np.asarray(dist.support)[idx]
    raise TypeError(f"not a reward distribution: {dist!r}")
