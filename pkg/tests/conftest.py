"""Shared instance builders for the test suite."""

import numpy as np

from penbandits import ArmSpec, Deterministic, Gaussian, validate_instance


def point_mass_instance(mus, taus, penalties):
    """Instance with deterministic rewards; handy for exact checks."""
    return validate_instance(
        [
            ArmSpec(k, mu, tau, pen, Deterministic(mu))
            for k, (mu, tau, pen) in enumerate(zip(mus, taus, penalties))
        ]
    )


def gaussian_instance(mus, taus, penalties, variance=None):
    """Instance with Gaussian rewards of variance 1/K^2 by default."""
    K = len(mus)
    var = variance if variance is not None else 1.0 / K**2
    return validate_instance(
        [
            ArmSpec(k, mu, tau, pen, Gaussian(mu, var))
            for k, (mu, tau, pen) in enumerate(zip(mus, taus, penalties))
        ]
    )


def random_instance(rng: np.random.Generator, K=None, max_k=4, tau_scale=0.9):
    """Random feasible instance for property sweeps."""
    if K is None:
        K = int(rng.integers(2, max_k + 1))
    mus = rng.uniform(0.0, 1.0, K)
    taus = rng.uniform(0.0, tau_scale / K, K)
    pens = rng.uniform(0.0, 1.0, K)
    return point_mass_instance(mus.tolist(), taus.tolist(), pens.tolist())
