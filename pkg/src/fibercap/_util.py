"""Seeding and small numeric helpers shared across modules."""

from __future__ import annotations

from typing import NamedTuple, Union

import numpy as np

SeedLike = Union[None, int, np.random.SeedSequence, np.random.Generator]


class Estimate(NamedTuple):
    """A Monte Carlo mean with its standard error."""

    value: float
    std_error: float


def make_rng(seed: SeedLike) -> np.random.Generator:
    """Return a Philox-backed generator; generators are passed through."""
    if isinstance(seed, np.random.Generator):
        return seed
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return np.random.Generator(np.random.Philox(seed))


def spawn_seeds(seed: SeedLike, n: int) -> list[np.random.SeedSequence]:
    """Derive ``n`` independent child seeds (stable for int/SeedSequence input)."""
    if isinstance(seed, np.random.Generator):
        return seed.bit_generator.seed_seq.spawn(n)
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return seed.spawn(n)


def complex_normal(rng: np.random.Generator, size, variance=1.0) -> np.ndarray:
    """Circularly symmetric complex Gaussian draws.

    Real and imaginary parts are independent with ``variance / 2`` each.
    """
    z = rng.standard_normal(size=(2,) + tuple(np.atleast_1d(size)))
    return np.sqrt(np.asarray(variance, dtype=float) / 2.0) * (z[0] + 1j * z[1])


def mean_and_stderr(values: np.ndarray) -> Estimate:
    values = np.asarray(values, dtype=float)
    n = values.size
    se = float(values.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return Estimate(float(values.mean()), se)


def batch_means(values: np.ndarray, n_batches: int = 20) -> Estimate:
    """Mean and standard error from non-overlapping batch means.

    Leftover samples that do not fill a whole batch are kept in the mean
    but dropped from the error estimate.
    """
    values = np.asarray(values, dtype=float)
    n = values.size
    n_batches = min(n_batches, n)
    if n_batches < 2:
        return Estimate(float(values.mean()), 0.0)
    size = n // n_batches
    means = values[: size * n_batches].reshape(n_batches, size).mean(axis=1)
    se = float(means.std(ddof=1) / np.sqrt(n_batches))
    return Estimate(float(values.mean()), se)
