"""Finite-support input distributions from quantized Gaussians."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erf
from scipy.stats import norm

from ._util import SeedLike, make_rng

__all__ = ["QuantizedDistribution", "quantize_gaussian", "quantized_complex_gaussian",
           "clip_threshold"]


@dataclass(frozen=True)
class QuantizedDistribution:
    """Atoms (real or complex) with matching probabilities."""

    atoms: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        atoms = np.asarray(self.atoms).reshape(-1)
        probs = np.asarray(self.probs, dtype=float).reshape(-1)
        if atoms.size == 0 or atoms.shape != probs.shape:
            raise ValueError("need one probability per atom and at least one atom")
        if not np.all(np.isfinite(atoms)):
            raise ValueError("atoms must be finite")
        if np.any(probs < 0) or not np.all(np.isfinite(probs)):
            raise ValueError("probabilities must be finite and nonnegative")
        if abs(probs.sum() - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {probs.sum()!r}, not 1")
        if np.unique(atoms).size != atoms.size:
            raise ValueError("atoms must be distinct")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def point(cls, value) -> "QuantizedDistribution":
        return cls(np.array([value]), np.array([1.0]))

    def __len__(self):
        return self.atoms.size

    @property
    def mean(self):
        return np.dot(self.probs, self.atoms)

    @property
    def power(self) -> float:
        """``E|X|^2``."""
        return float(np.dot(self.probs, np.abs(self.atoms) ** 2))

    def trim(self, min_prob: float) -> "QuantizedDistribution":
        """Drop atoms with probability below ``min_prob`` and renormalise."""
        keep = self.probs >= min_prob
        if not keep.any():
            raise ValueError("trimming would remove every atom")
        probs = self.probs[keep]
        return QuantizedDistribution(self.atoms[keep], probs / probs.sum())

    def sample(self, n: int, seed: SeedLike = None) -> np.ndarray:
        rng = make_rng(seed)
        idx = rng.choice(self.atoms.size, size=n, p=self.probs)
        return self.atoms[idx]


def clip_threshold(V: float, eps: float, literal: bool = False) -> float:
    """Clipping level ``x_T``.

    The default is ``2 sqrt(V) Q^{-1}(eps/2)``, an amplitude. ``literal=True``
    uses ``2 V Q^{-1}(eps/2)`` instead, which mixes units but is kept for
    comparison.
    """
    q_inv = norm.isf(eps / 2.0)
    return 2.0 * (V if literal else np.sqrt(V)) * q_inv


def quantize_gaussian(V: float, n_q: int, eps: float, literal: bool = False
                      ) -> QuantizedDistribution:
    """Output law of the inward-rounding quantizer driven by N(0, V).

    ``[-x_T, x_T]`` is cut into ``2(n_q - 1)`` equal cells. A sample in a
    cell ``[a, b)`` maps to ``a`` when nonnegative and ``b`` otherwise, so
    every output is pulled towards zero; the two tails map to ``+-x_T``.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if int(n_q) != n_q or n_q < 2:
        raise ValueError("n_q must be an integer >= 2")
    if not V > 0:
        raise ValueError("variance must be positive")
    n_q = int(n_q)
    x_t = clip_threshold(V, eps, literal)
    step = x_t / (n_q - 1)
    sd = np.sqrt(V)
    k = np.arange(1, n_q)
    # Positive atom k*step collects [k*step, (k+1)*step); the top one takes
    # the whole upper tail. Upper-tail masses via sf to keep tiny cells exact.
    upper = norm.sf(k * step / sd)
    nxt = np.append(norm.sf((k[:-1] + 1) * step / sd), 0.0)
    pos = upper - nxt
    zero = erf(step / (sd * np.sqrt(2.0)))
    probs = np.concatenate([pos[::-1], [zero], pos])
    atoms = step * np.arange(-(n_q - 1), n_q, dtype=float)
    probs = probs / probs.sum()
    return QuantizedDistribution(atoms, probs)


def quantized_complex_gaussian(P: float, n_q: int, eps: float, literal: bool = False
                               ) -> QuantizedDistribution:
    """Independent real and imaginary quantized Gaussians of variance ``P/2``."""
    part = quantize_gaussian(P / 2.0, n_q, eps, literal)
    re, im = np.meshgrid(part.atoms, part.atoms, indexing="ij")
    pr = np.outer(part.probs, part.probs)
    return QuantizedDistribution((re + 1j * im).ravel(), pr.ravel() / pr.sum())
