"""Closed-form achievable rates for the finite-memory channel.

All powers are in watts and all rates in bits per symbol. The Gaussian
input is evaluated at its full power; no back-off is applied.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._util import Estimate, SeedLike, complex_normal, make_rng
from .channel import ChannelParams

__all__ = [
    "PowerGrid",
    "RateCurve",
    "s_bar",
    "s_bar_mc_oracle",
    "p_star",
    "capacity_lower_bound",
    "gn_capacity",
    "gn_peak_power",
    "aux_variance_objective",
    "optimal_aux_variance",
]

LOG2E = np.log2(np.e)


@dataclass(frozen=True)
class PowerGrid:
    powers: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.powers, dtype=float).reshape(-1)
        if p.size == 0:
            raise ValueError("power grid is empty")
        if np.any(~np.isfinite(p)) or np.any(p <= 0):
            raise ValueError("grid powers must be finite and > 0")
        if np.any(np.diff(p) <= 0):
            raise ValueError("grid powers must be strictly increasing")
        object.__setattr__(self, "powers", p)

    @classmethod
    def from_dbm(cls, pmin_dbm: float, pmax_dbm: float, step_dbm: float) -> "PowerGrid":
        if step_dbm <= 0:
            raise ValueError("step must be positive")
        if pmax_dbm < pmin_dbm:
            raise ValueError("pmax must be >= pmin")
        n = int(np.floor((pmax_dbm - pmin_dbm) / step_dbm + 1e-9)) + 1
        dbm = pmin_dbm + step_dbm * np.arange(n)
        return cls(1e-3 * 10.0 ** (dbm / 10.0))

    def __len__(self):
        return self.powers.size


@dataclass
class RateCurve:
    """Rates over a power grid together with how they were produced."""

    powers: np.ndarray
    rates: np.ndarray
    method: str
    params: ChannelParams
    std_errs: np.ndarray | None = None
    seed: int | None = None
    n_samples: int | None = None
    raw_rates: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.powers = np.asarray(self.powers, dtype=float)
        self.rates = np.asarray(self.rates, dtype=float)
        if self.powers.shape != self.rates.shape:
            raise ValueError("one rate per grid power is required")
        if self.std_errs is None:
            self.std_errs = np.zeros_like(self.rates)
        self.std_errs = np.asarray(self.std_errs, dtype=float)


def s_bar(P, N: int):
    """``E[S_i**3]`` for iid circular Gaussian inputs of power ``P``.

    ``(2N+1) S_i / (P/2)`` is chi-squared with ``4N + 2`` degrees of
    freedom, whose third moment gives ``P^3 (2N+3)(2N+2) / (2N+1)^2``.
    """
    P = np.asarray(P, dtype=float)
    if np.any(P < 0):
        raise ValueError("power must be nonnegative")
    if N < 0:
        raise ValueError("memory must be nonnegative")
    out = P**3 * (2 * N + 3) * (2 * N + 2) / (2 * N + 1) ** 2
    return float(out) if out.ndim == 0 else out


def s_bar_mc_oracle(P: float, N: int, samples: int = 10**6, seed: SeedLike = 0,
                    chunk: int = 200_000) -> Estimate:
    """Monte Carlo ``E[S_i**3]`` by drawing whole windows of Gaussian inputs."""
    if samples < 2:
        raise ValueError("need at least two samples")
    rng = make_rng(seed)
    width = 2 * N + 1
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        x = complex_normal(rng, (m, width), P)
        s3 = np.mean(np.abs(x) ** 2, axis=1) ** 3
        total += s3.sum()
        total_sq += np.dot(s3, s3)
        done += m
    mean = total / samples
    var = max(total_sq / samples - mean**2, 0.0) * samples / (samples - 1)
    return Estimate(mean, float(np.sqrt(var / samples)))


def p_star(params: ChannelParams) -> float:
    """Power maximising the memory-``N`` Gaussian bound."""
    if params.eta <= 0:
        raise ValueError("no finite optimum; bound is monotone in P when eta = 0")
    n = params.memory
    return (
        params.sigma_a2 * (2 * n + 1) ** 2 / (2 * params.eta * (2 * n + 3) * (2 * n + 2))
    ) ** (1.0 / 3.0)


def capacity_lower_bound(P, params: ChannelParams):
    """Gaussian-input achievable rate, held flat beyond ``p_star``."""
    P = np.asarray(P, dtype=float)
    if np.any(P < 0):
        raise ValueError("power must be nonnegative")
    p_eff = P if params.eta == 0 else np.minimum(P, p_star(params))
    out = np.log2(1.0 + p_eff / (params.sigma_a2 + params.eta * s_bar(p_eff, params.memory)))
    return float(out) if out.ndim == 0 else out


def gn_capacity(P, params: ChannelParams):
    """Capacity of the memoryless GN model at average power ``P``."""
    P = np.asarray(P, dtype=float)
    if np.any(P < 0):
        raise ValueError("power must be nonnegative")
    out = np.log2(1.0 + P / (params.sigma_a2 + params.eta * P**3))
    return float(out) if out.ndim == 0 else out


def gn_peak_power(params: ChannelParams) -> float:
    if params.eta <= 0:
        raise ValueError("GN capacity has no finite peak when eta = 0")
    return (params.sigma_a2 / (2.0 * params.eta)) ** (1.0 / 3.0)


def aux_variance_objective(V, P: float, params: ChannelParams):
    """Per-symbol auxiliary-channel rate when ``eta * V`` stands in for the
    nonlinear noise variance.

    The true-channel moments enter through ``s_bar(P)``; the maximum over
    ``V`` sits at ``V = s_bar(P)`` where the value equals the unclamped
    Gaussian bound.
    """
    V = np.asarray(V, dtype=float)
    if np.any(V < 0):
        raise ValueError("V must be nonnegative")
    a = params.sigma_a2
    sb = s_bar(P, params.memory)
    noise = a + params.eta * V
    out = (
        np.log2(1.0 + P / noise)
        - (a + params.eta * sb) / noise * LOG2E
        + (P + a + params.eta * sb) / (P + noise) * LOG2E
    )
    return float(out) if out.ndim == 0 else out


def optimal_aux_variance(P: float, params: ChannelParams, xtol: float = 1e-14) -> float:
    """Numerically maximise :func:`aux_variance_objective` over ``V``.

    A coarse log-spaced scan brackets the peak, then a central-difference
    slope is driven to zero with Brent's method.
    """
    from scipy.optimize import brentq

    if params.eta <= 0 or P <= 0:
        raise ValueError("objective is flat in V unless eta > 0 and P > 0")
    scale = params.sigma_a2 / params.eta + P**3
    grid = scale * np.logspace(-6, 6, 241)
    vals = aux_variance_objective(grid, P, params)
    j = int(np.clip(np.argmax(vals), 1, grid.size - 2))
    lo, hi = grid[j - 1], grid[j + 1]

    def slope(v):
        h = 1e-4 * v
        return (aux_variance_objective(v + h, P, params)
                - aux_variance_objective(v - h, P, params)) / (2 * h)

    return float(brentq(slope, lo, hi, xtol=xtol * lo, rtol=4 * np.finfo(float).eps))
