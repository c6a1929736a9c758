"""Monte Carlo achievable rates for the channel with memory.

The rate for iid inputs drawn from a finite-support law is
``h(Y) - h(Y | X)`` per symbol. The output entropy comes from the forward
recursion in :mod:`fibercap.forward`; the conditional entropy is an
expectation over the local power of an interior symbol.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ._util import SeedLike, batch_means, mean_and_stderr, make_rng, spawn_seeds
from .bounds import RateCurve
from .channel import ChannelParams, simulate
from .forward import PowerClasses, forward_log_lambdas, _merge_sorted
from .quantize import QuantizedDistribution

__all__ = [
    "RateEstimate",
    "conditional_entropy_rate",
    "output_entropy_rate",
    "rate_estimate",
    "monotone_extension",
    "aclb_discrete",
    "mutual_information",
    "power_sum_distribution",
]

LOG2E = np.log2(np.e)
EXACT_ENUMERATION_LIMIT = 10**7


@dataclass(frozen=True)
class RateEstimate:
    """A rate (bits/symbol) with its Monte Carlo standard error.

    ``rate`` is the raw estimate and may dip below zero through noise;
    ``clamped`` is what reports show.
    """

    rate: float
    std_error: float
    n_samples: int
    seed: object = None

    @property
    def clamped(self) -> float:
        return max(self.rate, 0.0)


def _seed_repr(seed):
    return seed if isinstance(seed, (int, type(None))) else repr(seed)


def power_sum_distribution(dist: QuantizedDistribution, terms: int, limit: int | None = None):
    """Exact law of ``|X_1|^2 + ... + |X_terms|^2`` for iid ``X_j ~ dist``.

    Built by repeated convolution over distinct powers. Returns ``None`` if
    an intermediate table would exceed ``limit`` entries (default
    :data:`EXACT_ENUMERATION_LIMIT`).
    """
    if limit is None:
        limit = EXACT_ENUMERATION_LIMIT
    pw = np.abs(np.asarray(dist.atoms)) ** 2
    order = np.argsort(pw)
    powers, ids = _merge_sorted(pw[order], 1e-12)
    weights = np.bincount(ids, weights=dist.probs[order], minlength=powers.size)
    vals, probs = np.zeros(1), np.ones(1)
    for _ in range(terms):
        if vals.size * powers.size > limit:
            return None
        v = np.add.outer(vals, powers).ravel()
        p = np.multiply.outer(probs, weights).ravel()
        order = np.argsort(v, kind="stable")
        reps, gid = _merge_sorted(v[order], 1e-12)
        vals, probs = reps, np.bincount(gid, weights=p[order], minlength=reps.size)
    return vals, probs


def conditional_entropy_rate(p_x: QuantizedDistribution, params: ChannelParams,
                             n_samples: int = 10**5, seed: SeedLike = 0) -> RateEstimate:
    """``E[log2(pi e (sigma_a2 + eta S^3))]`` for an interior symbol.

    Evaluated exactly over the law of the window power when that is small
    enough to tabulate, otherwise by Monte Carlo over ``n_samples`` windows.
    """
    width = params.window
    if params.eta == 0:
        return RateEstimate(float(np.log2(np.pi * np.e * params.sigma_a2)), 0.0, 0, seed)
    table = power_sum_distribution(p_x, width)
    if table is not None:
        sums, probs = table
        v = params.noise_variance(sums / width)
        val = float(np.dot(probs, np.log2(np.pi * np.e * v)))
        return RateEstimate(val, 0.0, 0, _seed_repr(seed))
    if n_samples < 1000:
        raise ValueError("need at least 1000 samples")
    x = p_x.sample(n_samples * width, seed).reshape(n_samples, width)
    s = np.mean(np.abs(x) ** 2, axis=1)
    est = mean_and_stderr(np.log2(np.pi * np.e * params.noise_variance(s)))
    return RateEstimate(est.value, est.std_error, n_samples, _seed_repr(seed))


def output_log_lambdas(p_x: QuantizedDistribution, params: ChannelParams, n_steps: int,
                       seed: SeedLike = 0, backend: str | None = None) -> np.ndarray:
    """Simulate one trajectory and return ``log lambda_k`` (nats) per output."""
    rng = make_rng(seed)
    x = p_x.sample(n_steps + params.memory, rng)
    y = simulate(x, params, rng, n=n_steps).y
    classes = PowerClasses.build(p_x, params)
    return forward_log_lambdas(y, classes, backend)


def output_entropy_rate(p_x: QuantizedDistribution, params: ChannelParams,
                        n_steps: int = 10**4, seed: SeedLike = 0, *,
                        generalized: bool = False, backend: str | None = None,
                        n_batches: int = 20) -> RateEstimate:
    """Per-symbol output entropy ``h(Y^n)/n`` in bits from one trajectory.

    Memory other than 1 needs ``generalized=True``; the message table grows
    as ``(L + 1)**(2N)`` over ``L`` distinct input powers and oversized
    tables are refused.
    """
    if params.memory != 1 and not generalized:
        raise ValueError(
            f"memory {params.memory} needs generalized=True (message table grows "
            "exponentially with memory)"
        )
    if n_steps < 1000:
        raise ValueError("need at least 1000 steps")
    log_lam = output_log_lambdas(p_x, params, n_steps, seed, backend)
    est = batch_means(-log_lam * LOG2E, n_batches)
    return RateEstimate(est.value, est.std_error, n_steps, _seed_repr(seed))


def rate_estimate(p_x: QuantizedDistribution, params: ChannelParams, n_steps: int = 10**4,
                  seed: SeedLike = 0, *, n_cond_samples: int = 10**5,
                  generalized: bool = False, backend: str | None = None,
                  n_batches: int = 20) -> RateEstimate:
    """Achievable rate ``h(Y) - h(Y|X)`` for iid inputs from ``p_x``."""
    traj_seed, cond_seed = spawn_seeds(seed, 2)
    h_y = output_entropy_rate(p_x, params, n_steps, traj_seed, generalized=generalized,
                              backend=backend, n_batches=n_batches)
    h_yx = conditional_entropy_rate(p_x, params, n_cond_samples, cond_seed)
    se = float(np.hypot(h_y.std_error, h_yx.std_error))
    return RateEstimate(h_y.rate - h_yx.rate, se, n_steps, _seed_repr(seed))


def monotone_extension(curve: RateCurve) -> RateCurve:
    """Running maximum of the rates along increasing power.

    Each point keeps the standard error of the point its value came from.
    """
    if np.any(np.diff(curve.powers) < 0):
        raise ValueError("curve must be sorted by power")
    rates = curve.rates
    if rates.size == 0:
        return replace(curve)
    best = np.maximum.accumulate(rates)
    idx = np.arange(rates.size)
    src = np.maximum.accumulate(np.where(rates >= best, idx, 0))
    return replace(curve, rates=best, std_errs=curve.std_errs[src],
                   raw_rates=rates if curve.raw_rates is None else curve.raw_rates)


def _check_channel(w, n_in):
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or w.shape[0] != n_in:
        raise ValueError("channel matrix must have one row per input symbol")
    if np.any(w < 0) or not np.allclose(w.sum(axis=1), 1.0, atol=1e-9):
        raise ValueError("channel rows must be probability vectors")
    return w


def mutual_information(p_x, w) -> float:
    """Exact ``I(X; Y)`` in bits for a discrete memoryless channel."""
    p_x = np.asarray(p_x, dtype=float)
    w = _check_channel(w, p_x.size)
    joint = p_x[:, None] * w
    p_y = joint.sum(axis=0)
    mask = joint > 0
    ratio = w[mask] / np.broadcast_to(p_y, w.shape)[mask]
    return float(np.sum(joint[mask] * np.log2(ratio)))


def aclb_discrete(p_x, w, w_bar) -> float:
    """Auxiliary-channel lower bound on ``I(p_x; w)`` in bits.

    The expectation runs over the true channel ``w`` while the log-ratio is
    scored with ``w_bar``; equality holds when ``w_bar == w``.
    """
    p_x = np.asarray(p_x, dtype=float)
    w = _check_channel(w, p_x.size)
    w_bar = _check_channel(w_bar, p_x.size)
    if w.shape != w_bar.shape:
        raise ValueError("true and auxiliary channels need the same output alphabet")
    joint = p_x[:, None] * w
    mask = joint > 0
    if np.any(w_bar[mask] <= 0):
        raise ValueError("auxiliary channel gives zero probability where the true channel does not")
    q_y = p_x @ w_bar
    ratio = w_bar[mask] / np.broadcast_to(q_y, w.shape)[mask]
    return float(np.sum(joint[mask] * np.log2(ratio)))
