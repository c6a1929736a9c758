"""Complex Gaussian mixture inputs and their auxiliary-channel rate.

Each component is a proper complex Gaussian with isotropic covariance
``P_k/2 * I``. The rate scores true-channel outputs under a memoryless
auxiliary channel whose nonlinear noise variance is fixed at
``eta * E[S^3]``, so the output law of the auxiliary channel is again a
mixture and its density is explicit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from ._util import Estimate, SeedLike, make_rng, mean_and_stderr, spawn_seeds
from .channel import ChannelParams
from .estimator import RateEstimate
from .quantize import QuantizedDistribution

__all__ = [
    "CGMParams",
    "sample_cgm",
    "s_bar_cgm",
    "s_bar_cgm_exact",
    "cgm_rate_objective",
    "cgm_rate_estimate",
    "optimize_cgm",
    "project_cgm",
    "cgm_weak_approximation_check",
    "sorted_coupling_w1",
]


@dataclass(frozen=True)
class CGMParams:
    """Mixture weights, complex means and per-component total variances."""

    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        mu = np.asarray(self.means, dtype=np.complex128).reshape(-1)
        var = np.asarray(self.variances, dtype=float).reshape(-1)
        if not (w.size == mu.size == var.size) or w.size == 0:
            raise ValueError("weights, means and variances need the same nonzero length")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be nonnegative and sum to 1")
        if np.any(var < 0) or not np.all(np.isfinite(var)) or not np.all(np.isfinite(mu)):
            raise ValueError("variances must be finite and nonnegative; means finite")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", mu)
        object.__setattr__(self, "variances", var)

    @classmethod
    def gaussian(cls, P: float, K: int = 1) -> "CGMParams":
        return cls(np.full(K, 1.0 / K), np.zeros(K), np.full(K, float(P)))

    @property
    def order(self) -> int:
        return self.weights.size

    @property
    def mean(self) -> complex:
        return complex(np.dot(self.weights, self.means))

    @property
    def power(self) -> float:
        return float(np.dot(self.weights, self.variances + np.abs(self.means) ** 2))

    def is_feasible(self, P: float, rtol: float = 1e-9) -> bool:
        scale = np.sqrt(max(P, 0.0)) + 1e-300
        return abs(self.mean) <= 1e-9 * scale and abs(self.power - P) <= rtol * P

    def canonical(self) -> "CGMParams":
        """Components in a fixed order so sampling ignores labelling."""
        order = np.lexsort((self.variances, self.means.imag, self.means.real, self.weights))
        return CGMParams(self.weights[order], self.means[order], self.variances[order])

    def power_moments(self) -> tuple[float, float, float]:
        """Exact ``E|X|^2``, ``E|X|^4`` and ``E|X|^6``."""
        r = np.abs(self.means) ** 2
        p = self.variances
        w = self.weights
        return (float(np.dot(w, r + p)),
                float(np.dot(w, r**2 + 4 * r * p + 2 * p**2)),
                float(np.dot(w, r**3 + 9 * r**2 * p + 18 * r * p**2 + 6 * p**3)))

    def sixth_moment(self) -> float:
        """Exact ``E|X|^6``."""
        return self.power_moments()[2]


def s_bar_cgm_exact(params: CGMParams, N: int) -> float:
    """Closed-form ``E[S^3]`` for iid mixture inputs.

    Expands the cube of a sum of ``n = 2N + 1`` iid powers into the first
    three power moments of one input.
    """
    n = 2 * N + 1
    m1, m2, m3 = params.power_moments()
    return (n * m3 + 3 * n * (n - 1) * m2 * m1 + n * (n - 1) * (n - 2) * m1**3) / n**3


def _draw(params: CGMParams, u: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Map uniforms ``u`` and unit-per-axis complex normals ``z`` to samples."""
    c = params.canonical()
    cdf = np.cumsum(c.weights)
    comp = np.minimum(np.searchsorted(cdf, u, side="right"), c.order - 1)
    return c.means[comp] + np.sqrt(c.variances[comp] / 2.0) * z


def _std_complex(rng: np.random.Generator, shape) -> np.ndarray:
    z = rng.standard_normal((2,) + tuple(shape))
    return z[0] + 1j * z[1]


def sample_cgm(params: CGMParams, n: int, seed: SeedLike = None) -> np.ndarray:
    rng = make_rng(seed)
    u = rng.random(n)
    return _draw(params, u, _std_complex(rng, (n,)))


class _Draws:
    """Frozen random numbers reused across candidate mixtures."""

    def __init__(self, n: int, width: int, seed: SeedLike, with_noise: bool):
        rng = make_rng(seed)
        self.u = rng.random((n, width))
        self.z = _std_complex(rng, (n, width))
        if with_noise:
            self.ase = _std_complex(rng, (n,))
            self.nl = _std_complex(rng, (n,))


def _s_cubed(params: CGMParams, draws: _Draws) -> np.ndarray:
    x = _draw(params, draws.u, draws.z)
    return np.mean(x.real**2 + x.imag**2, axis=1) ** 3


def s_bar_cgm(params: CGMParams, N: int, samples: int = 10**5, seed: SeedLike = 0) -> Estimate:
    """Monte Carlo ``E[S^3]`` for iid mixture inputs over a full window."""
    if samples < 2:
        raise ValueError("need at least two samples")
    return mean_and_stderr(_s_cubed(params, _Draws(samples, 2 * N + 1, seed, False)))


def _rate_terms(params: CGMParams, chan: ChannelParams, s_bar_k: float,
                draws: _Draws) -> tuple[np.ndarray, float]:
    """Per-sample ``-log2 q(y)`` and the constant conditional-entropy term."""
    n_mem = chan.memory
    x = _draw(params, draws.u, draws.z)
    s = np.mean(x.real**2 + x.imag**2, axis=1)
    y = (x[:, n_mem]
         + np.sqrt(chan.sigma_a2 / 2.0) * draws.ase
         + np.sqrt(chan.eta * s**3 / 2.0) * draws.nl)
    c = params.canonical()
    aux = chan.sigma_a2 + chan.eta * s_bar_k
    v = c.variances + aux
    d = np.abs(y[:, None] - c.means[None, :]) ** 2
    t = -d / v - np.log(np.pi * v)
    top = t.max(axis=1)
    log_q = np.log(np.exp(t - top[:, None]) @ c.weights) + top
    return -log_q / np.log(2.0), float(np.log2(np.pi * np.e * aux))


def cgm_rate_objective(params: CGMParams, chan: ChannelParams, s_bar_k: float,
                       samples: int = 20_000, seed: SeedLike = 0) -> float:
    """Auxiliary-channel rate in bits for mixture input ``params``.

    ``s_bar_k`` is the (estimated) ``E[S^3]`` under the mixture; outputs are
    drawn from the true channel with memory.
    """
    terms, const = _rate_terms(params, chan, s_bar_k, _Draws(samples, chan.window, seed, True))
    return float(terms.mean() - const)


def cgm_rate_estimate(params: CGMParams, chan: ChannelParams, samples: int = 10**5,
                      seed: SeedLike = 0, s_samples: int = 10**5,
                      exact_s_bar: bool = True) -> RateEstimate:
    """Rate with standard error.

    ``E[S^3]`` comes from the closed form, or from ``s_samples`` Monte Carlo
    windows when ``exact_s_bar=False`` (its error then enters the total).
    """
    s_seed, o_seed = spawn_seeds(seed, 2)
    if exact_s_bar:
        sb = Estimate(s_bar_cgm_exact(params, chan.memory), 0.0)
    else:
        sb = s_bar_cgm(params, chan.memory, s_samples, s_seed)
    terms, const = _rate_terms(params, chan, sb.value, _Draws(samples, chan.window, o_seed, True))
    est = mean_and_stderr(terms)
    # first-order propagation through the log2(pi e (sigma + eta s_bar)) term
    slope = chan.eta / ((chan.sigma_a2 + chan.eta * sb.value) * np.log(2.0))
    se = float(np.hypot(est.std_error, slope * sb.std_error))
    return RateEstimate(est.value - const, se, samples, seed if isinstance(seed, int) else None)


def project_cgm(theta: np.ndarray, K: int, P: float) -> CGMParams:
    """Feasible mixture from an unconstrained vector.

    ``theta`` packs raw weights, mean real parts, mean imaginary parts and
    raw variances (means in units of sqrt(P), variances in units of P).
    Weights are renormalised, means recentred, then variances and squared
    means are scaled together to meet the power exactly.
    """
    theta = np.asarray(theta, dtype=float)
    w = np.abs(theta[:K])
    w = np.full(K, 1.0 / K) if w.sum() == 0 else w / w.sum()
    mu = (theta[K:2 * K] + 1j * theta[2 * K:3 * K]) * np.sqrt(P)
    mu = mu - np.dot(w, mu)
    var = np.abs(theta[3 * K:4 * K]) * P
    total = np.dot(w, var + np.abs(mu) ** 2)
    if total <= 0:
        return CGMParams(w, np.zeros(K), np.full(K, float(P)))
    c = P / total
    return CGMParams(w, mu * np.sqrt(c), var * c)


def optimize_cgm(K: int, P: float, chan: ChannelParams, budget: int = 20_000,
                 seed: SeedLike = 0, *, n_starts: int = 4, samples: int = 20_000,
                 s_samples: int = 10**5, validation_samples: int = 10**5,
                 exact_s_bar: bool = True,
                 initial_step: float = 0.1) -> tuple[CGMParams, RateEstimate]:
    """Multi-start Nelder-Mead search over feasible order-``K`` mixtures.

    Every candidate is projected onto the constraints before scoring and all
    candidates share the same random draws, so the objective is a
    deterministic function of the mixture. ``E[S^3]`` comes from the
    closed form unless ``exact_s_bar=False``, in which case it is
    re-estimated per candidate on ``s_samples`` shared windows. The first
    start is the Gaussian input itself. The winner is re-scored on fresh
    draws for the returned estimate.
    """
    if int(K) != K or K < 1:
        raise ValueError("mixture order must be a positive integer")
    if not P > 0:
        raise ValueError("power constraint must be positive; no zero-mean mixture with "
                         "nonzero spread fits P <= 0")
    if budget < 1:
        raise ValueError("budget must allow at least one evaluation")
    K = int(K)
    s_seed, o_seed, start_seed, val_seed = spawn_seeds(seed, 4)
    s_draws = None if exact_s_bar else _Draws(s_samples, chan.window, s_seed, False)
    o_draws = _Draws(samples, chan.window, o_seed, True)

    best = {"rate": -np.inf, "params": None}
    count = [0]

    class _Budget(Exception):
        pass

    def score(theta):
        if count[0] >= budget:
            raise _Budget
        count[0] += 1
        params = project_cgm(theta, K, P)
        if s_draws is None:
            sb = s_bar_cgm_exact(params, chan.memory)
        else:
            sb = float(_s_cubed(params, s_draws).mean())
        terms, const = _rate_terms(params, chan, sb, o_draws)
        rate = float(terms.mean() - const)
        if rate > best["rate"]:
            best["rate"], best["params"] = rate, params
        return -rate

    rng = make_rng(start_seed)
    gauss = np.concatenate([np.ones(K), np.zeros(2 * K), np.ones(K)])
    starts = [gauss]
    for _ in range(n_starts - 1):
        starts.append(np.concatenate([rng.uniform(0.2, 1.0, K), rng.normal(0, 0.5, 2 * K),
                                      rng.uniform(0.1, 1.0, K)]))
    per_start = max(budget // max(len(starts), 1), 1)
    dim = 4 * K
    for theta0 in starts:
        if count[0] >= budget:
            break
        simplex = np.vstack([theta0] + [theta0 + initial_step * np.eye(dim)[i]
                                        for i in range(dim)])
        try:
            minimize(score, theta0, method="Nelder-Mead",
                     options={"maxfev": per_start, "initial_simplex": simplex,
                              "xatol": 1e-5, "fatol": 1e-7, "adaptive": True})
        except _Budget:
            break

    result = best["params"]
    return result, cgm_rate_estimate(result, chan, validation_samples, val_seed, s_samples,
                                     exact_s_bar)


def cgm_weak_approximation_check(target: QuantizedDistribution, m: float) -> CGMParams:
    """One component per atom with variance ``1/m`` on each real axis."""
    if m <= 0:
        raise ValueError("precision index must be positive")
    atoms = np.asarray(target.atoms, dtype=np.complex128)
    return CGMParams(target.probs.copy(), atoms, np.full(atoms.size, 2.0 / m))


def sorted_coupling_w1(a: np.ndarray, b: np.ndarray) -> float:
    """Sum over real and imaginary axes of the empirical 1-D Wasserstein-1
    distance between equal-size samples (sorted coupling)."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape != b.shape:
        raise ValueError("samples must have equal size")
    return float(np.mean(np.abs(np.sort(a.real) - np.sort(b.real)))
                 + np.mean(np.abs(np.sort(a.imag) - np.sort(b.imag))))
