"""Finite-memory optical channel with Kerr-type nonlinear noise.

The channel maps complex inputs ``x`` to outputs

    y_i = x_i + a_i + z_i * sqrt(eta * S_i**3)

where ``a_i`` is ASE noise with variance ``sigma_a2``, ``z_i`` is unit
circular complex Gaussian noise and ``S_i`` is the average input power over
the window ``[i - N, i + N]``. Inputs outside the sequence count as zero
power. Indices are 0-based throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ._util import SeedLike, complex_normal, make_rng

__all__ = [
    "ChannelParams",
    "SimOutput",
    "as_sequence",
    "local_power",
    "local_powers",
    "simulate",
    "simulate_equivalent",
    "conditional_density",
    "log_conditional_density",
    "DEFAULT_PARAMS",
]


@dataclass(frozen=True)
class ChannelParams:
    """Channel constants.

    Attributes
    ----------
    eta : float
        Nonlinearity coefficient in W^-2.
    sigma_a2 : float
        ASE noise variance in W.
    memory : int
        Window half-width ``N``; ``S_i`` averages ``2N + 1`` input powers.
    """

    eta: float
    sigma_a2: float
    memory: int = 1

    def __post_init__(self):
        if not np.isfinite(self.eta) or self.eta < 0:
            raise ValueError(f"eta must be finite and >= 0, got {self.eta}")
        if not np.isfinite(self.sigma_a2) or self.sigma_a2 <= 0:
            raise ValueError(f"sigma_a2 must be finite and > 0, got {self.sigma_a2}")
        if int(self.memory) != self.memory or self.memory < 0:
            raise ValueError(f"memory must be a nonnegative integer, got {self.memory}")
        object.__setattr__(self, "memory", int(self.memory))

    @property
    def window(self) -> int:
        return 2 * self.memory + 1

    def noise_variance(self, s):
        """Total per-symbol noise variance for local power ``s``."""
        return self.sigma_a2 + self.eta * np.asarray(s, dtype=float) ** 3

    def replace(self, **changes) -> "ChannelParams":
        fields = {"eta": self.eta, "sigma_a2": self.sigma_a2, "memory": self.memory}
        fields.update(changes)
        return ChannelParams(**fields)


# System constants used for the numerical comparisons (eta in W^-2, sigma in W).
DEFAULT_PARAMS = ChannelParams(eta=7244.0, sigma_a2=4.1e-6, memory=1)


@dataclass
class SimOutput:
    """Channel outputs ``y`` with the local powers ``s`` that produced them."""

    y: np.ndarray
    s: np.ndarray


def as_sequence(x) -> np.ndarray:
    """Validate and convert to a complex128 array (last axis is time)."""
    x = np.asarray(x, dtype=np.complex128)
    if x.ndim == 0:
        x = x.reshape(1)
    if x.shape[-1] == 0:
        raise ValueError("input sequence is empty")
    if not np.all(np.isfinite(x)):
        raise ValueError("input sequence contains NaN or Inf")
    return x


def local_powers(x, memory: int, n: int | None = None) -> np.ndarray:
    """``S_i`` for ``i = 0 .. n-1`` along the last axis.

    Entries of ``x`` beyond either end contribute zero. ``n`` defaults to
    ``len(x)``.
    """
    x = as_sequence(x)
    length = x.shape[-1]
    if n is None:
        n = length
    if not 1 <= n <= length:
        raise ValueError(f"need 1 <= n <= {length}, got {n}")
    power = x.real**2 + x.imag**2
    pad = [(0, 0)] * (power.ndim - 1) + [(memory, memory)]
    padded = np.pad(power, pad)
    windows = sliding_window_view(padded, 2 * memory + 1, axis=-1)
    return windows[..., :n, :].sum(axis=-1) / (2 * memory + 1)


def local_power(x, i: int, params: ChannelParams) -> float:
    """Average of ``|x_k|^2`` over ``k`` in ``[i - N, i + N]`` (0-based ``i``)."""
    x = as_sequence(x)
    if x.ndim != 1:
        raise ValueError("local_power expects a 1-D sequence")
    if not 0 <= i < x.size:
        raise IndexError(f"index {i} out of range for sequence of length {x.size}")
    n_mem = params.memory
    lo, hi = max(0, i - n_mem), min(x.size, i + n_mem + 1)
    window = x[lo:hi]
    return float(np.sum(window.real**2 + window.imag**2) / (2 * n_mem + 1))


def _split(x, params: ChannelParams, n: int | None):
    x = as_sequence(x)
    if n is None:
        n = x.shape[-1] - params.memory
    if n < 1:
        raise ValueError(
            f"need at least memory + 1 = {params.memory + 1} inputs, got {x.shape[-1]}"
        )
    s = local_powers(x, params.memory, n)
    return x[..., :n], s


def simulate(x, params: ChannelParams, seed: SeedLike = None, n: int | None = None) -> SimOutput:
    """Pass ``x`` through the channel with separate ASE and nonlinear noise.

    ``x`` holds ``n + N`` inputs (trailing axis); outputs are produced for
    the first ``n``, so the right edge sees real future inputs. Leading axes
    are treated as independent batches.
    """
    xs, s = _split(x, params, n)
    rng = make_rng(seed)
    ase = complex_normal(rng, xs.shape, params.sigma_a2)
    z = complex_normal(rng, xs.shape)
    y = xs + ase + z * np.sqrt(params.eta * s**3)
    return SimOutput(y=y, s=s)


def simulate_equivalent(
    x, params: ChannelParams, seed: SeedLike = None, n: int | None = None
) -> SimOutput:
    """Single-draw form: ``y_i = x_i + z_i * sqrt(sigma_a2 + eta * S_i**3)``."""
    xs, s = _split(x, params, n)
    rng = make_rng(seed)
    z = complex_normal(rng, xs.shape)
    y = xs + z * np.sqrt(params.noise_variance(s))
    return SimOutput(y=y, s=s)


def _window_stats(x_window, params: ChannelParams):
    x_window = np.asarray(x_window, dtype=np.complex128)
    if x_window.shape[-1] != params.window:
        raise ValueError(
            f"window must have 2N+1 = {params.window} entries, got {x_window.shape[-1]}"
        )
    s = np.mean(x_window.real**2 + x_window.imag**2, axis=-1)
    return x_window[..., params.memory], params.noise_variance(s)


def log_conditional_density(y, x_window, params: ChannelParams):
    """Natural log of :func:`conditional_density`."""
    centre, v = _window_stats(x_window, params)
    d = np.abs(np.asarray(y) - centre) ** 2
    return -d / v - np.log(np.pi * v)


def conditional_density(y, x_window, params: ChannelParams):
    """Density of output ``y`` given the ``2N + 1`` inputs around it.

    Out-of-range window entries should be passed as zeros. The result is
    the circular complex Gaussian density with mean at the window centre and
    variance ``sigma_a2 + eta * S**3``.
    """
    return np.exp(log_conditional_density(y, x_window, params))
