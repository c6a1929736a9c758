"""Forward recursion for the output entropy of the memory channel.

The message over a window of inputs is collapsed onto *power classes*:
atoms sharing the same ``|x|^2``. This is exact because an output ``y_k``
depends on the exact value of ``x_k`` but on its neighbours only through
their powers, so once ``x_k`` has been scored by ``y_k`` only its power
matters downstream. A state over ``2N`` window positions therefore needs
``(L + 1)**(2N)`` entries for ``L`` distinct powers (plus a padding class
for the zero inputs before the start) instead of ``A**(2N)`` over atoms.

Two interchangeable backends run the recursion: the compiled kernel in
``_forward_ext`` (memory 1 only) and the numpy implementation here, which
handles any memory. :data:`BACKEND` names the default picked at import.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelParams
from .quantize import QuantizedDistribution

try:
    from . import _forward_ext
except ImportError:  # extension not built
    _forward_ext = None

__all__ = ["BACKEND", "available_backends", "PowerClasses", "MessagePassState",
           "ForwardRecursion", "forward_log_lambdas", "MAX_TABLE_ENTRIES"]

BACKEND = "cython" if _forward_ext is not None else "python"

MAX_TABLE_ENTRIES = 10**7

# Powers closer than this (relative to the largest) share a class. Merging
# shifts S by at most this fraction, far below double-precision effects on
# the rates.
_CLASS_RTOL = 1e-12


def available_backends() -> list[str]:
    return ["cython", "python"] if _forward_ext is not None else ["python"]


def _merge_sorted(values: np.ndarray, rtol: float) -> tuple[np.ndarray, np.ndarray]:
    """Group sorted values; returns (representatives, group id per value)."""
    if values.size == 0:
        return values, np.zeros(0, dtype=np.int64)
    tol = rtol * max(abs(values[-1]), abs(values[0]), np.finfo(float).tiny)
    new_group = np.concatenate([[True], np.diff(values) > tol])
    ids = np.cumsum(new_group) - 1
    return values[new_group], ids.astype(np.int64)


@dataclass
class PowerClasses:
    """Atoms regrouped by power, with the lookup tables the recursion needs.

    ``u_values``/``uidx`` enumerate the distinct sums of the other ``2N``
    window powers; ``uidx`` is indexed by those positions' classes, class
    ``L`` being the zero-power padding used before the first symbol.
    """

    atoms: np.ndarray          # sorted by class
    log_probs: np.ndarray
    class_start: np.ndarray    # length L + 1 offsets into atoms
    powers: np.ndarray         # length L
    weights: np.ndarray        # length L
    memory: int
    u_values: np.ndarray
    uidx: np.ndarray
    inv_v: np.ndarray = field(repr=False)       # (L, U)
    log_pi_v: np.ndarray = field(repr=False)    # (L, U)

    @property
    def n_classes(self) -> int:
        return self.powers.size

    @classmethod
    def build(cls, dist: QuantizedDistribution, params: ChannelParams) -> "PowerClasses":
        keep = dist.probs > 0
        atoms = np.asarray(dist.atoms, dtype=np.complex128)[keep]
        probs = dist.probs[keep]
        pw = atoms.real**2 + atoms.imag**2
        order = np.argsort(pw, kind="stable")
        atoms, probs, pw = atoms[order], probs[order], pw[order]
        powers, ids = _merge_sorted(pw, _CLASS_RTOL)
        n_cls = powers.size
        class_start = np.searchsorted(ids, np.arange(n_cls + 1)).astype(np.int64)
        weights = np.bincount(ids, weights=probs, minlength=n_cls)

        n_mem = params.memory
        state_entries = (n_cls + 1) ** (2 * n_mem)
        if state_entries > MAX_TABLE_ENTRIES:
            raise ValueError(
                f"message table would need {state_entries:.3g} entries "
                f"({n_cls} power classes, memory {n_mem}); limit is {MAX_TABLE_ENTRIES:.0e}"
            )

        if params.eta == 0 or n_mem == 0:
            u_values = np.zeros(1)
            uidx = np.zeros((n_cls + 1,) * (2 * n_mem), dtype=np.int64)
        else:
            ext = np.append(powers, 0.0)
            u = np.zeros(())
            for _ in range(2 * n_mem):
                u = np.add.outer(u, ext)
            flat = u.ravel()
            order_u = np.argsort(flat, kind="stable")
            reps, gid = _merge_sorted(flat[order_u], _CLASS_RTOL)
            inv = np.empty_like(gid)
            inv[order_u] = gid
            u_values, uidx = reps, inv.reshape(u.shape)

        s = (powers[:, None] + u_values[None, :]) / (2 * n_mem + 1)
        v = params.sigma_a2 + params.eta * s**3
        return cls(atoms=atoms, log_probs=np.log(probs), class_start=class_start,
                   powers=powers, weights=weights, memory=n_mem, u_values=u_values,
                   uidx=uidx, inv_v=1.0 / v, log_pi_v=np.log(np.pi * v))

    def class_terms(self, y: complex) -> tuple[np.ndarray, float]:
        """Per-class scored likelihood sums for one output, max-shifted.

        Returns ``G`` of shape ``(L, U)`` with
        ``G[b, j] * exp(shift) = sum_{x in class b} p(x) f(y | x, u_j)``.
        """
        if not hasattr(self, "_atom_tables"):
            counts = np.diff(self.class_start)
            self._atom_tables = (
                np.repeat(self.inv_v, counts, axis=0),
                self.log_probs[:, None] - np.repeat(self.log_pi_v, counts, axis=0),
            )
        inv_v, base = self._atom_tables
        d = (y.real - self.atoms.real) ** 2 + (y.imag - self.atoms.imag) ** 2
        t = base - d[:, None] * inv_v
        shift = float(t.max())
        e = np.exp(t - shift)
        return np.add.reduceat(e, self.class_start[:-1], axis=0), shift


@dataclass
class MessagePassState:
    """Normalised class-level message and the running ``sum log lambda``."""

    message: np.ndarray
    log_scale_sum: float = 0.0
    step: int = 0


class ForwardRecursion:
    """Step-by-step numpy forward recursion over power classes (any memory).

    ``step(y)`` consumes one output and returns ``log lambda_k``, the natural
    log of the predictive density ``p(y_k | y_1 .. y_{k-1})``.
    """

    def __init__(self, classes: PowerClasses):
        self.c = classes
        n_mem = classes.memory
        n_cls = classes.n_classes
        self._w_ext = np.append(classes.weights, 0.0)
        with np.errstate(divide="ignore"):
            self._inv_w_ext = np.where(self._w_ext > 0, 1.0 / self._w_ext, 0.0)
        if n_mem == 0:
            message = np.ones(())
        else:
            pad = np.zeros(n_cls + 1)
            pad[n_cls] = 1.0
            message = np.ones(())
            for _ in range(n_mem):
                message = np.multiply.outer(message, pad)
            for _ in range(n_mem):
                message = np.multiply.outer(message, self._w_ext)
        self.state = MessagePassState(message=message)

        if n_mem > 0:
            rank = 2 * n_mem + 1
            shape = [1] * rank
            shape[n_mem] = n_cls + 1
            self._centre = np.arange(n_cls + 1).reshape(shape)
            self._uidx_full = np.expand_dims(classes.uidx, n_mem)
            self._w_last = self._w_ext.reshape([1] * (rank - 1) + [-1])
            self._inv_w_centre = self._inv_w_ext.reshape(shape)

    def step(self, y: complex) -> float:
        c = self.c
        n_mem = c.memory
        g, shift = c.class_terms(y)
        if n_mem == 0:
            total = float(g[:, 0].sum())
        elif c.u_values.size == 1:
            # Likelihood ignores neighbour powers: the oldest axis sums out.
            g_ext = np.append(g[:, 0], 0.0) * self._inv_w_ext
            shape = [1] * (2 * n_mem)
            shape[n_mem - 1] = -1
            new = self.state.message.sum(axis=0)[..., None] * g_ext.reshape(shape)
            new = new * self._w_ext.reshape([1] * (2 * n_mem - 1) + [-1])
            total = float(new.sum())
        else:
            g_ext = np.vstack([g, np.zeros((1, g.shape[1]))])
            full = g_ext[self._centre, self._uidx_full]
            new = (self.state.message[..., None] * full * self._inv_w_centre
                   * self._w_last).sum(axis=0)
            total = float(new.sum())
        if not total > 0:
            raise FloatingPointError(
                f"predictive density vanished at step {self.state.step + 1} (y={y!r})"
            )
        if n_mem > 0:
            self.state.message = new / total
        log_lam = np.log(total) + shift
        self.state.log_scale_sum += log_lam
        self.state.step += 1
        return log_lam


def _run_python(y: np.ndarray, classes: PowerClasses) -> np.ndarray:
    rec = ForwardRecursion(classes)
    return np.array([rec.step(v) for v in y])


def _run_cython(y: np.ndarray, classes: PowerClasses) -> np.ndarray:
    if classes.memory != 1:
        raise ValueError("compiled kernel supports memory 1 only")
    return np.asarray(_forward_ext.forward_memory1(
        np.ascontiguousarray(y, dtype=np.complex128),
        classes.atoms, classes.log_probs, classes.class_start,
        classes.weights, np.ascontiguousarray(classes.uidx[:, :-1]),
        classes.inv_v, classes.log_pi_v,
    ))


def forward_log_lambdas(y, classes: PowerClasses, backend: str | None = None) -> np.ndarray:
    """Natural-log predictive densities ``log lambda_k`` for each output.

    ``backend`` is ``"cython"``, ``"python"`` or ``None`` (use the compiled
    kernel when it is available and applicable).
    """
    y = np.asarray(y, dtype=np.complex128).reshape(-1)
    if not np.all(np.isfinite(y)):
        raise ValueError("outputs must be finite")
    if backend is None:
        backend = "cython" if (_forward_ext is not None and classes.memory == 1) else "python"
    if backend == "cython":
        if _forward_ext is None:
            raise RuntimeError("compiled kernel is not available; build the extension")
        out = _run_cython(y, classes)
    elif backend == "python":
        out = _run_python(y, classes)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    if not np.all(np.isfinite(out)):
        bad = int(np.argmax(~np.isfinite(out)))
        raise FloatingPointError(f"predictive density underflowed at step {bad + 1}")
    return out
