"""Command-line power sweeps.

``fibercap run`` evaluates one method over a power grid and writes a CSV;
``fibercap compare`` runs several config files on the same grid and merges
them into one table. Config files are flat ``key = value`` text whose keys
are the long flag names; flags given on the command line override them.
"""

from __future__ import annotations

import argparse
import io
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._util import spawn_seeds
from .bounds import PowerGrid, RateCurve, capacity_lower_bound, gn_capacity
from .channel import DEFAULT_PARAMS, ChannelParams
from .estimator import monotone_extension, rate_estimate
from .quantize import quantized_complex_gaussian

__all__ = ["RunConfig", "load_config", "run", "compare", "write_csv", "dbm_to_w",
           "w_to_dbm", "main"]

METHODS = ("closed-form", "gn", "mc", "cgm")
CSV_HEADER = "power_w,power_dbm,rate_bits_per_symbol,std_err,method,memory_n,seed"

DEFAULTS = {
    "eta": DEFAULT_PARAMS.eta,
    "sigma_a2": DEFAULT_PARAMS.sigma_a2,
    "memory": DEFAULT_PARAMS.memory,
    "method": "closed-form",
    "pmin_dbm": -40.0,
    "pmax_dbm": 10.0,
    "pstep_dbm": 0.5,
    "ns": 10_000,
    "nq": 20,
    "eps": 1e-5,
    "min_prob": 1e-12,
    "k": 5,
    "budget": 20_000,
    "seed": 0,
    "out": None,
    "jobs": 1,
    "name": None,
}
_TYPES = {"eta": float, "sigma_a2": float, "memory": int, "method": str, "pmin_dbm": float,
          "pmax_dbm": float, "pstep_dbm": float, "ns": int, "nq": int, "eps": float,
          "min_prob": float, "k": int, "budget": int, "seed": int, "out": str, "jobs": int,
          "name": str}


def dbm_to_w(p_dbm):
    return 1e-3 * 10.0 ** (np.asarray(p_dbm, dtype=float) / 10.0)


def w_to_dbm(p_w):
    return 10.0 * np.log10(np.asarray(p_w, dtype=float) / 1e-3)


@dataclass(frozen=True)
class RunConfig:
    chan: ChannelParams
    grid: PowerGrid
    method: str = "closed-form"
    ns: int = 10_000
    nq: int = 20
    eps: float = 1e-5
    min_prob: float = 1e-12
    k: int = 5
    budget: int = 20_000
    seed: int = 0
    out: str | None = None
    jobs: int = 1
    name: str | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {', '.join(METHODS)}")
        if self.method == "mc":
            if self.ns < 1000:
                raise ValueError("mc needs ns >= 1000")
            if self.nq < 2 or not 0 < self.eps < 1:
                raise ValueError("mc needs nq >= 2 and 0 < eps < 1")
            if not 0 <= self.min_prob < 1:
                raise ValueError("min-prob must lie in [0, 1)")
        if self.method == "cgm" and (self.k < 1 or self.budget < 1):
            raise ValueError("cgm needs k >= 1 and budget >= 1")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")

    @property
    def label(self) -> str:
        return self.name or f"{self.method}_N{self.chan.memory}"

    @classmethod
    def from_mapping(cls, values: dict) -> "RunConfig":
        v = dict(DEFAULTS)
        v.update({k: x for k, x in values.items() if x is not None})
        chan = ChannelParams(eta=v["eta"], sigma_a2=v["sigma_a2"], memory=v["memory"])
        grid = PowerGrid.from_dbm(v["pmin_dbm"], v["pmax_dbm"], v["pstep_dbm"])
        keep = {k: v[k] for k in ("method", "ns", "nq", "eps", "min_prob", "k", "budget",
                                  "seed", "out", "jobs", "name")}
        return cls(chan=chan, grid=grid, **keep)


def _key(raw: str) -> str:
    return raw.strip().lstrip("-").replace("-", "_")


def load_config(path) -> dict:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    values = {}
    text = Path(path).read_text()
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, raw = line.split("=", 1)
        key = _key(key)
        if key not in _TYPES:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = _TYPES[key](raw.strip())
        except ValueError:
            raise ValueError(f"{path}:{lineno}: bad value for {key}: {raw.strip()!r}") from None
    return values


def _mc_point(P, cfg: RunConfig, seed):
    dist = quantized_complex_gaussian(P, cfg.nq, cfg.eps)
    if cfg.min_prob > 0:
        dist = dist.trim(cfg.min_prob)
    est = rate_estimate(dist, cfg.chan, cfg.ns, seed, generalized=cfg.chan.memory != 1)
    return est.rate, est.std_error


def _cgm_point(P, cfg: RunConfig, seed):
    from .cgm import optimize_cgm

    _, est = optimize_cgm(cfg.k, P, cfg.chan, cfg.budget, seed)
    return est.rate, est.std_error


def run(cfg: RunConfig, write: bool = True) -> RateCurve:
    """Evaluate ``cfg.method`` over the grid; optionally write ``cfg.out``."""
    powers = cfg.grid.powers
    if cfg.method == "closed-form":
        rates, errs = capacity_lower_bound(powers, cfg.chan), np.zeros(powers.size)
    elif cfg.method == "gn":
        rates, errs = gn_capacity(powers, cfg.chan), np.zeros(powers.size)
    else:
        point = _mc_point if cfg.method == "mc" else _cgm_point
        seeds = spawn_seeds(cfg.seed, powers.size)
        args = (powers, [cfg] * powers.size, seeds)
        if cfg.jobs > 1:
            with ProcessPoolExecutor(cfg.jobs) as pool:
                results = list(pool.map(point, *args))
        else:
            results = list(map(point, *args))
        rates = np.array([r for r, _ in results])
        errs = np.array([e for _, e in results])
    curve = RateCurve(powers, np.asarray(rates, dtype=float), cfg.method, cfg.chan,
                      std_errs=errs, seed=cfg.seed,
                      n_samples=cfg.ns if cfg.method == "mc" else None)
    if cfg.method in ("mc", "cgm"):
        curve = monotone_extension(curve)
    curve.rates = np.maximum(curve.rates, 0.0)
    if write:
        _emit(write_csv(curve), cfg.out)
    return curve


def _fmt(x) -> str:
    return format(float(x), ".17g")


def write_csv(curve: RateCurve) -> str:
    seed = "" if curve.seed is None else str(curve.seed)
    lines = [CSV_HEADER]
    for p, r, e in zip(curve.powers, curve.rates, curve.std_errs):
        lines.append(",".join([_fmt(p), _fmt(w_to_dbm(p)), _fmt(r), _fmt(e), curve.method,
                               str(curve.params.memory), seed]))
    return "\n".join(lines) + "\n"


def _emit(text: str, out):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def compare(configs: list[RunConfig], out=None) -> str:
    """Run each config and merge rates into one column per config.

    Columns are ``<label>`` and ``<label>_std_err``; repeated labels get a
    numeric suffix. All configs must share the same grid.
    """
    if not configs:
        raise ValueError("nothing to compare")
    ref = configs[0].grid.powers
    for cfg in configs[1:]:
        if not np.array_equal(cfg.grid.powers, ref):
            raise ValueError(f"grid of {cfg.label!r} differs from {configs[0].label!r}")
    labels, seen = [], {}
    for cfg in configs:
        n = seen.get(cfg.label, 0) + 1
        seen[cfg.label] = n
        labels.append(cfg.label if n == 1 else f"{cfg.label}_{n}")
    curves = [run(cfg, write=False) for cfg in configs]
    buf = io.StringIO()
    buf.write(",".join(["power_w", "power_dbm"]
                       + [c for lab in labels for c in (lab, f"{lab}_std_err")]) + "\n")
    for i, p in enumerate(ref):
        row = [_fmt(p), _fmt(w_to_dbm(p))]
        for c in curves:
            row += [_fmt(c.rates[i]), _fmt(c.std_errs[i])]
        buf.write(",".join(row) + "\n")
    text = buf.getvalue()
    _emit(text, out)
    return text


def _add_run_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="flat key = value file; flags override it")
    p.add_argument("--eta", type=float, help="nonlinearity coefficient (W^-2)")
    p.add_argument("--sigma-a2", type=float, help="ASE noise variance (W)")
    p.add_argument("--memory", type=int, help="window half-width N")
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--pmin-dbm", type=float)
    p.add_argument("--pmax-dbm", type=float)
    p.add_argument("--pstep-dbm", type=float)
    p.add_argument("--ns", type=int, help="trajectory length for mc")
    p.add_argument("--nq", type=int, help="quantizer levels per half axis for mc")
    p.add_argument("--eps", type=float, help="quantizer clipping probability for mc")
    p.add_argument("--min-prob", type=float, help="drop mc atoms below this probability")
    p.add_argument("--k", type=int, help="mixture order for cgm")
    p.add_argument("--budget", type=int, help="objective evaluations per point for cgm")
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, help="worker processes for grid points")
    p.add_argument("--name", help="column label used by compare")
    p.add_argument("--out", help="CSV path (stdout if omitted)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fibercap",
                                     description="Achievable-rate sweeps for the "
                                                 "finite-memory nonlinear fiber channel.")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_run_flags(sub.add_parser("run", help="evaluate one method over a power grid"))
    cmp_p = sub.add_parser("compare", help="merge several configs on a shared grid")
    cmp_p.add_argument("configs", nargs="+", help="config files")
    cmp_p.add_argument("--out", help="CSV path (stdout if omitted)")
    cmp_p.add_argument("--jobs", type=int, help="worker processes per config")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values = load_config(args.config) if args.config else {}
    for key in _TYPES:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    return RunConfig.from_mapping(values)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            run(config_from_args(args))
        else:
            configs = []
            for path in args.configs:
                values = load_config(path)
                if args.jobs is not None:
                    values["jobs"] = args.jobs
                configs.append(RunConfig.from_mapping(values))
            compare(configs, args.out)
    except (ValueError, OSError, FloatingPointError) as exc:
        print(f"fibercap: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
