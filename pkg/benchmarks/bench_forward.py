"""Time the compiled and numpy forward recursions on the same trajectory.

    python benchmarks/bench_forward.py [--steps 2000] [--nq 6 10 20]
"""

import argparse
import time

import numpy as np

from fibercap import DEFAULT_PARAMS, available_backends, quantized_complex_gaussian
from fibercap.channel import simulate
from fibercap.forward import PowerClasses, forward_log_lambdas


def bench(nq, steps, eta, repeats=3):
    chan = DEFAULT_PARAMS.replace(eta=eta)
    dist = quantized_complex_gaussian(5e-4, nq, 1e-5).trim(1e-12)
    x = dist.sample(steps + chan.memory, seed=1)
    y = simulate(x, chan, seed=2, n=steps).y
    classes = PowerClasses.build(dist, chan)
    row = {"nq": nq, "eta": eta, "atoms": len(dist), "classes": classes.n_classes}
    ref = None
    for backend in available_backends():
        best = np.inf
        for _ in range(repeats):
            t0 = time.perf_counter()
            out = forward_log_lambdas(y, classes, backend)
            best = min(best, time.perf_counter() - t0)
        row[backend] = best / steps * 1e6
        if ref is None:
            ref = out
        else:
            row["max_diff"] = float(np.max(np.abs(out - ref)))
    return row


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--steps", type=int, default=2000)
    ap.add_argument("--nq", type=int, nargs="+", default=[6, 10, 20])
    args = ap.parse_args()
    backends = available_backends()
    print("backends:", ", ".join(backends))
    cols = "".join(f"{b + ' us/step':>18}" for b in backends)
    print(f"{'nq':>4}{'eta':>8}{'atoms':>7}{'classes':>9}{cols}{'speedup':>9}{'max diff':>11}")
    for eta in (0.0, DEFAULT_PARAMS.eta):
        for nq in args.nq:
            r = bench(nq, args.steps, eta)
            times = "".join(f"{r[b]:18.1f}" for b in backends)
            speed = f"{r['python'] / r['cython']:9.1f}" if "cython" in r else f"{'-':>9}"
            diff = f"{r['max_diff']:11.1e}" if "max_diff" in r else f"{'-':>11}"
            print(f"{nq:4d}{eta:8.0f}{r['atoms']:7d}{r['classes']:9d}{times}{speed}{diff}")


if __name__ == "__main__":
    main()
