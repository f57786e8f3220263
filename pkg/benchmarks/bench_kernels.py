"""Compare the compiled and pure-Python kernel backends.

Usage::

    python benchmarks/bench_kernels.py [--repeat 3] [--replicas 200] [--window 300]

Prints one tab-separated row per (task, backend) with the best wall time
over ``--repeat`` runs and the speed-up of the compiled kernels.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from brwcrit import ModelParams, build_truncated_operator, kernels
from brwcrit.dynamics import run_replicas


def _best(func, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        result = func()
        times.append(time.perf_counter() - start)
    return min(times), result


def eigen_task(impl, window):
    op = build_truncated_operator(ModelParams.with_beta(1.0, 1.0, 4, 1.2), window)
    diag = np.ascontiguousarray(op.diagonal)
    off = op.off_array()

    def run():
        lo, hi, _ = impl.largest_eigenvalue(diag, off, -4.0, 4.0, 1e-13, 400)
        impl.solve_shifted(diag, off, hi + 1e-13, np.ones(op.size))
        return 0.5 * (lo + hi)

    return run


def simulation_task(name, replicas):
    params = ModelParams.with_beta(1.0, 1.0, 1, 1.0)

    def run():
        summary = run_replicas(params, T=12.0, master_seed=3, replicas=replicas, backend=name)
        return float(summary.mean()[-1])

    return run


def benchmark(repeat=3, replicas=200, window=300):
    rows = []
    for task in ("top_eigenvalue", "simulate"):
        timings = {}
        answers = {}
        for name in kernels.available_backends():
            impl = kernels.get_backend(name)
            func = eigen_task(impl, window) if task == "top_eigenvalue" else simulation_task(name, replicas)
            timings[name], answers[name] = _best(func, repeat)
        if len(set(answers.values())) != 1:
            raise RuntimeError(f"backends disagree on {task}: {answers}")
        base = timings.get("python")
        for name, secs in timings.items():
            rows.append((task, name, secs, base / secs if base else float("nan")))
    return rows


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--replicas", type=int, default=200)
    parser.add_argument("--window", type=int, default=300)
    args = parser.parse_args(argv)
    print(f"# active backend: {kernels.BACKEND}; available: {', '.join(kernels.available_backends())}")
    print("task\tbackend\tseconds\tspeedup_vs_python")
    for task, name, secs, speedup in benchmark(args.repeat, args.replicas, args.window):
        print(f"{task}\t{name}\t{secs:.4f}\t{speedup:.1f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
