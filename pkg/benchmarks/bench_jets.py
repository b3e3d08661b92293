#!/usr/bin/env python3
"""Benchmark the compiled jet kernels against the pure-python fallback.

Times the two raw kernels on representative table sizes, then a realistic
workload (profile jets of the funk metric, flag curvature evaluations, and
one ambient order-3 jet batch).  Run from the repository root:

    python benchmarks/bench_jets.py [--repeat N]
"""

import argparse
import math
import time

import numpy as np

from finslercheck import _jet_core_py
from finslercheck._multi_index import coeff_count, product_table

try:
    from finslercheck import _jet_core
except ImportError:
    _jet_core = None


def time_fn(fn, repeat):
    best = math.inf
    for _ in range(5):
        t0 = time.perf_counter()
        for _ in range(repeat):
            fn()
        best = min(best, (time.perf_counter() - t0) / repeat)
    return best


def bench_kernels(repeat):
    rows = []
    for nvars, order in [(3, 2), (3, 3), (4, 3), (8, 3)]:
        left, right, target = product_table(nvars, order)
        n = coeff_count(nvars, order)
        rng = np.random.default_rng(12345)
        a, b = rng.uniform(-2, 2, n), rng.uniform(-2, 2, n)
        out = np.empty(n)
        impls = {"pure": _jet_core_py}
        if _jet_core is not None:
            impls["compiled"] = _jet_core
        times = {}
        for label, impl in impls.items():
            times[f"mul/{label}"] = time_fn(
                lambda impl=impl: impl.mul(a, b, out, left, right, target), repeat
            )
            times[f"compose/{label}"] = time_fn(
                lambda impl=impl: impl.compose(
                    1.1, 0.7, -0.3, 0.2, a, out, left, right, target, order
                ),
                repeat,
            )
        rows.append((nvars, order, len(left), times))
    return rows


def bench_workload():
    """End-to-end numbers with whichever backend is active in this process."""
    from finslercheck import backend_name
    from finslercheck.metrics import builtin
    from finslercheck.projective import flag_curvature
    from finslercheck.sampling import SampleSpec, sample_domain
    from finslercheck.symmetry import killing_tensor_max_residual

    funk = builtin("funk")
    samples = sample_domain(SampleSpec.for_metric(n=2, count=200, seed=7, domain_radius=1.0))

    t0 = time.perf_counter()
    for s in samples:
        funk.phi_jet(s.r, s.u, s.v, 2)
    jet_time = (time.perf_counter() - t0) / len(samples)

    t0 = time.perf_counter()
    for s in samples:
        flag_curvature(funk, s.r, s.u, s.v)
    lam_time = (time.perf_counter() - t0) / len(samples)

    bryant = builtin("bryant", alpha=math.pi / 6)
    samples4 = sample_domain(SampleSpec.for_metric(n=4, count=20, seed=7, domain_radius=math.inf))
    t0 = time.perf_counter()
    for s in samples4:
        killing_tensor_max_residual(bryant, s.x, s.y)
    tensor_time = (time.perf_counter() - t0) / len(samples4)

    return backend_name(), jet_time, lam_time, tensor_time


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=20000, help="kernel loop count")
    args = parser.parse_args()

    if _jet_core is None:
        print("note: compiled kernels not built; showing the pure backend only\n")

    print("raw kernels (seconds per call):")
    header = f"{'m':>2} {'order':>5} {'pairs':>6}"
    labels = ["mul/pure", "compose/pure"]
    if _jet_core is not None:
        labels += ["mul/compiled", "compose/compiled"]
    print(header + "".join(f" {l:>17}" for l in labels + (["speedup(mul)"] if _jet_core else [])))
    for nvars, order, pairs, times in bench_kernels(args.repeat):
        row = f"{nvars:>2} {order:>5} {pairs:>6}"
        for label in labels:
            row += f" {times[label]:>17.3e}"
        if _jet_core is not None:
            row += f" {times['mul/pure'] / times['mul/compiled']:>12.1f}x"
        print(row)

    backend, jet_time, lam_time, tensor_time = bench_workload()
    print(f"\nworkload with the '{backend}' backend:")
    print(f"  funk profile jet (order 2)      {jet_time * 1e6:9.1f} us/point")
    print(f"  flag curvature evaluation       {lam_time * 1e6:9.1f} us/point")
    print(f"  bryant n=4 Killing tensor scan  {tensor_time * 1e3:9.2f} ms/point")
    print("\nrun FINSLERCHECK_PURE=1 python benchmarks/bench_jets.py to force the fallback")


if __name__ == "__main__":
    main()
