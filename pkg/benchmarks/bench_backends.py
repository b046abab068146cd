"""Benchmark the compiled kernels against the numpy fallback.

Two views: microbenchmarks of the raw kernels at tracer-typical matrix sizes,
and end-to-end path lifts where the kernels sit in the inner loop. Run:

    python benchmarks/bench_backends.py [--repeat 20000] [--traces 20]
"""

import argparse
import time

import numpy as np

from implift import examples, linalg
from implift.tracer import SegmentPath, TracerOptions, lift_path

KERNELS = {
    "left_inverse": lambda a, b: linalg.left_inverse(a),
    "singular_values": lambda a, b: linalg.singular_values(a),
    "least_squares_step": lambda a, b: linalg.least_squares_step(a, b),
}

SIZES = [(2, 1), (3, 2), (4, 4), (6, 4), (6, 6)]


def time_call(fn, repeat):
    start = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - start) / repeat


def bench_kernels(repeat):
    rng = np.random.default_rng(0)
    print(f"\nkernel microbenchmarks ({repeat} calls each, microseconds/call)")
    header = f"{'kernel':<20} {'size':<7}" + "".join(
        f"{name:>12}" for name in linalg.available_backends()) + f"{'speedup':>10}"
    print(header)
    for kernel_name, kernel in KERNELS.items():
        for l, n in SIZES:
            a = rng.uniform(-1.0, 1.0, size=(l, n)) + np.eye(l, n)
            b = rng.uniform(-1.0, 1.0, size=l)
            per_backend = {}
            for backend in linalg.available_backends():
                linalg.use_backend(backend)
                per_backend[backend] = time_call(lambda: kernel(a, b), repeat)
            row = f"{kernel_name:<20} {f'{l}x{n}':<7}"
            for backend in linalg.available_backends():
                row += f"{per_backend[backend] * 1e6:>12.2f}"
            if "compiled" in per_backend:
                row += f"{per_backend['pure'] / per_backend['compiled']:>9.1f}x"
            print(row)


def bench_traces(repeat):
    print(f"\nend-to-end path lifts ({repeat} lifts each, milliseconds/lift)")
    cases = []
    diode = examples.get("diode")
    cases.append(("diode sweep", diode.problem,
                  SegmentPath([0.0], [2.0]), np.array([0.0])))
    annulus = examples.get("annulus")
    cases.append(("annulus turn", annulus.problem,
                  annulus.monodromy_loop, annulus.default_y_start))
    circle = examples.get("constrained-circle")
    cases.append(("constrained loop", circle.problem,
                  circle.monodromy_loop, circle.default_y_start))
    opts = TracerOptions(h_init=1e-3, h_max=1e-2)
    header = f"{'case':<18}" + "".join(
        f"{name:>12}" for name in linalg.available_backends()) + f"{'speedup':>10}"
    print(header)
    for label, problem, path, y0 in cases:
        per_backend = {}
        for backend in linalg.available_backends():
            linalg.use_backend(backend)
            trace = lift_path(problem, path, y0, opts)
            assert trace.completed, label
            per_backend[backend] = time_call(
                lambda: lift_path(problem, path, y0, opts), repeat)
        row = f"{label:<18}"
        for backend in linalg.available_backends():
            row += f"{per_backend[backend] * 1e3:>12.2f}"
        if "compiled" in per_backend:
            row += f"{per_backend['pure'] / per_backend['compiled']:>9.1f}x"
        print(row)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=20000,
                        help="calls per kernel microbenchmark")
    parser.add_argument("--traces", type=int, default=20,
                        help="lifts per end-to-end case")
    args = parser.parse_args()
    default = linalg.current_backend()
    print(f"available backends: {', '.join(linalg.available_backends())} "
          f"(default: {default})")
    try:
        bench_kernels(args.repeat)
        bench_traces(args.traces)
    finally:
        linalg.use_backend(default)


if __name__ == "__main__":
    main()
