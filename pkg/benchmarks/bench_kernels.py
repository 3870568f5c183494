"""Time the compiled kernels against the NumPy fallback.

    python3 benchmarks/bench_kernels.py --size 128 --repeat 5
"""
import argparse
import statistics
import timeit

import numpy as np

from edgeadain import morphology
from edgeadain._backend import available_backends
from edgeadain.preprocess import nlmeans_snn


def cases(size, seed):
    rng = np.random.default_rng(seed)
    gray = rng.random((size, size))
    mask = rng.random((size, size)) < 0.45
    fp = morphology.disk(5)
    return {
        "nlmeans_snn 7/21": lambda b: nlmeans_snn(gray, 7, 21, 0.08, 16, backend=b),
        "erode r5": lambda b: morphology.erode(gray, fp, b),
        "dilate r5": lambda b: morphology.dilate(gray, fp, b),
        "label 8-conn": lambda b: morphology.label(mask, b),
    }


def run(size=128, repeat=5, seed=0):
    backends = available_backends()
    rows = []
    for name, fn in cases(size, seed).items():
        times = {}
        for b in backends:
            fn(b)  # warm-up
            times[b] = timeit.repeat(lambda: fn(b), number=1, repeat=repeat)
        rows.append((name, times))
    return backends, rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=128)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    backends, rows = run(args.size, args.repeat, args.seed)
    print(f"{args.size}x{args.size}, median of {args.repeat} runs (seconds)")
    print(f"{'kernel':<18}" + "".join(f"{b:>12}" for b in backends) + ("   speedup" if len(backends) > 1 else ""))
    for name, times in rows:
        med = {b: statistics.median(t) for b, t in times.items()}
        line = f"{name:<18}" + "".join(f"{med[b]:>12.5f}" for b in backends)
        if "compiled" in med and "python" in med:
            line += f"{med['python'] / med['compiled']:>9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
