"""Time the hot kernels under the numba and pure-numpy backends.

    python benchmarks/bench_kernels.py [--n 20000] [--d 300] [--repeat 3]

Numba compilation happens in a warm-up call and is excluded.
"""

import argparse
import os
import time

import numpy as np

from relrep import _kernels
from relrep.anchors import select_kmeans
from relrep.core import EmbeddingSpace
from relrep.metrics import alignment_report


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--n", type=int, default=5000)
    p.add_argument("--d", type=int, default=300)
    p.add_argument("--m", type=int, default=300)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()

    rng = np.random.default_rng(0)
    X = rng.standard_normal((args.n, args.d))
    U = X / np.linalg.norm(X, axis=1, keepdims=True)
    S = U[:1024] @ U.T
    rank = np.arange(args.n)
    space = EmbeddingSpace("bench", [f"w{i}" for i in range(args.n)], X)

    cases = {
        "fps_order": lambda: _kernels.fps_order(X, args.m, 0),
        "nearest_center": lambda: _kernels.nearest_center(X, X[:args.m]),
        "topk_rows(1024 x n)": lambda: _kernels.topk_rows(S, args.k, rank),
        "select_kmeans": lambda: select_kmeans(space, min(args.m, 64), 0),
        "alignment_report": lambda: alignment_report(space, space, args.k),
    }
    backends = _kernels.available_backends()
    print(f"n={args.n} d={args.d} m={args.m} k={args.k}; backends: {', '.join(backends)}")
    print(f"{'kernel':<22}" + "".join(f"{b:>12}" for b in backends))
    for name, fn in cases.items():
        row = []
        for b in backends:
            os.environ["RELREP_BACKEND"] = b
            row.append(best_of(fn, args.repeat))
        print(f"{name:<22}" + "".join(f"{t:>11.3f}s" for t in row))
    os.environ.pop("RELREP_BACKEND", None)


if __name__ == "__main__":
    main()
