"""Benchmark the numba kernels against the pure-numpy fallback.

Usage:
    python benchmarks/bench_kernels.py [--labels 20000] [--merge-labels 3000]

The same arrays run through both implementations; timings include one
warm-up call so numba's JIT compilation is not billed to the comparison.
Set KBFORGE_PURE_NUMPY=1 to confirm the fallback is what the package
then uses everywhere.
"""

from __future__ import annotations

import argparse
import random
import time

import numpy as np

from kbforge import kernels


def make_labels(n: int, seed: int = 2024) -> list[str]:
    rng = random.Random(seed)
    alphabet = "abcdefghijklmnopqrstuvwxyzABC _-"
    return [
        "".join(rng.choice(alphabet) for _ in range(rng.randint(3, 24))) for _ in range(n)
    ]


def timed(fn, *args, repeats: int = 3) -> tuple[float, object]:
    fn(*args)  # warm-up (JIT compile / cache touch)
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--labels", type=int, default=20_000)
    parser.add_argument("--merge-labels", type=int, default=3_000)
    args = parser.parse_args()

    labels = make_labels(args.labels)
    codes, offsets = kernels.labels_to_arrays(labels)

    print(f"embedding {args.labels} labels into {kernels.EMBED_DIM} dims")
    np_time, np_emb = timed(kernels._embed_rows_np, codes, offsets)
    print(f"  numpy fallback : {np_time * 1e3:9.1f} ms")
    if kernels.PURE_NUMPY:
        print("  numba          : disabled (KBFORGE_PURE_NUMPY or numba missing)")
        emb = np_emb
    else:
        jit_time, jit_emb = timed(kernels._embed_rows_jit, codes, offsets)
        print(f"  numba @njit    : {jit_time * 1e3:9.1f} ms   ({np_time / jit_time:4.1f}x)")
        same = np.array_equal(np_emb, jit_emb)
        print(f"  bit-identical  : {same}")
        emb = jit_emb

    n = args.merge_labels
    sub = np.ascontiguousarray(emb[:n])
    first = np.arange(1, n + 1, dtype=np.int64).clip(max=n)
    preference = np.arange(n, dtype=np.int64)

    print(f"\nbest-merge-target search over {n} labels ({n * (n - 1) // 2} pairs)")
    np_time, np_best = timed(kernels._best_targets_np, sub, first, preference)
    print(f"  numpy fallback : {np_time * 1e3:9.1f} ms")
    if not kernels.PURE_NUMPY:
        jit_time, jit_best = timed(kernels._best_targets_jit, sub, first, preference)
        print(f"  numba @njit    : {jit_time * 1e3:9.1f} ms   ({np_time / jit_time:4.1f}x)")
        agree = np.array_equal(np_best[0], jit_best[0])
        print(f"  same choices   : {agree}")


if __name__ == "__main__":
    main()
