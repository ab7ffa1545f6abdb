"""Compare the compiled and numpy sweep kernels.

The workload that matters is many short multiplicative-update loops on
small dense blocks (cross-validation training blocks, restarts), where
per-call overhead dominates. A larger dense block and a sparse dynamic fit
are included for contrast.

The "auto" column is the library default: compiled for dense blocks up to
``kernels.COMPILED_MAX_CELLS`` cells, numpy otherwise.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import time

import numpy as np
from scipy import sparse

from dynnmf import FitConfig, GraphSequence, GraphSnapshot, PlantedConfig, fit_dynamic_nmf
from dynnmf import gen_planted_communities, kernels


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def small_blocks(backend):
    rng = np.random.default_rng(0)
    blocks = [(rng.random((48, 48)) < 0.3).astype(float) for _ in range(25)]

    def run():
        for B in blocks:
            U = rng.uniform(0.1, 1.1, (48, 4))
            V = rng.uniform(0.1, 1.1, (48, 4))
            kernels.mu_fit(B, U, V, 0.0, 1e-12, 1e-300, 200, kernels.squared_norm(B),
                           backend=backend)
    return run


def large_block(backend):
    rng = np.random.default_rng(1)
    A = (rng.random((600, 600)) < 0.1).astype(float)

    def run():
        U = rng.uniform(0.1, 1.1, (600, 6))
        V = rng.uniform(0.1, 1.1, (600, 6))
        kernels.mu_fit(A, U, V, 0.0, 1e-12, 1e-300, 50, kernels.squared_norm(A), backend=backend)
    return run


def dynamic_dense(backend):
    seq, _ = gen_planted_communities(PlantedConfig(100, 4, 0.3, 0.03, T=6, seed=2))
    cfg = FitConfig(K=4, lambda_t=10.0, lambda_s=0.5, tol=1e-300, max_iter=100)
    return lambda: fit_dynamic_nmf(seq, cfg, backend=backend)


def dynamic_sparse(backend):
    seq, _ = gen_planted_communities(PlantedConfig(3000, 4, 20 / 3000, 2 / 3000, T=4, seed=3))
    seq = GraphSequence([GraphSnapshot(sparse.csr_matrix(s.matrix)) for s in seq])
    cfg = FitConfig(K=4, lambda_t=10.0, tol=1e-300, max_iter=30)
    return lambda: fit_dynamic_nmf(seq, cfg, backend=backend)


CASES = [
    ("25 blocks 48x48, 200 sweeps", small_blocks),
    ("one block 600x600, 50 sweeps", large_block),
    ("dynamic n=100 T=6, 100 sweeps", dynamic_dense),
    ("dynamic sparse n=3000 T=4 (numpy path)", dynamic_sparse),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)}; auto = size-based default dispatch")
    cols = backends + ["auto"]
    print(f"{'case':42s}" + "".join(f"{c:>12s}" for c in cols) + "   python/compiled")
    for name, make in CASES:
        times = [best_of(make(None if c == "auto" else c), args.repeat) for c in cols]
        row = f"{name:42s}" + "".join(f"{t:11.3f}s" for t in times)
        if len(backends) == 2:
            row += f"    x{times[1] / times[0]:.2f}"
        print(row)


if __name__ == "__main__":
    main()
