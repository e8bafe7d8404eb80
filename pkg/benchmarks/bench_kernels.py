"""Benchmark the compiled kernels against the pure-Python fallback.

Times ``katz_series_rows`` (truncated walk-count series from a batch of
source rows) and ``haversine_pairs`` (great-circle distances for index
pairs) on seeded random inputs, reporting best-of-N wall time per
backend plus the max absolute disagreement between backends on the same
input. Run from the repository root:

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --nodes 5000 --density 0.002
"""

import argparse
import time

import numpy as np
import scipy.sparse as sp

from geokatz._kernels import BACKEND, get_backend


def _random_case(rng, n, density):
    adj = sp.random(n, n, density=density, format="csr",
                    random_state=np.random.RandomState(rng.integers(2**31)),
                    data_rvs=lambda k: np.ones(k))
    adj.setdiag(0)
    adj.eliminate_zeros()
    at = sp.csr_matrix(adj.T)
    at.sort_indices()
    lat = np.radians(rng.uniform(-60, 60, n))
    lon = np.radians(rng.uniform(-180, 180, n))
    return adj, at, lat, lon


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - start)
    return best, result


def _available_backends():
    try:
        get_backend("cython")
        return ("python", "cython")
    except (ImportError, ValueError):
        return ("python",)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--nodes", type=int, default=2000,
                        help="graph size (default 2000)")
    parser.add_argument("--density", type=float, default=0.005,
                        help="adjacency density (default 0.005)")
    parser.add_argument("--sources", type=int, default=400,
                        help="source rows per series call (default 400)")
    parser.add_argument("--pairs", type=int, default=2_000_000,
                        help="haversine pair count (default 2e6)")
    parser.add_argument("--max-len", type=int, default=20,
                        help="series truncation length (default 20)")
    parser.add_argument("--repeats", type=int, default=3,
                        help="timing repeats, best is kept (default 3)")
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    adj, at, lat, lon = _random_case(rng, args.nodes, args.density)
    sources = np.sort(rng.choice(args.nodes, size=min(args.sources,
                                                      args.nodes),
                                 replace=False)).astype(np.int64)
    beta = 0.2 / max(args.nodes * args.density, 1.0)
    indptr = at.indptr.astype(np.int32)
    indices = at.indices.astype(np.int32)
    data = at.data.astype(np.float64)
    src = rng.integers(args.nodes, size=args.pairs).astype(np.int64)
    dst = rng.integers(args.nodes, size=args.pairs).astype(np.int64)

    backends = _available_backends()
    print(f"active backend: {BACKEND}; timing: {', '.join(backends)}")
    print(f"graph: {args.nodes} nodes, {adj.nnz} edges, "
          f"{len(sources)} source rows, beta={beta:.4g}, "
          f"max_len={args.max_len}; {args.pairs} coordinate pairs")
    print()

    results = {}
    for kernel in ("katz_series_rows", "haversine_pairs"):
        times = {}
        outputs = {}
        for name in backends:
            series, haversine = get_backend(name)
            if kernel == "katz_series_rows":
                call = lambda: series(indptr, indices, data, args.nodes,
                                      sources, beta, args.max_len, 1e-12)
            else:
                call = lambda: haversine(lat, lon, src, dst)
            times[name], outputs[name] = _time(call, args.repeats)
        results[kernel] = (times, outputs)

    width = max(len(k) for k in results)
    header = f"{'kernel':<{width}}  " + "".join(f"{b:>12}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}{'max |diff|':>12}"
    print(header)
    for kernel, (times, outputs) in results.items():
        row = f"{kernel:<{width}}  " + "".join(
            f"{times[b] * 1e3:>10.1f}ms" for b in backends)
        if len(backends) == 2:
            diff = float(np.max(np.abs(outputs["python"]
                                       - outputs["cython"])))
            row += f"{times['python'] / times['cython']:>9.2f}x"
            row += f"{diff:>12.3g}"
        print(row)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
