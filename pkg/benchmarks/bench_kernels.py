"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 200]

Each kernel is checked for agreement before timing; the numba version is
warmed up once so compilation is excluded.
"""
import argparse
import time

import numpy as np

from affgen import _kernels as K


def cases(rng):
    for n in (4, 7, 10):
        a = rng.normal(size=1 << n)
        b = rng.normal(size=1 << n)
        yield "wedge_dense", f"n={n} dense", (a, b, n)
    for n, p in ((5, 2), (7, 3), (8, 4)):
        _, tables, _ = K.blade_layout(n)
        A = rng.normal(size=(n, n))
        G = np.ascontiguousarray(A @ A.T + n * np.eye(n))
        V = np.ascontiguousarray(rng.normal(size=(n - 1, n)))
        yield "compound_matrix", f"n={n} p={p}", (G, tables[p])
        yield "vector_minors", f"n={n} p={n - 1}", (V, tables[n - 1])
    for t in (8, 64):
        coeffs = rng.normal(size=t)
        exps = rng.integers(0, 4, size=(t, 6)).astype(np.int64)
        x = rng.normal(size=6)
        yield "poly_eval", f"{t} terms", (coeffs, exps, x)
        yield "poly_grad", f"{t} terms", (coeffs, exps, x)


def best_of(fn, args, repeat):
    times = []
    for _ in range(5):
        t0 = time.perf_counter()
        for _ in range(repeat):
            fn(*args)
        times.append((time.perf_counter() - t0) / repeat)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args()
    if not K.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<16} {'case':<14} {'numpy us':>10} {'numba us':>10} {'speedup':>8}")
    for name, label, call in cases(rng):
        impl = K.implementations(name)
        np.testing.assert_allclose(impl["numba"](*call), impl["numpy"](*call), rtol=1e-10, atol=1e-10)
        t_np = best_of(impl["numpy"], call, args.repeat)
        t_nb = best_of(impl["numba"], call, args.repeat)
        print(f"{name:<16} {label:<14} {t_np * 1e6:>10.1f} {t_nb * 1e6:>10.1f} {t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
