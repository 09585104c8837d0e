"""Benchmark the compiled kernels against the pure-numpy fallback.

Times the bandwidth computation, the fused KDE likelihood/gradient, and
the full coefficient-ascent loop on synthetic banks at a few sizes, and
verifies that both backends agree numerically on every case.

Run: python benchmarks/bench_backends.py [--repeats N]
"""

import argparse
import time

import numpy as np

from poisonlab.backends import get_backend


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_case(n, d, k, repeats):
    rng = np.random.default_rng(12345)
    bank = rng.normal(size=(n, d))
    x = rng.normal(size=d)
    protos = bank[rng.choice(n, size=k, replace=False)]
    beta0 = rng.uniform(0.0, 1.0, size=k)
    lb = np.full(d, -10.0)
    ub = np.full(d, 10.0)
    h = None

    rows = []
    results = {}
    for name in ("numpy", "cython"):
        try:
            be = get_backend(name)
        except ImportError:
            print(f"  {name}: extension unavailable, skipped")
            continue
        h = be.mean_pairwise_distance(bank)
        timings = {
            "bandwidth": _time(lambda: be.mean_pairwise_distance(bank), repeats),
            "kde_grad": _time(lambda: be.kde_likelihood_grad(bank, h, x), repeats),
            "ascent": _time(lambda: be.beta_ascent(protos, bank, h, lb, ub,
                                                   beta0, 0.01, 1e-05, 200), repeats),
        }
        results[name] = be.beta_ascent(protos, bank, h, lb, ub, beta0, 0.01, 1e-05, 200)
        rows.append((name, timings))

    print(f"bank {n}x{d}, k={k}:")
    for name, timings in rows:
        print(f"  {name:>6}: " + "  ".join(f"{op}={t * 1e3:8.3f} ms"
                                           for op, t in timings.items()))
    if len(rows) == 2:
        base = dict(rows)["numpy"]
        fast = dict(rows)["cython"]
        print("  speedup: " + "  ".join(f"{op}={base[op] / fast[op]:6.2f}x"
                                        for op in base))
        beta_np, _, p_np, _, _ = results["numpy"]
        beta_cy, _, p_cy, _, _ = results["cython"]
        dbeta = float(np.abs(beta_np - beta_cy).max())
        dp = abs(p_np - p_cy)
        print(f"  agreement: max|beta diff|={dbeta:.3e}  |p diff|={dp:.3e}")
        assert dbeta < 1e-9 and dp < 1e-12, "backend disagreement"


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repeats per case (best is reported)")
    args = parser.parse_args()
    for n, d, k in ((200, 2, 5), (1000, 50, 15), (1000, 784, 15)):
        bench_case(n, d, k, args.repeats)


if __name__ == "__main__":
    main()
