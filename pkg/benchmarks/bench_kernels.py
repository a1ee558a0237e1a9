"""Benchmark the compiled kernel core against the pure NumPy fallback.

Runs the hot paths (Bessel K evaluation, Matern and Gaussian Gram
assembly) through both backends, checks they agree, and prints timings.

    python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from specshift import _pykernels

try:
    from specshift import _ckernels
except ImportError:
    _ckernels = None


def _time(fn, *args, repeats=5):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def _bessel_grid(mod):
    nus = np.linspace(0.1, 9.9, 50)
    xs = np.geomspace(1e-4, 40.0, 200)
    total = 0.0
    for nu in nus:
        for x in xs:
            total += mod.besselk(float(nu), float(x))
    return total


def main():
    rng = np.random.default_rng(0)
    pts_small = rng.random((400, 2))
    pts_large = rng.random((1000, 2))

    cases = [
        ("bessel_k grid (10k evals)", _bessel_grid, ()),
        ("matern gram n=400", lambda m: m.matern_gram(pts_small, 1.7, 0.2), ()),
        ("gaussian gram n=1000", lambda m: m.gaussian_gram(pts_large, 0.2), ()),
    ]

    print(f"{'case':30s} {'pure':>10s} {'compiled':>10s} {'speedup':>8s}")
    for name, fn, _ in cases:
        t_pure, out_pure = _time(fn, _pykernels)
        if _ckernels is None:
            print(f"{name:30s} {t_pure * 1e3:9.2f}ms {'n/a':>10s} {'':>8s}")
            continue
        t_comp, out_comp = _time(fn, _ckernels)
        a = np.asarray(out_pure, dtype=float)
        b = np.asarray(out_comp, dtype=float)
        worst = np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300))
        assert worst < 1e-12, f"{name}: backends disagree (rel {worst:.3e})"
        print(f"{name:30s} {t_pure * 1e3:9.2f}ms {t_comp * 1e3:9.2f}ms "
              f"{t_pure / t_comp:7.1f}x")
    if _ckernels is None:
        print("compiled backend unavailable; built the pure path only")


if __name__ == "__main__":
    main()
