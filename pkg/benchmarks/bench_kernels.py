"""Time the compiled kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--repeat 5]
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from doakit import kernels


def _cases(rng):
    M, P = 256, 180001
    A = rng.standard_normal((M, M)) + 1j * rng.standard_normal((M, M))
    B = A @ A.conj().T
    psi = np.linspace(-np.pi, np.pi, P)
    power = rng.standard_normal(P)
    n = 2 * (M - 1)
    true = np.exp(1j * rng.uniform(-np.pi, np.pi, n)) * rng.uniform(0.5, 1.5, n)
    coeffs = np.poly(true).astype(complex)
    coeffs /= coeffs[0]
    r = abs(coeffs[-1]) ** (1 / n)
    init = r * np.exp(1j * (2 * np.pi * np.arange(n) / n + 0.4))
    return {
        "diagonal_sums (M=256)": lambda k: k.diagonal_sums(B),
        "scan_quadratic (M=256, P=180001)": lambda k, s=kernels.get_backend("python").diagonal_sums(B):
            k.scan_quadratic(s, psi),
        "local_maxima (P=180001)": lambda k: k.local_maxima(power),
        "aberth (degree 510)": lambda k: k.aberth(coeffs, init, 500),
        "newton_step (degree 510)": lambda k: k.newton_step(coeffs, true),
    }


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    backends = kernels.available_backends()
    cases = _cases(np.random.default_rng(0))
    print(f"backends: {', '.join(backends)} (active: {kernels.BACKEND})")
    header = f"{'kernel':36s}" + "".join(f"{b + ' [ms]':>14s}" for b in backends)
    if len(backends) > 1:
        header += f"{'speedup':>10s}"
    print(header)
    for name, fn in cases.items():
        t = {}
        for b in backends:
            k = kernels.get_backend(b)
            fn(k)  # warm-up
            t[b] = min(timeit.repeat(lambda: fn(k), number=1, repeat=args.repeat)) * 1e3
        line = f"{name:36s}" + "".join(f"{t[b]:14.3f}" for b in backends)
        if "native" in t and "python" in t:
            line += f"{t['python'] / t['native']:9.1f}x"
        print(line)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
