"""Compiled versus pure-Python Wishart quadrature kernels.

Times the joint-density evaluation and the nested adaptive integral on the
same inputs with both backends and reports the speed-up and the largest
relative disagreement.

    python benchmarks/bench_kernels.py [--quick]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from jamsense.wishart import WishartSpec, _kernels_py, _region, _typical_point
from jamsense.wishart._backend import COMPILED, kernels


def _time(fn, repeat=1):
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def bench_density(spec: WishartSpec, n: int):
    rng = np.random.default_rng(0)
    pts = np.sort(rng.uniform(0.1, 3 * spec.N * spec.zeta[0], (n, spec.K)), axis=1)[:, ::-1].copy()
    inv = spec.inv_zeta
    rows = []
    for name, mod in (("compiled", kernels), ("python", _kernels_py)):
        dt, vals = _time(lambda: [mod.log_density(p, inv, spec.N) for p in pts])
        rows.append((name, dt, np.asarray(vals)))
    return rows


def bench_integral(spec: WishartSpec, rel_tol: float):
    """Full-cone integral of the unnormalised density (the normalising constant)."""
    shift = float(kernels.log_density(_typical_point(spec), spec.inv_zeta, spec.N))
    var, lo, hi = _region(spec.K, spec.K - 1)
    lam_max = 4.0 * spec.N * spec.zeta[0]
    rows = []
    for name, mod in (("compiled", kernels), ("python", _kernels_py)):
        dt, (value, n_eval, failed) = _time(lambda: mod.nested_integral(
            spec.inv_zeta, spec.N, shift, var, lo, hi, 0.0, lam_max, lam_max, 0.0, rel_tol))
        rows.append((name, dt, value, n_eval, failed))
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--quick", action="store_true", help="skip the K = 3 integral in pure Python")
    args = ap.parse_args(argv)
    if not COMPILED:
        print("compiled backend unavailable; build the extension first (pip install -e .)")
        return 1

    print("log-density, 20000 points, K = 3, N = 20")
    spec3 = WishartSpec(3, 20, (3.0, 1.001, 1.0))
    (c, tc, vc), (p, tp, vp) = bench_density(spec3, 20_000)
    print(f"  compiled {tc:8.4f} s   python {tp:8.4f} s   speed-up {tp / tc:7.1f}x   "
          f"max rel diff {np.max(np.abs(vc - vp) / np.abs(vc)):.2e}")

    cases = [("K = 2, N = 10", WishartSpec(2, 10, (2.0, 1.0)), 1e-6)]
    if not args.quick:
        cases.append(("K = 3, N = 10", WishartSpec(3, 10, (2.0, 1.001, 1.0)), 1e-4))
    for label, spec, tol in cases:
        print(f"nested integral, {label}, rel_tol {tol:g}")
        (_, tc, vc, nc, fc), (_, tp, vp, np_, fp) = bench_integral(spec, tol)
        print(f"  compiled {tc:8.4f} s ({nc} evals)   python {tp:8.4f} s ({np_} evals)   "
              f"speed-up {tp / tc:7.1f}x   rel diff {abs(vc - vp) / abs(vc):.2e}   failures {fc}/{fp}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
