"""Compare the compiled and numpy kernel backends.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5]

Each kernel runs on identical inputs with both backends; the table lists the
best wall time of ``--repeat`` runs, the speedup and the largest absolute
difference between the two outputs.
"""
from __future__ import annotations

import argparse
import math
import timeit

import numpy as np

from banach_interp import _pykernels

try:
    from banach_interp import _ckernels
except ImportError:  # pragma: no cover - depends on the build
    _ckernels = None


def _cases(rng):
    def cplx(*shape):
        return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)

    Y = cplx(20000, 4)
    T = cplx(2000, 2, 2)
    X0 = cplx(2000, 4, 2)
    T1 = cplx(2, 2)
    U = cplx(3, 3)
    G = rng.standard_normal((20000, 3))
    return [
        ("lp_norming p=3", "lp_norming", (Y, 3.0)),
        ("lp_norming p=inf", "lp_norming", (Y, math.inf)),
        ("lp_smooth p=inf", "lp_smooth", (Y, math.inf, 50.0)),
        ("lp_opnorm_batch 4->3", "lp_opnorm_batch", (T, 4.0, 3.0, X0, 200, 1e-13)),
        ("sphere_grid_max2 4->3", "sphere_grid_max2", (T1, 4.0, 3.0, 256, 256)),
        ("gaussian_sq_norms p=4", "gaussian_sq_norms", (U, G, 4.0)),
    ]


def _max_diff(a, b):
    if isinstance(a, tuple):
        # norms are compared; maximisers may differ by a phase
        return _max_diff(a[0], b[0])
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled kernels are not built; only the numpy backend is available")
        return 1
    rng = np.random.default_rng(0)
    print(f"{'kernel':26s} {'cython [ms]':>12s} {'numpy [ms]':>12s} {'speedup':>8s} {'max diff':>10s}")
    for label, name, inputs in _cases(rng):
        fc, fp = getattr(_ckernels, name), getattr(_pykernels, name)
        tc = min(timeit.repeat(lambda: fc(*inputs), number=1, repeat=args.repeat))
        tp = min(timeit.repeat(lambda: fp(*inputs), number=1, repeat=args.repeat))
        diff = _max_diff(fc(*inputs), fp(*inputs))
        print(f"{label:26s} {1e3 * tc:12.2f} {1e3 * tp:12.2f} {tp / tc:8.1f} {diff:10.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
