"""Benchmark: prefix-sum maximal evaluation against the brute-force sweep,
and compiled kernels against the numpy fallback."""
from __future__ import annotations

import platform
import time

import numpy as np

from . import kernels
from .examples import make_grid_1d
from .operators import maximal, maximal_commutator, naive_maximal, sharp_maximal
from .space import build_space


def _fresh(space):
    # rebuild so cached neighbour tables are not reused between timings
    return build_space(space.point_ids, space.dist, space.mass, a0=1.0)


def _timed(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _rel_diff(a, b):
    scale = max(float(np.max(np.abs(a))), float(np.max(np.abs(b))), 1e-300)
    return float(np.max(np.abs(a - b)) / scale)


def run_benchmark(n=2000, seed=0, repeat=3, naive=True, extra=True):
    """Time M f on an ``n``-point grid.

    ``fast`` timings include building the neighbour tables (sorting every
    distance row); ``naive`` enumerates every (center, radius) pair and scans
    membership explicitly.
    """
    base = make_grid_1d(n)
    f = np.random.default_rng(seed).normal(size=n)
    result = {
        "n": n,
        "seed": seed,
        "repeat": repeat,
        "backends": kernels.available(),
        "python": platform.python_version(),
        "timings": {},
    }
    ref = None
    for backend in kernels.available():
        with kernels.using(backend):
            t, out = _timed(lambda: maximal(_fresh(base), f), repeat)
        result["timings"][f"maximal_fast_{backend}"] = t
        if ref is None:
            ref = out
        else:
            result[f"max_rel_diff_fast_{backend}"] = _rel_diff(ref, out)
    if naive:
        with kernels.using("compiled" if kernels.has_compiled() else "python"):
            t, out = _timed(lambda: naive_maximal(base, f), 1)
        result["timings"]["maximal_naive"] = t
        result["max_rel_diff_naive"] = _rel_diff(ref, out)
        fast_key = "maximal_fast_compiled" if kernels.has_compiled() else "maximal_fast_python"
        result["speedup_fast_vs_naive"] = t / result["timings"][fast_key]
    if extra:
        m = min(n, 400)
        small = make_grid_1d(m)
        g = f[:m]
        b = np.log1p(np.arange(m, dtype=np.float64))
        for backend in kernels.available():
            with kernels.using(backend):
                s = _fresh(small)
                s.order  # build tables outside the timed region
                result["timings"][f"sharp_{backend}_n{m}"] = _timed(lambda: sharp_maximal(s, g), repeat)[0]
                result["timings"][f"maxcomm_{backend}_n{m}"] = _timed(lambda: maximal_commutator(s, b, g), 1)[0]
    if kernels.has_compiled():
        t = result["timings"]
        result["speedup_compiled_vs_python"] = t["maximal_fast_python"] / t["maximal_fast_compiled"]
    return result
