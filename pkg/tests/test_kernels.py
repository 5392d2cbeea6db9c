import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_space
from maxcomm import _kernels_py, kernels
from maxcomm.bench import run_benchmark

needs_compiled = pytest.mark.skipif(not kernels.has_compiled(), reason="compiled kernels not built")


def test_backend_selection():
    assert "python" in kernels.available()
    before = kernels.active_name()
    with kernels.using("python") as mod:
        assert mod is _kernels_py
        assert kernels.active_name() == "python"
    assert kernels.active_name() == before
    with pytest.raises(ValueError):
        kernels.use("fortran")


def test_default_prefers_compiled():
    expect = "compiled" if kernels.has_compiled() else "python"
    assert kernels.active_name() == expect


def _agree(a, b, rtol=1e-12):
    a, b = np.asarray(a, float), np.asarray(b, float)
    scale = max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-300)
    return np.max(np.abs(a - b)) <= rtol * scale


@needs_compiled
@given(st.integers(0, 2**31), st.integers(2, 16), st.booleans())
def test_compiled_matches_python(seed, n, ties):
    from maxcomm import _ckernels as C

    P = _kernels_py
    rng = np.random.default_rng(seed)
    sp = random_space(rng, n, ties)
    o, t, m = sp.order, sp.tie_end, sp.mass
    f = rng.normal(size=n)
    a = np.abs(f)
    assert _agree(C.prefix_ratio_sup(o, t, a * m, m), P.prefix_ratio_sup(o, t, a * m, m))
    levels, rank = np.unique(f, return_inverse=True)
    rank = rank.astype(np.int32).reshape(-1)
    assert _agree(C.sharp_sup(o, t, f, m, rank, levels), P.sharp_sup(o, t, f, m, rank, levels))
    b = rng.normal(size=n)
    assert _agree(C.maxcomm_sup(o, t, b, a * m, m), P.maxcomm_sup(o, t, b, a * m, m))
    assert _agree(C.llogl_sup(o, t, a, m), P.llogl_sup(o, t, a, m), 1e-10)
    assert _agree(C.naive_maximal(sp.dist, a * m, m), P.naive_maximal(sp.dist, a * m, m))
    assert C.quasi_triangle(sp.dist) == pytest.approx(P.quasi_triangle(sp.dist), rel=1e-14)
    fam = sp.family
    troot = sp.prefix_sums(a) / sp.prefix_sums(np.ones(n))
    args = (o, t, fam.centers, fam.sizes, np.ascontiguousarray(troot), b, m * 1.5, m, 2.0)
    for x, y in zip(C.restricted_scan(*args), P.restricted_scan(*args)):
        assert _agree(x, y)


def test_benchmark_report():
    res = run_benchmark(n=120, repeat=1, extra=True)
    assert res["n"] == 120
    assert res["max_rel_diff_naive"] <= 1e-12
    assert res["speedup_fast_vs_naive"] > 1
    for k, v in res["timings"].items():
        assert v >= 0, k
    if kernels.has_compiled():
        assert res["max_rel_diff_fast_python"] <= 1e-12
