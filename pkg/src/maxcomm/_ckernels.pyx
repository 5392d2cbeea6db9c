# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels; same contracts as ``_kernels_py``.

All loops run without the GIL so evaluations can be fanned out over threads.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport log, fabs, pow, INFINITY
from libc.stdlib cimport malloc, free, qsort

cnp.import_array()

BACKEND = "compiled"

ctypedef cnp.int32_t i32
ctypedef cnp.uint8_t u8


def quasi_triangle(const double[:, ::1] dist):
    cdef Py_ssize_t n = dist.shape[0]
    cdef Py_ssize_t x, y, z
    cdef double best = 0.0, den, q
    with nogil:
        for z in range(n):
            for x in range(n):
                if x == z:
                    continue
                for y in range(x + 1, n):
                    if y == z:
                        continue
                    den = dist[x, z] + dist[z, y]
                    if den > 0.0:
                        q = dist[x, y] / den
                        if q > best:
                            best = q
    return best


cdef inline void _scatter(const i32[:, ::1] order, const u8[:, ::1] tie_end,
                          Py_ssize_t c, Py_ssize_t k, double* vals,
                          double[::1] out) noexcept nogil:
    cdef double cur = -INFINITY
    cdef Py_ssize_t j
    cdef i32 y
    for j in range(k - 1, -1, -1):
        if tie_end[c, j] and vals[j] > cur:
            cur = vals[j]
        y = order[c, j]
        if cur > out[y]:
            out[y] = cur


def prefix_ratio_sup(const i32[:, ::1] order, const u8[:, ::1] tie_end,
                     const double[::1] num, const double[::1] den):
    cdef Py_ssize_t n = order.shape[0]
    out_arr = np.full(n, -np.inf)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t c, j
    cdef double cn, cd
    cdef i32 y
    cdef double* ratio = <double*> malloc(n * sizeof(double))
    if ratio == NULL:
        raise MemoryError()
    try:
        with nogil:
            for c in range(n):
                cn = 0.0
                cd = 0.0
                for j in range(n):
                    y = order[c, j]
                    cn = cn + num[y]
                    cd = cd + den[y]
                    ratio[j] = cn / cd
                _scatter(order, tie_end, c, n, ratio, out)
    finally:
        free(ratio)
    return out_arr


cdef inline void _bit_add(double* tree, Py_ssize_t size, Py_ssize_t i, double v) noexcept nogil:
    i += 1
    while i <= size:
        tree[i - 1] += v
        i += i & (-i)


cdef inline double _bit_sum(double* tree, Py_ssize_t i) noexcept nogil:
    # sum of entries [0, i)
    cdef double s = 0.0
    while i > 0:
        s += tree[i - 1]
        i -= i & (-i)
    return s


cdef inline Py_ssize_t _upper_bound(const double[::1] arr, Py_ssize_t size, double v) noexcept nogil:
    cdef Py_ssize_t lo = 0, hi = size, mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if arr[mid] <= v:
            lo = mid + 1
        else:
            hi = mid
    return lo


def sharp_sup(const i32[:, ::1] order, const u8[:, ::1] tie_end,
              const double[::1] f, const double[::1] mass,
              const i32[::1] rank, const double[::1] levels):
    """Mean-oscillation sup using Fenwick trees keyed by the value rank of f.

    ``levels`` are the sorted distinct values of ``f`` and ``rank[y]`` the
    index of ``f[y]`` in it.  O(n^2 log n).
    """
    cdef Py_ssize_t n = order.shape[0]
    cdef Py_ssize_t nl = levels.shape[0]
    out_arr = np.full(n, -np.inf)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t c, j, idx
    cdef i32 y
    cdef double W, S, mean, wle, sle, mad
    cdef double* osc = <double*> malloc(n * sizeof(double))
    cdef double* tw = <double*> malloc(nl * sizeof(double))
    cdef double* ts = <double*> malloc(nl * sizeof(double))
    if osc == NULL or tw == NULL or ts == NULL:
        free(osc); free(tw); free(ts)
        raise MemoryError()
    try:
        with nogil:
            for c in range(n):
                for j in range(nl):
                    tw[j] = 0.0
                    ts[j] = 0.0
                W = 0.0
                S = 0.0
                for j in range(n):
                    y = order[c, j]
                    _bit_add(tw, nl, rank[y], mass[y])
                    _bit_add(ts, nl, rank[y], f[y] * mass[y])
                    W = W + mass[y]
                    S = S + f[y] * mass[y]
                    if tie_end[c, j]:
                        mean = S / W
                        idx = _upper_bound(levels, nl, mean)
                        wle = _bit_sum(tw, idx)
                        sle = _bit_sum(ts, idx)
                        mad = (mean * wle - sle) + ((S - sle) - mean * (W - wle))
                        if mad < 0.0:
                            mad = 0.0
                        osc[j] = mad / W
                    else:
                        osc[j] = -INFINITY
                _scatter(order, tie_end, c, n, osc, out)
    finally:
        free(osc); free(tw); free(ts)
    return out_arr


def maxcomm_sup(const i32[:, ::1] order, const u8[:, ::1] tie_end,
                const double[::1] b, const double[::1] g, const double[::1] mass):
    cdef Py_ssize_t n = order.shape[0]
    out_arr = np.full(n, -np.inf)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t c, j, jx
    cdef i32 x, y
    cdef double bx, acc, best, r
    cdef double* cw = <double*> malloc(n * sizeof(double))
    cdef double* gb = <double*> malloc(2 * n * sizeof(double))
    if cw == NULL or gb == NULL:
        free(cw); free(gb)
        raise MemoryError()
    try:
        with nogil:
            for c in range(n):
                acc = 0.0
                for j in range(n):
                    y = order[c, j]
                    acc = acc + mass[y]
                    cw[j] = acc
                    gb[2 * j] = b[y]
                    gb[2 * j + 1] = g[y]
                for jx in range(n):
                    x = order[c, jx]
                    bx = b[x]
                    acc = 0.0
                    best = -INFINITY
                    for j in range(n):
                        acc = acc + fabs(bx - gb[2 * j]) * gb[2 * j + 1]
                        if j >= jx and tie_end[c, j]:
                            r = acc / cw[j]
                            if r > best:
                                best = r
                    if best > out[x]:
                        out[x] = best
    finally:
        free(cw); free(gb)
    return out_arr


def llogl_sup(const i32[:, ::1] order, const u8[:, ::1] tie_end,
              const double[::1] a, const double[::1] mass):
    """Sup over balls of the L log L Luxemburg norm, Newton on u = 1/lambda.

    psi(u) = avg(a u log(2 + a u)) is convex and increasing, so Newton from
    any u > 0 converges monotonically after at most one overshoot.
    """
    cdef Py_ssize_t n = order.shape[0]
    out_arr = np.full(n, -np.inf)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t c, j, i, it
    cdef i32 y
    cdef double W, sa, u, un, t, lg, psi, dpsi, ln2 = log(2.0)
    cdef double* norms = <double*> malloc(n * sizeof(double))
    cdef double* av = <double*> malloc(n * sizeof(double))
    cdef double* mv = <double*> malloc(n * sizeof(double))
    if norms == NULL or av == NULL or mv == NULL:
        free(norms); free(av); free(mv)
        raise MemoryError()
    try:
        with nogil:
            for c in range(n):
                W = 0.0
                sa = 0.0
                u = 0.0
                for j in range(n):
                    y = order[c, j]
                    av[j] = a[y]
                    mv[j] = mass[y]
                    W = W + mass[y]
                    sa = sa + a[y] * mass[y]
                    if not tie_end[c, j]:
                        norms[j] = -INFINITY
                        continue
                    if sa <= 0.0:
                        norms[j] = 0.0
                        continue
                    if u <= 0.0:
                        u = W / (sa * ln2)
                    for it in range(200):
                        psi = 0.0
                        dpsi = 0.0
                        for i in range(j + 1):
                            if av[i] > 0.0:
                                t = av[i] * u
                                lg = log(2.0 + t)
                                psi = psi + t * lg * mv[i]
                                dpsi = dpsi + av[i] * mv[i] * (lg + t / (2.0 + t))
                        un = u - (psi / W - 1.0) / (dpsi / W)
                        if fabs(un - u) <= 1e-15 * fabs(un):
                            u = un
                            break
                        u = un
                    norms[j] = 1.0 / u
                _scatter(order, tie_end, c, n, norms, out)
    finally:
        free(norms); free(av); free(mv)
    return out_arr


def restricted_scan(const i32[:, ::1] order, const u8[:, ::1] tie_end,
                    const i32[::1] centers, const i32[::1] sizes,
                    const double[:, ::1] troot, const double[::1] b,
                    const double[::1] wm, const double[::1] mass, double q):
    cdef Py_ssize_t n = order.shape[0]
    cdef Py_ssize_t nb = centers.shape[0]
    devq_arr = np.empty(nb)
    dev1_arr = np.empty(nb)
    osc_arr = np.empty(nb)
    margin_arr = np.empty(nb)
    cdef double[::1] devq = devq_arr
    cdef double[::1] dev1 = dev1_arr
    cdef double[::1] osc = osc_arr
    cdef double[::1] margin = margin_arr
    cdef Py_ssize_t i, jj, j, j0, k, c0, kk
    cdef i32 c, y
    cdef double cur, mu, ww, sb, mean, sq, s1, so, mg, d
    cdef u8* mark = <u8*> malloc(n * sizeof(u8))
    cdef double* t = <double*> malloc(n * sizeof(double))
    if mark == NULL or t == NULL:
        free(mark); free(t)
        raise MemoryError()
    try:
        with nogil:
            for j in range(n):
                mark[j] = 0
            for i in range(nb):
                c0 = centers[i]
                kk = sizes[i]
                for jj in range(kk):
                    y = order[c0, jj]
                    mark[y] = 1
                    t[y] = -INFINITY
                for jj in range(kk):
                    c = order[c0, jj]
                    j0 = 0
                    while j0 < n and mark[order[c, j0]]:
                        j0 += 1
                    k = j0
                    while k > 0 and not tie_end[c, k - 1]:
                        k -= 1
                    cur = -INFINITY
                    for j in range(k - 1, -1, -1):
                        if tie_end[c, j] and troot[c, j] > cur:
                            cur = troot[c, j]
                        y = order[c, j]
                        if cur > t[y]:
                            t[y] = cur
                mu = 0.0
                ww = 0.0
                sb = 0.0
                for jj in range(kk):
                    y = order[c0, jj]
                    mu = mu + mass[y]
                    ww = ww + wm[y]
                    sb = sb + b[y] * mass[y]
                mean = sb / mu
                sq = 0.0
                s1 = 0.0
                so = 0.0
                mg = INFINITY
                for jj in range(kk):
                    y = order[c0, jj]
                    d = fabs(b[y] - t[y])
                    sq = sq + pow(d, q) * wm[y]
                    s1 = s1 + d * mass[y]
                    so = so + fabs(b[y] - mean) * mass[y]
                    if t[y] - fabs(b[y]) < mg:
                        mg = t[y] - fabs(b[y])
                    mark[y] = 0
                devq[i] = sq / ww
                dev1[i] = s1 / mu
                osc[i] = so / mu
                margin[i] = mg
    finally:
        free(mark); free(t)
    return devq_arr, dev1_arr, osc_arr, margin_arr


cdef int _cmp_double(const void* a, const void* b) noexcept nogil:
    cdef double x = (<double*> a)[0]
    cdef double y = (<double*> b)[0]
    return (x > y) - (x < y)


def naive_maximal(const double[:, ::1] dist, const double[::1] num, const double[::1] den):
    """O(n^3) oracle: explicit membership scan for every center and radius."""
    cdef Py_ssize_t n = dist.shape[0]
    out_arr = np.full(n, -np.inf)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t c, j, y
    cdef double d, sn, sd, val
    cdef double* radii = <double*> malloc(n * sizeof(double))
    if radii == NULL:
        raise MemoryError()
    try:
        with nogil:
            for c in range(n):
                for j in range(n):
                    radii[j] = dist[c, j]
                qsort(radii, n, sizeof(double), _cmp_double)
                for j in range(n):
                    if j + 1 < n and radii[j + 1] == radii[j]:
                        continue
                    d = radii[j]
                    sn = 0.0
                    sd = 0.0
                    for y in range(n):
                        if dist[c, y] <= d:
                            sn = sn + num[y]
                            sd = sd + den[y]
                    val = sn / sd
                    for y in range(n):
                        if dist[c, y] <= d and val > out[y]:
                            out[y] = val
    finally:
        free(radii)
    return out_arr
