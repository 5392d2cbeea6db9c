"""Pure numpy implementations of the hot kernels.

These mirror ``_ckernels.pyx`` function for function and are used whenever the
compiled extension is unavailable (or explicitly requested).  All kernels work
on the per-center neighbour table of a space:

``order[c, j]``
    the j-th closest point to center ``c`` (stable argsort of ``dist[c]``);
``tie_end[c, j]``
    nonzero when the prefix ``order[c, :j+1]`` is a realizable ball, i.e. the
    next point is strictly farther away.

A ball is a pair ``(c, k)`` with ``tie_end[c, k-1]`` set; its members are
``order[c, :k]``.
"""
from __future__ import annotations

import numpy as np

BACKEND = "python"


def quasi_triangle(dist):
    """Largest ``dist[x, y] / (dist[x, z] + dist[z, y])`` over ``z != x, y``."""
    n = dist.shape[0]
    best = 0.0
    for z in range(n):
        denom = dist[:, z][:, None] + dist[z, :][None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            q = dist / denom
        q[z, :] = 0.0
        q[:, z] = 0.0
        q[~np.isfinite(q)] = 0.0
        best = max(best, float(q.max()))
    return best


def _scatter_suffix_max(out, order_c, tie_c, vals):
    seg = np.where(tie_c, vals, -np.inf)
    suf = np.maximum.accumulate(seg[::-1])[::-1]
    np.maximum(out[order_c], suf, out=suf)
    out[order_c] = suf


def prefix_ratio_sup(order, tie_end, num, den):
    """``out[x] = max`` over balls containing x of ``sum(num) / sum(den)``."""
    n = order.shape[0]
    out = np.full(n, -np.inf)
    tie = tie_end.astype(bool)
    for c in range(n):
        oc = order[c]
        ratio = np.cumsum(num[oc]) / np.cumsum(den[oc])
        _scatter_suffix_max(out, oc, tie[c], ratio)
    return out


def sharp_sup(order, tie_end, f, mass, rank=None, levels=None):
    """Sup over balls containing x of the mean absolute deviation of ``f``.

    ``rank``/``levels`` are accepted for signature parity with the compiled
    kernel and ignored.
    """
    n = order.shape[0]
    out = np.full(n, -np.inf)
    tie = tie_end.astype(bool)
    lower = np.tril(np.ones((n, n), dtype=bool))
    for c in range(n):
        oc = order[c]
        v = f[oc]
        w = mass[oc]
        cw = np.cumsum(w)
        mean = np.cumsum(v * w) / cw
        dev = np.abs(v[None, :] - mean[:, None]) * w[None, :]
        mad = np.where(lower, dev, 0.0).sum(axis=1)
        _scatter_suffix_max(out, oc, tie[c], mad / cw)
    return out


def maxcomm_sup(order, tie_end, b, g, mass):
    """Maximal commutator: sup over balls containing x of
    ``sum_y |b[x] - b[y]| g[y] / mu(B)`` where ``g = |f| * mass``."""
    n = order.shape[0]
    out = np.full(n, -np.inf)
    tie = tie_end.astype(bool)
    pos = np.arange(n)
    for c in range(n):
        oc = order[c]
        cw = np.cumsum(mass[oc])
        # rows: x in center order; columns: prefix length - 1
        bx = b[oc]
        acc = np.cumsum(np.abs(bx[:, None] - bx[None, :]) * g[oc][None, :], axis=1)
        ratio = acc / cw[None, :]
        admissible = tie[c][None, :] & (pos[None, :] >= pos[:, None])
        best = np.where(admissible, ratio, -np.inf).max(axis=1)
        np.maximum(out[oc], best, out=best)
        out[oc] = best
    return out


def _llogl_roots(a, w, cw, tol=1e-15, maxiter=200):
    """Vectorized Newton solve of ``avg(a u log(2 + a u)) = 1`` for every prefix.

    Row k of the problem is the prefix of length k + 1.  Returns the norms
    ``1/u`` (0 where the prefix carries no mass of ``a``).
    """
    n = a.shape[0]
    mask = np.tril(np.ones((n, n), dtype=bool))
    aw = np.where(mask, (a * w)[None, :], 0.0)
    aa = np.where(mask, a[None, :], 0.0)
    s1 = aw.sum(axis=1)
    live = s1 > 0
    u = np.zeros(n)
    u[live] = cw[live] / (s1[live] * np.log(2.0))
    for _ in range(maxiter):
        t = aa * u[:, None]
        lg = np.log(2.0 + t)
        psi = (aw * u[:, None] * lg).sum(axis=1) / cw
        dpsi = (aw * (lg + t / (2.0 + t))).sum(axis=1) / cw
        step = np.zeros(n)
        step[live] = (psi[live] - 1.0) / dpsi[live]
        u_new = u - step
        done = np.abs(u_new - u) <= tol * np.abs(u_new)
        u = u_new
        if np.all(done | ~live):
            break
    norms = np.zeros(n)
    norms[live] = 1.0 / u[live]
    return norms


def llogl_sup(order, tie_end, a, mass):
    """Sup over balls containing x of the L log L Luxemburg norm of ``a >= 0``."""
    n = order.shape[0]
    out = np.full(n, -np.inf)
    tie = tie_end.astype(bool)
    for c in range(n):
        oc = order[c]
        w = mass[oc]
        norms = _llogl_roots(a[oc], w, np.cumsum(w))
        _scatter_suffix_max(out, oc, tie[c], norms)
    return out


def restricted_scan(order, tie_end, centers, sizes, troot, b, wm, mass, q):
    """Per-ball statistics of the restricted maximal function ``T = M_{p,B} b``.

    ``troot[c, j]`` holds the p-mean of ``|b|`` over the prefix ball
    ``order[c, :j+1]``.  For every listed ball B returns

    * ``sum_B |b - T|^q wm / sum_B wm``
    * ``sum_B |b - T| mass / mu(B)``
    * ``sum_B |b - m_B(b)| mass / mu(B)``
    * ``min_B (T - |b|)``
    """
    n = order.shape[0]
    nb = len(centers)
    tie = tie_end.astype(bool)
    devq = np.empty(nb)
    dev1 = np.empty(nb)
    osc = np.empty(nb)
    margin = np.empty(nb)
    mark = np.zeros(n, dtype=bool)
    for i in range(nb):
        c0 = centers[i]
        members = order[c0, : sizes[i]]
        mark[members] = True
        t = restricted_values(order, tie, troot, mark, members)
        tb = t[members]
        bb = b[members]
        mm = mass[members]
        ww = wm[members]
        mu = mm.sum()
        mean = (bb * mm).sum() / mu
        diff = np.abs(bb - tb)
        devq[i] = (diff**q * ww).sum() / ww.sum()
        dev1[i] = (diff * mm).sum() / mu
        osc[i] = (np.abs(bb - mean) * mm).sum() / mu
        margin[i] = (tb - np.abs(bb)).min()
        mark[members] = False
    return devq, dev1, osc, margin


def restricted_values(order, tie, troot, mark, members):
    """Values of the restricted sup on the marked ball (``-inf`` elsewhere)."""
    n = order.shape[0]
    t = np.full(n, -np.inf)
    for c in members:
        oc = order[c]
        inside = mark[oc]
        j0 = n if inside.all() else int(np.argmin(inside))
        k = j0
        while k > 0 and not tie[c, k - 1]:
            k -= 1
        _scatter_suffix_max(t, oc[:k], tie[c, :k], troot[c, :k])
    return t


def naive_maximal(dist, num, den):
    """Brute-force ball sweep: every center, every distinct radius, explicit
    membership scan.  O(n^3); used as the oracle for ``prefix_ratio_sup``."""
    n = dist.shape[0]
    out = np.full(n, -np.inf)
    for c in range(n):
        row = dist[c]
        for d in np.unique(row):
            inside = row <= d
            val = num[inside].sum() / den[inside].sum()
            out[inside] = np.maximum(out[inside], val)
    return out
