"""Maximal operators and commutators on a finite space.

Every supremum "over balls containing x" ranges over the realized balls of the
space.  The fast paths sweep each center's distance ordering with prefix
sums; ``naive_*`` functions enumerate (center, radius) pairs explicitly and
serve as oracles.
"""
from __future__ import annotations

import math

import numpy as np

from . import _kernels_py, kernels
from .errors import BadDelta, BadExponent, ValidationError
from .function_norms import as_field
from .space import Ball

COMMUTATOR_KINDS = ("maximal_p", "sharp")


def _check_p(p):
    p = float(p)
    if not (1 <= p < math.inf):
        raise BadExponent(f"p must lie in [1, inf), got {p}")
    return p


def _restriction_members(space, restriction):
    if isinstance(restriction, Ball):
        idx = np.asarray(restriction.members, dtype=np.intp)
    else:
        idx = np.unique(np.asarray(list(restriction), dtype=np.intp))
    if idx.size == 0:
        raise ValidationError("restriction ball is empty")
    return idx


def maximal(space, f, p=1.0, restriction=None):
    """Hardy-Littlewood maximal function ``M_p f``.

    With ``restriction`` (a Ball or its member indices) only balls contained
    in it are admissible; points outside it are NaN.
    """
    p = _check_p(p)
    f = as_field(space, f)
    a = np.abs(f) if p == 1 else np.abs(f) ** p
    if restriction is None:
        out = kernels.get().prefix_ratio_sup(space.order, space.tie_end, a * space.mass, space.mass)
    else:
        members = _restriction_members(space, restriction)
        troot = space.prefix_sums(a) / space.prefix_sums(np.ones(space.n))
        mark = np.zeros(space.n, dtype=bool)
        mark[members] = True
        out = _kernels_py.restricted_values(space.order, space.tie_end.astype(bool), troot, mark, members)
        out[~mark] = np.nan
    return out if p == 1 else out ** (1.0 / p)


def _sharp(space, f):
    # centre the values so deviations are computed on a balanced range
    g = f - 0.5 * (f.max() + f.min())
    levels, rank = np.unique(g, return_inverse=True)
    return kernels.get().sharp_sup(
        space.order, space.tie_end, g, space.mass, rank.astype(np.int32).reshape(-1), levels
    )


def sharp_maximal(space, f):
    """Sharp maximal function: sup over balls of the mean oscillation."""
    f = as_field(space, f)
    return np.maximum(_sharp(space, f), 0.0)


def delta_variant(space, f, delta, which="plain"):
    """``(M |f|^delta)^(1/delta)`` or ``(M# |f|^delta)^(1/delta)``."""
    delta = float(delta)
    if not 0 < delta < 1:
        raise BadDelta(f"delta must lie in (0, 1), got {delta}")
    g = np.abs(as_field(space, f)) ** delta
    if which == "plain":
        inner = maximal(space, g)
    elif which == "sharp":
        inner = sharp_maximal(space, g)
    else:
        raise ValidationError(f"unknown delta variant {which!r}")
    return inner ** (1.0 / delta)


def iterated_maximal(space, f):
    """``M(M f)``."""
    return maximal(space, maximal(space, f))


def maximal_llogl(space, f):
    """Sup over balls containing x of the L log L Luxemburg norm of ``f``."""
    a = np.abs(as_field(space, f))
    return kernels.get().llogl_sup(space.order, space.tie_end, a, space.mass)


def commutator(space, kind, b, f, p=1.0):
    """``T(b f) - b T(f)`` for ``T = M_p`` (kind ``maximal_p``) or ``M#``."""
    b = as_field(space, b, "b")
    f = as_field(space, f)
    if kind == "maximal_p":
        p = _check_p(p)
        return maximal(space, b * f, p) - b * maximal(space, f, p)
    if kind == "sharp":
        return sharp_maximal(space, b * f) - b * sharp_maximal(space, f)
    raise ValidationError(f"unknown commutator kind {kind!r}")


def maximal_commutator(space, b, f):
    """``C_b f(x) = sup_{B ni x} mean_B |b(x) - b(y)| |f(y)|``."""
    b = as_field(space, b, "b")
    f = as_field(space, f)
    # the kernel only sees differences of b; centring keeps them well scaled
    bc = b - 0.5 * (b.max() + b.min())
    out = kernels.get().maxcomm_sup(space.order, space.tie_end, bc, np.abs(f) * space.mass, space.mass)
    return np.maximum(out, 0.0)


# -- brute-force oracles ----------------------------------------------------


def _naive_balls(space):
    """Yield member masks of every (center, realized radius) pair."""
    for c in range(space.n):
        row = space.dist[c]
        for d in np.unique(row):
            yield row <= d


def naive_maximal(space, f, p=1.0):
    p = _check_p(p)
    a = np.abs(np.asarray(f, dtype=np.float64)) ** p
    out = kernels.get().naive_maximal(space.dist, a * space.mass, space.mass)
    return out ** (1.0 / p)


def naive_sharp_maximal(space, f):
    f = np.asarray(f, dtype=np.float64)
    m = space.mass
    out = np.zeros(space.n)
    for inside in _naive_balls(space):
        mu = m[inside].sum()
        mean = (f[inside] * m[inside]).sum() / mu
        val = (np.abs(f[inside] - mean) * m[inside]).sum() / mu
        out[inside] = np.maximum(out[inside], val)
    return out


def naive_maximal_commutator(space, b, f):
    b = np.asarray(b, dtype=np.float64)
    g = np.abs(np.asarray(f, dtype=np.float64)) * space.mass
    out = np.zeros(space.n)
    for inside in _naive_balls(space):
        idx = np.nonzero(inside)[0]
        mu = space.mass[idx].sum()
        vals = (np.abs(b[idx][:, None] - b[idx][None, :]) * g[idx][None, :]).sum(axis=1) / mu
        out[idx] = np.maximum(out[idx], vals)
    return out


def naive_restricted_maximal(space, f, members, p=1.0):
    """``M_{p,B} f`` by explicit enumeration of balls inside ``members``."""
    p = _check_p(p)
    inB = np.zeros(space.n, dtype=bool)
    inB[np.asarray(list(members), dtype=np.intp)] = True
    a = np.abs(np.asarray(f, dtype=np.float64)) ** p
    out = np.full(space.n, np.nan)
    out[inB] = -np.inf
    for inside in _naive_balls(space):
        if np.any(inside & ~inB):
            continue
        val = (a[inside] * space.mass[inside]).sum() / space.mass[inside].sum()
        out[inside] = np.maximum(out[inside], val)
    return out ** (1.0 / p)
