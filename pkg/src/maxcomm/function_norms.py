"""Averages, L^p and BMO norms, Luxemburg norms and rearrangements.

Functions on a space are plain float arrays aligned with ``space.point_ids``.
All logarithms are natural.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BadExponent, EmptyBall, EmptySubset, NonPositiveLambda, ValidationError
from .space import Ball

BMO_VARIANTS = ("mean_osc", "inf_c", "p_power", "local_l1")
LUXEMBURG_KINDS = ("llogl", "expl")


def as_field(space, values, name="f"):
    """Validate ``values`` as a finite real function on ``space``."""
    arr = np.ascontiguousarray(values, dtype=np.float64).reshape(-1)
    if arr.shape[0] != space.n:
        raise ValidationError(f"{name} has {arr.shape[0]} values, space has {space.n} points")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} has non-finite values")
    return arr


def _members(space, ball):
    """Member indices of a Ball, a family index pair, or an index sequence."""
    if isinstance(ball, Ball):
        idx = np.asarray(ball.members, dtype=np.intp)
    else:
        idx = np.asarray(list(ball), dtype=np.intp)
    if idx.size == 0:
        raise EmptyBall("ball has no members")
    return idx


def ball_average(space, f, ball):
    """Mass-weighted mean of ``f`` over ``ball``."""
    idx = _members(space, ball)
    f = np.asarray(f, dtype=np.float64)
    m = space.mass[idx]
    return float((f[idx] * m).sum() / m.sum())


def lp_norm(space, f, p, weight=None):
    """``(sum |f|^p w mass)^(1/p)``; ``p = inf`` gives ``max |f|``."""
    p = float(p)
    if not (p >= 1):
        raise BadExponent(f"p must lie in [1, inf], got {p}")
    a = np.abs(np.asarray(f, dtype=np.float64))
    if math.isinf(p):
        return float(a.max()) if a.size else 0.0
    wm = space.mass if weight is None else space.mass * np.asarray(weight, dtype=np.float64)
    return float((a**p * wm).sum() ** (1.0 / p))


# -- per-ball oscillation tables ----------------------------------------------


def _center_tables(space, b, stat, p=2.0):
    """Per-center prefix statistics of ``b``; row c, column k-1 is the ball
    ``order[c, :k]``.

    ``stat`` is ``"mean"`` (mean absolute deviation from the average),
    ``"median"`` (from the weighted median) or ``"power"`` (p-th power mean
    deviation from the average, before the 1/p root).
    """
    n = space.n
    out = np.empty((n, n))
    lower = np.tril(np.ones((n, n), dtype=bool))
    for c in range(n):
        oc = space.order[c]
        v = b[oc]
        w = space.mass[oc]
        cw = np.cumsum(w)
        if stat == "median":
            srt = np.argsort(v, kind="stable")
            # weights in value order, masked to each prefix (row k keeps positions <= k)
            keep = lower[:, srt]
            cum = np.cumsum(np.where(keep, w[srt][None, :], 0.0), axis=1)
            med_at = np.argmax(cum >= 0.5 * cw[:, None], axis=1)
            centre = v[srt][med_at]
        else:
            centre = np.cumsum(v * w) / cw
        dev = np.abs(v[None, :] - centre[:, None])
        if stat == "power":
            dev = dev**p
        out[c] = np.where(lower, dev * w[None, :], 0.0).sum(axis=1) / cw
    return out


def ball_oscillations(space, b, stat="mean", p=2.0, family=None):
    """Oscillation of ``b`` on every family ball (see :func:`_center_tables`)."""
    fam = space.family if family is None else family
    b = as_field(space, b, "b")
    tab = _center_tables(space, b, stat, p)
    return tab[fam.centers, fam.sizes - 1]


def bmo_norm(space, b, variant="mean_osc", p=None):
    """Supremum over balls of the mean oscillation of ``b``.

    variant
        ``mean_osc``: deviation from the ball average;
        ``inf_c``: deviation from the best constant (the weighted median);
        ``p_power``: p-th power mean deviation from the average, p in (0, inf);
        ``local_l1``: ``mean_osc`` plus ``||b||_1``.
    """
    b = as_field(space, b, "b")
    if variant == "mean_osc":
        from .operators import sharp_maximal

        return float(max(0.0, sharp_maximal(space, b).max()))
    if variant == "local_l1":
        return bmo_norm(space, b, "mean_osc") + lp_norm(space, b, 1)
    if variant == "inf_c":
        return float(max(0.0, ball_oscillations(space, b, "median").max()))
    if variant == "p_power":
        if p is None or not (0 < float(p) < math.inf):
            raise BadExponent(f"p_power needs p in (0, inf), got {p}")
        p = float(p)
        return float(max(0.0, ball_oscillations(space, b, "power", p).max()) ** (1.0 / p))
    raise ValidationError(f"unknown BMO variant {variant!r}")


# -- Luxemburg norms --------------------------------------------------------


def _llogl_excess(a, m, mu, lam):
    t = a / lam
    return float((t * np.log(2.0 + t) * m).sum() / mu) - 1.0


def _expl_excess(a, m, mu, lam):
    # log of the mean of exp(a/lam), minus log 2; stable for small lam
    z = a / lam
    zmax = z.max()
    return zmax + math.log(float((np.exp(z - zmax) * m).sum()) / mu) - math.log(2.0)


def luxemburg_norm(space, f, subset=None, kind="llogl", rtol=1e-10):
    """Luxemburg norm of ``f`` over ``subset`` (all points when None).

    ``llogl`` uses ``t log(2 + t)`` with normalization 1, ``expl`` uses
    ``exp(t)`` with normalization 2.  Found by bracketing then bisection.
    """
    if kind not in LUXEMBURG_KINDS:
        raise ValidationError(f"unknown Luxemburg kind {kind!r}")
    idx = np.arange(space.n) if subset is None else np.asarray(list(subset), dtype=np.intp)
    if idx.size == 0:
        raise EmptySubset("subset has no points")
    a = np.abs(np.asarray(f, dtype=np.float64)[idx])
    m = space.mass[idx]
    mu = float(m.sum())
    if not np.any(a > 0):
        return 0.0
    excess = _llogl_excess if kind == "llogl" else _expl_excess
    K = 16.0
    lo = float((a * m).sum()) / (K * mu)
    hi = K * float(a.max())
    # excess is strictly decreasing in lam; widen until lo > 0 > hi in sign
    while excess(a, m, mu, lo) <= 0:
        lo /= 2.0
    while excess(a, m, mu, hi) > 0:
        hi *= 2.0
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if excess(a, m, mu, mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def holder_gap(space, f, g, subset=None):
    """``(mean_E |fg|, ||f||_{LlogL,E} * ||g||_{expL,E})``."""
    idx = np.arange(space.n) if subset is None else np.asarray(list(subset), dtype=np.intp)
    m = space.mass[idx]
    lhs = float((np.abs(np.asarray(f)[idx] * np.asarray(g)[idx]) * m).sum() / m.sum())
    rhs = luxemburg_norm(space, f, idx, "llogl") * luxemburg_norm(space, g, idx, "expl")
    return lhs, rhs


# -- rearrangements and level sets ------------------------------------------


@dataclass(frozen=True)
class StepRearrangement:
    """Non-increasing rearrangement as a step function of cumulative mass.

    ``levels[j]`` is the value on ``(breakpoints[j], breakpoints[j+1]]``;
    beyond the last breakpoint the value is 0.
    """

    breakpoints: np.ndarray
    levels: np.ndarray

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        j = np.searchsorted(self.breakpoints, t, side="left") - 1
        lv = np.append(self.levels, 0.0)
        out = np.where(j >= len(self.levels), 0.0, lv[np.clip(j, 0, len(self.levels))])
        out = np.where(t <= 0, np.inf, out)
        return out if out.ndim else float(out)

    def rows(self):
        """``(t, level)`` pairs at the right end of each step."""
        return list(zip(self.breakpoints[1:].tolist(), self.levels.tolist()))


def rearrangement(space, f):
    a = np.abs(np.asarray(f, dtype=np.float64))
    m = space.mass
    vals, inv = np.unique(a, return_inverse=True)
    mass_at = np.bincount(inv.reshape(-1), weights=m, minlength=len(vals))
    vals, mass_at = vals[::-1], mass_at[::-1]
    keep = vals > 0
    levels = vals[keep]
    bp = np.concatenate([[0.0], np.cumsum(mass_at[keep])])
    return StepRearrangement(bp, levels)


def distribution_function(space, f, lam):
    """``mu({|f| > lam})`` (strict)."""
    a = np.abs(np.asarray(f, dtype=np.float64))
    return float(space.mass[a > lam].sum())


def llogl_functional(space, f, lam):
    """``sum (|f|/lam)(1 + log+(|f|/lam)) mass``."""
    if not lam > 0:
        raise NonPositiveLambda(f"lambda must be positive, got {lam}")
    t = np.abs(np.asarray(f, dtype=np.float64)) / lam
    with np.errstate(divide="ignore"):
        lp = np.where(t > 1, np.log(np.where(t > 0, t, 1.0)), 0.0)
    return float((t * (1.0 + lp) * space.mass).sum())


def log_plus(t):
    t = np.asarray(t, dtype=np.float64)
    return np.where(t > 1, np.log(np.maximum(t, 1.0)), 0.0)


def level_set_masses(space, b, members, alphas):
    """``mu({x in B : |b - m_B(b)| > alpha})`` for each alpha."""
    idx = np.asarray(members, dtype=np.intp)
    m = space.mass[idx]
    v = np.asarray(b, dtype=np.float64)[idx]
    dev = np.abs(v - (v * m).sum() / m.sum())
    return np.array([m[dev > a].sum() for a in np.asarray(alphas, dtype=np.float64)])
