"""Generators for the concrete spaces used by the harness."""
from __future__ import annotations

import numpy as np

from .errors import BadCount, BadParameter, MissingPoint
from .space import build_space, circle_distance

BESSEL_SWITCH = 1.0
BESSEL_FLOOR = 1e-3


def make_grid_1d(n, length=None):
    """``n`` cell midpoints of ``[0, length]``, each of mass ``length/n``.

    ``length`` defaults to ``n`` (unit spacing, unit masses).
    """
    n = int(n)
    if n < 1:
        raise BadCount(f"n must be >= 1, got {n}")
    length = float(n if length is None else length)
    if not length > 0:
        raise BadParameter(f"length must be positive, got {length}")
    h = length / n
    x = (np.arange(n) + 0.5) * h
    dist = np.abs(x[:, None] - x[None, :])
    return build_space(range(n), dist, np.full(n, h), a0=1.0, coords=x[:, None], metric="abs1d")


def bessel_points(n, r_max):
    """Right endpoints of the Bessel cells: geometric below 1, uniform above."""
    if r_max <= BESSEL_SWITCH:
        return np.geomspace(BESSEL_FLOOR * r_max, r_max, n)
    n_low = max(1, n // 4)
    low = 10.0 ** (np.log10(BESSEL_FLOOR) * (1.0 - np.arange(n_low) / n_low))
    high = np.linspace(BESSEL_SWITCH, r_max, n - n_low)
    return np.concatenate([low, high])


def bessel_cell_masses(x, lambda_b):
    """Exact ``integral y^(2 lambda) dy`` over cells ``(x[i-1], x[i]]``, x[-1] = 0."""
    e = 2.0 * lambda_b + 1.0
    prim = x**e / e
    return np.diff(np.concatenate([[0.0], prim]))


def make_bessel_halfline(lambda_b, n, r_max):
    """Half-line ``(0, r_max]`` with measure ``x^(2 lambda) dx`` discretized on
    ``n`` cells; atoms sit at the right cell endpoints."""
    lambda_b = float(lambda_b)
    n = int(n)
    r_max = float(r_max)
    if not lambda_b > -0.5:
        raise BadParameter(f"lambda_b must exceed -1/2, got {lambda_b}")
    if n < 2:
        raise BadParameter(f"n must be >= 2, got {n}")
    if not r_max > 0:
        raise BadParameter(f"r_max must be positive, got {r_max}")
    if r_max > BESSEL_SWITCH and n < 5:
        raise BadParameter("need n >= 5 when r_max > 1")
    x = bessel_points(n, r_max)
    mass = bessel_cell_masses(x, lambda_b)
    dist = np.abs(x[:, None] - x[None, :])
    return build_space(range(n), dist, mass, a0=1.0, coords=x[:, None], metric="abs1d")


def make_finite_torus(n, dim_growth):
    """``n`` equally spaced points on the unit circle, quasi-metric
    ``arc^(1/dim_growth)``, masses ``1/n``; balls grow like ``r^dim_growth``."""
    n = int(n)
    dim_growth = float(dim_growth)
    if n < 4:
        raise BadParameter(f"n must be >= 4, got {n}")
    if not dim_growth >= 1:
        raise BadParameter(f"dim_growth must be >= 1, got {dim_growth}")
    t = np.arange(n) / n
    exponent = 1.0 / dim_growth
    dist = circle_distance(t, exponent)
    # a power <= 1 of a metric is a metric
    return build_space(
        range(n), dist, np.full(n, 1.0 / n), a0=1.0, coords=t[:, None], metric="circle", exponent=exponent
    )


def make_counterexample_pair(space, x0, truncated=False, unit=1.0):
    """``b = ln(1 + dist(., x0))`` and ``f`` the indicator of ``B(x0, unit)``.

    ``x0`` is a point id.  Unless ``truncated`` is set, some point must lie at
    distance at least ``100 * unit`` from ``x0``.
    """
    try:
        i0 = space.index_of(x0)
    except Exception:
        raise MissingPoint(f"point {x0!r} not in space") from None
    d = space.dist[i0]
    if not truncated and not np.any(d >= 100.0 * unit):
        raise BadParameter("no point beyond 100 units of x0; pass truncated=True to accept")
    b = np.log1p(d)
    f = (d < unit).astype(np.float64)
    return b, f


def admissible_centers(space, t_min=2.0, centers=None):
    """Indices x0 (among ``centers``, default all) for which
    ``log t / mu(B(x0, t))`` decreases along the realized radii ``t >= t_min``.

    Realized radii are the distinct distances from x0; the ball at radius t
    is the strict ball.
    """
    out = []
    cm = space.prefix_sums(np.ones(space.n))
    sd = space.sorted_dist
    for c in range(space.n) if centers is None else centers:
        radii = np.unique(sd[c])
        radii = radii[radii >= t_min]
        if radii.size < 2:
            out.append(c)
            continue
        cnt = np.searchsorted(sd[c], radii, side="left")
        mu = cm[c, cnt - 1]
        ratio = np.log(radii) / mu
        if np.all(np.diff(ratio) < 0):
            out.append(c)
    return np.asarray(out, dtype=np.intp)
