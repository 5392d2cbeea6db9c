"""Finite quasi-metric measure spaces and their balls.

A :class:`Space` is ``n`` atoms with a symmetric distance matrix and positive
masses.  Balls are strict: ``B(x, r) = {y : dist(x, y) < r}``.  Sweeping ``r``
through the sorted distinct distances from each center realizes every distinct
ball, so any "sup over balls" is a finite maximum over :class:`BallFamily`.

Atoms make singleton balls available, which turns the Lebesgue
differentiation steps used throughout (``|f| <= M f`` and friends) into exact
identities.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from . import kernels
from .errors import (
    CMuTooSmall,
    NonPositiveMass,
    NonPositiveRadius,
    NonSymmetricMetric,
    UnknownPoint,
    ValidationError,
    ZeroOffDiagonal,
)

METRIC_KINDS = ("matrix", "abs1d", "circle")
DIMENSION_LAMBDAS = (2.0, 4.0, 8.0, 16.0)

# fixed seed for the membership-set hash used by ball deduplication
_HASH_SEED = 0x6D61786D


@dataclass(frozen=True)
class Ball:
    center: int
    radius: float
    members: tuple
    mass: float

    def __contains__(self, x):
        return x in self.members

    def __len__(self):
        return len(self.members)


class BallFamily:
    """Deduplicated realizable balls of a space.

    Ball ``i`` is the prefix of length ``sizes[i]`` of its center's distance
    ordering.  ``radius`` is the largest strict radius producing that set
    (``inf`` for balls equal to the whole space).
    """

    def __init__(self, space, centers, sizes):
        self.space = space
        self.centers = np.ascontiguousarray(centers, dtype=np.int32)
        self.sizes = np.ascontiguousarray(sizes, dtype=np.int32)
        n = space.n
        sd = space.sorted_dist
        nxt = np.where(self.sizes < n, sd[self.centers, np.minimum(self.sizes, n - 1)], np.inf)
        self.radii = nxt
        self.reach = sd[self.centers, self.sizes - 1]
        self.masses = space.prefix_sums(space.mass / space.mass)[self.centers, self.sizes - 1]

    def __len__(self):
        return len(self.centers)

    def members(self, i):
        c, k = self.centers[i], self.sizes[i]
        return np.sort(self.space.order[c, :k])

    def ball(self, i):
        return Ball(
            center=int(self.centers[i]),
            radius=float(self.radii[i]),
            members=tuple(int(v) for v in self.members(i)),
            mass=float(self.masses[i]),
        )

    @property
    def balls(self):
        return [self.ball(i) for i in range(len(self))]

    @cached_property
    def containing(self):
        """``containing[x]`` is the sorted index array of balls containing x."""
        n = self.space.n
        idx = np.repeat(np.arange(len(self)), self.sizes)
        pts = np.concatenate([self.space.order[c, :k] for c, k in zip(self.centers, self.sizes)])
        perm = np.lexsort((idx, pts))
        pts, idx = pts[perm], idx[perm]
        bounds = np.searchsorted(pts, np.arange(n + 1))
        return [idx[bounds[x] : bounds[x + 1]] for x in range(n)]

    def ball_sums(self, values):
        """``sum_{y in B} values[y] * mass[y]`` for every ball, fixed order."""
        return self.space.prefix_sums(values)[self.centers, self.sizes - 1]

    def ball_means(self, values):
        return self.ball_sums(values) / self.masses

    def indicator(self, i):
        chi = np.zeros(self.space.n)
        chi[self.space.order[self.centers[i], : self.sizes[i]]] = 1.0
        return chi


class Space:
    """Finite quasi-metric measure space.

    Parameters
    ----------
    point_ids : sequence of int
    dist : (n, n) array
        Symmetric, zero exactly on the diagonal.
    mass : (n,) array
        Strictly positive atom masses.
    a0 : float, optional
        Quasi-triangle constant when known analytically (e.g. a genuine
        metric).  Computed exactly by the triple sweep otherwise.
    coords, metric, exponent
        Generator metadata, kept for serialization.
    """

    def __init__(self, point_ids, dist, mass, *, a0=None, coords=None, metric="matrix", exponent=1.0):
        self.point_ids = np.asarray(point_ids, dtype=np.int64)
        self.dist = np.ascontiguousarray(dist, dtype=np.float64)
        self.mass = np.ascontiguousarray(mass, dtype=np.float64)
        self.coords = None if coords is None else np.asarray(coords, dtype=np.float64)
        self.metric = metric
        self.exponent = float(exponent)
        self._a0 = None if a0 is None else float(a0)
        for arr in (self.point_ids, self.dist, self.mass):
            arr.flags.writeable = False
        self._index = {int(p): i for i, p in enumerate(self.point_ids)}

    def __repr__(self):
        return f"Space(n={self.n}, metric={self.metric!r}, total_mass={self.total_mass:.6g})"

    @property
    def n(self):
        return len(self.mass)

    @cached_property
    def total_mass(self):
        return float(self.mass.sum())

    @cached_property
    def diameter(self):
        return float(self.dist.max()) if self.n else 0.0

    @cached_property
    def a0(self):
        if self._a0 is not None:
            return self._a0
        return quasi_triangle_constant(self)

    def index_of(self, point_id):
        try:
            return self._index[int(point_id)]
        except KeyError:
            raise UnknownPoint(f"unknown point id {point_id!r}") from None

    # -- neighbour tables -------------------------------------------------

    @cached_property
    def order(self):
        order = np.argsort(self.dist, axis=1, kind="stable").astype(np.int32)
        order.flags.writeable = False
        return order

    @cached_property
    def sorted_dist(self):
        return np.take_along_axis(self.dist, self.order.astype(np.intp), axis=1)

    @cached_property
    def tie_end(self):
        sd = self.sorted_dist
        te = np.ones(sd.shape, dtype=np.uint8)
        te[:, :-1] = sd[:, 1:] > sd[:, :-1]
        te.flags.writeable = False
        return te

    @cached_property
    def rank(self):
        """``rank[c, y]``: position of y in center c's distance ordering."""
        r = np.empty_like(self.order)
        np.put_along_axis(r, self.order.astype(np.intp), np.arange(self.n, dtype=np.int32)[None, :], axis=1)
        return r

    def prefix_sums(self, values):
        """Cumulative ``values * mass`` along each center's distance ordering."""
        vm = np.asarray(values, dtype=np.float64) * self.mass
        return np.cumsum(vm[self.order], axis=1)

    @cached_property
    def family(self):
        return enumerate_balls(self)

    # -- serialization ----------------------------------------------------

    def to_dict(self):
        d = {"points": [int(p) for p in self.point_ids], "metric": self.metric, "masses": self.mass.tolist()}
        if self.metric == "matrix":
            d["matrix"] = self.dist.tolist()
        else:
            d["coords"] = self.coords.tolist()
        if self.metric == "circle":
            d["exponent"] = self.exponent
        if self._a0 is not None:
            d["a0"] = self._a0
        return d

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict()), encoding="utf-8")

    @classmethod
    def from_dict(cls, d):
        metric = d.get("metric", "matrix")
        points = d["points"]
        mass = d["masses"]
        coords = d.get("coords")
        exponent = float(d.get("exponent", 1.0))
        if metric == "matrix":
            dist = np.asarray(d["matrix"], dtype=np.float64)
        elif metric == "abs1d":
            x = np.asarray(coords, dtype=np.float64).reshape(-1)
            dist = np.abs(x[:, None] - x[None, :])
        elif metric == "circle":
            t = np.asarray(coords, dtype=np.float64).reshape(-1)
            dist = circle_distance(t, exponent)
        else:
            raise ValidationError(f"unknown metric kind {metric!r}")
        return build_space(points, dist, mass, a0=d.get("a0"), coords=coords, metric=metric, exponent=exponent)

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def circle_distance(t, exponent=1.0):
    """Arc distance on the unit-circumference circle, raised to ``exponent``."""
    gap = np.abs(t[:, None] - t[None, :]) % 1.0
    arc = np.minimum(gap, 1.0 - gap)
    return arc**exponent if exponent != 1.0 else arc


def build_space(point_ids, dist, mass, *, a0=None, coords=None, metric="matrix", exponent=1.0):
    """Validate inputs and return a :class:`Space`.

    Raises :class:`NonSymmetricMetric`, :class:`ZeroOffDiagonal` or
    :class:`NonPositiveMass` on bad input.
    """
    dist = np.asarray(dist, dtype=np.float64)
    mass = np.asarray(mass, dtype=np.float64).reshape(-1)
    ids = list(point_ids)
    n = len(ids)
    if len(set(ids)) != n:
        raise ValidationError("duplicate point ids")
    if dist.shape != (n, n):
        raise ValidationError(f"distance matrix must be {n}x{n}, got {dist.shape}")
    if mass.shape != (n,):
        raise ValidationError(f"need {n} masses, got {mass.shape[0]}")
    if not np.all(np.isfinite(dist)):
        raise ValidationError("distances must be finite")
    if not np.array_equal(dist, dist.T):
        raise NonSymmetricMetric("distance matrix is not symmetric")
    if np.any(np.diag(dist) != 0):
        raise ValidationError("dist(x, x) must be 0")
    if np.any(dist < 0):
        raise ValidationError("distances must be nonnegative")
    off = dist + np.eye(n)
    if n and np.any(off == 0):
        raise ZeroOffDiagonal("dist(x, y) = 0 for some x != y")
    if not np.all(np.isfinite(mass)) or np.any(mass <= 0):
        raise NonPositiveMass("every mass must be strictly positive")
    if metric not in METRIC_KINDS:
        raise ValidationError(f"unknown metric kind {metric!r}")
    return Space(ids, dist, mass, a0=a0, coords=coords, metric=metric, exponent=exponent)


def quasi_triangle_constant(space):
    """Exact quasi-triangle constant: ``max(1, max dist(x,y)/(dist(x,z)+dist(z,y)))``."""
    if space.n < 3:
        return 1.0
    q = kernels.get().quasi_triangle(space.dist)
    return max(1.0, float(q))


def enumerate_balls(space):
    """All distinct realizable balls, first-encountered representative kept.

    Centers are visited in index order and radii increasing, so the
    representative of a membership set is its smallest (center, radius).
    Sets are keyed by two independent 64-bit additive hashes plus their
    cardinality, accumulated along each center's distance ordering.
    """
    n = space.n
    rng = np.random.default_rng(_HASH_SEED)
    r1 = rng.integers(0, np.iinfo(np.uint64).max, size=n, dtype=np.uint64, endpoint=True)
    r2 = rng.integers(0, np.iinfo(np.uint64).max, size=n, dtype=np.uint64, endpoint=True)
    order = space.order
    cs, js = np.nonzero(space.tie_end)
    with np.errstate(over="ignore"):
        h1 = np.cumsum(r1[order], axis=1, dtype=np.uint64)[cs, js]
        h2 = np.cumsum(r2[order], axis=1, dtype=np.uint64)[cs, js]
    keys = np.stack([h1, h2, js.astype(np.uint64)], axis=1)
    _, first = np.unique(keys, axis=0, return_index=True)
    first.sort()
    return BallFamily(space, cs[first], js[first] + 1)


def ball_at(space, center, radius):
    """The strict ball ``{y : dist(center, y) < radius}``; ``center`` is an index."""
    if not radius > 0:
        raise NonPositiveRadius(f"radius must be positive, got {radius}")
    if not 0 <= center < space.n:
        raise UnknownPoint(f"no point with index {center}")
    members = np.nonzero(space.dist[center] < radius)[0]
    return Ball(int(center), float(radius), tuple(int(v) for v in members), float(space.mass[members].sum()))


def subset_measure(space, subset):
    """Sum of masses over point indices in ``subset``."""
    idx = np.fromiter((int(v) for v in subset), dtype=np.int64)
    if idx.size == 0:
        return 0.0
    if idx.min() < 0 or idx.max() >= space.n:
        raise UnknownPoint("subset contains an unknown point")
    return float(space.mass[np.unique(idx)].sum())


def _ball_growth(space, factor):
    """For every realized (center, radius) pair: the mass of the ball and the
    mass of the ball with radius scaled by ``factor``.

    The radius of a realized ball is the largest strict radius giving it; the
    supremum of ``mu(B(x, factor r)) / mu(B(x, r))`` over r in that interval
    is attained there.  Whole-space balls are skipped (ratio 1).
    """
    n = space.n
    sd = space.sorted_dist
    cm = space.prefix_sums(np.ones(n))
    tie = space.tie_end.astype(bool)
    small, big = [], []
    for c in range(n):
        js = np.nonzero(tie[c, :-1])[0]
        if js.size == 0:
            continue
        r = sd[c, js + 1]
        cnt = np.searchsorted(sd[c], factor * r, side="left")
        small.append(cm[c, js])
        big.append(cm[c, cnt - 1])
    if not small:
        return np.ones(1), np.ones(1)
    return np.concatenate(small), np.concatenate(big)


def doubling_constant(space):
    """``max mu(B(x, 2r)) / mu(B(x, r))`` over points and realized radii."""
    small, big = _ball_growth(space, 2.0)
    return float(max(1.0, np.max(big / small)))


def upper_dimension_estimate(space, c_mu, lambdas=DIMENSION_LAMBDAS):
    """Smallest exponent n >= 0 with ``mu(B(x, l r)) <= c_mu l^n mu(B(x, r))``
    over ``l`` in ``lambdas`` and all realized (x, r)."""
    cd = doubling_constant(space)
    if c_mu < cd * (1 - 1e-12):
        raise CMuTooSmall(f"c_mu={c_mu} is below the doubling constant {cd}")
    best = 0.0
    for lam in lambdas:
        small, big = _ball_growth(space, lam)
        ratio = np.max(big / small) / c_mu
        if ratio > 1:
            best = max(best, math.log(ratio) / math.log(lam))
    return best
