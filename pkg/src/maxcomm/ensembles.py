"""Seeded random test functions for the verification harness.

``b`` functions come in three families (affine in the distance to a random
point, logarithmic in that distance, and random bounded values); ``f``
functions are Gaussian, sparse, or indicators of a fixed, evenly spread
subset of family balls.  The ball indicators matter: the necessity arguments
all test on ``chi_B``.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import BadParameter

B_KINDS = ("affine", "log", "bounded")
F_KINDS = ("gaussian", "sparse", "ball")


@dataclass(frozen=True)
class EnsembleSpec:
    n_b: int = 3
    n_f: int = 4
    b_kinds: tuple = B_KINDS
    f_kinds: tuple = F_KINDS
    sparse_fraction: float = 0.15
    n_balls: int = 2
    # also add -b and b - min(b) for every drawn b
    sign_variants: bool = True

    def __post_init__(self):
        for k in self.b_kinds:
            if k not in B_KINDS:
                raise BadParameter(f"unknown b kind {k!r}")
        for k in self.f_kinds:
            if k not in F_KINDS:
                raise BadParameter(f"unknown f kind {k!r}")
        if self.n_b < 1 or self.n_f < 0 or self.n_balls < 0:
            raise BadParameter("ensemble counts must be positive")

    def to_dict(self):
        d = asdict(self)
        d["b_kinds"] = list(self.b_kinds)
        d["f_kinds"] = list(self.f_kinds)
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        for key in ("b_kinds", "f_kinds"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)


def random_b(space, kind, rng, x0=None):
    """Random b of the given kind; ``x0`` anchors the distance-based kinds."""
    if x0 is None:
        x0 = int(rng.integers(space.n))
    d = space.dist[x0]
    scale = float(np.median(d[d > 0])) if space.n > 1 else 1.0
    if kind == "affine":
        return rng.normal() * d / scale + rng.normal()
    if kind == "log":
        return rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 2.0) * np.log1p(d / scale)
    if kind == "bounded":
        return rng.uniform(-1.0, 1.0, space.n)
    raise BadParameter(f"unknown b kind {kind!r}")


def random_f(space, kind, rng, sparse_fraction=0.15):
    n = space.n
    if kind == "gaussian":
        return rng.normal(size=n)
    if kind == "sparse":
        k = max(1, int(round(n * sparse_fraction)))
        f = np.zeros(n)
        f[rng.choice(n, size=k, replace=False)] = rng.normal(size=k)
        return f
    if kind == "ball":
        return space.family.indicator(int(rng.integers(len(space.family))))
    raise BadParameter(f"unknown f kind {kind!r}")


def ball_indicator_indices(space, count):
    """``count`` family indices evenly spread over the family, whole space
    first.  Deterministic, so every seed tests the same balls."""
    fam = space.family
    count = min(count, len(fam))
    if count <= 0:
        return np.zeros(0, dtype=np.intp)
    whole = int(np.argmax(fam.sizes))
    rest = np.setdiff1d(np.arange(len(fam)), [whole])
    k = min(count - 1, rest.size)
    pick = rest[np.linspace(0, rest.size - 1, k).round().astype(np.intp)] if k > 0 else []
    return np.concatenate([[whole], np.unique(pick)]).astype(np.intp)


def make_ensemble(space, spec, seed):
    """Return ``(bs, fs)``: lists of b and f arrays, deterministic in ``seed``.

    Anchor points of the distance-based b kinds are stratified over the point
    index range so every seed covers the whole space.
    """
    rng = np.random.default_rng(seed)
    kinds = [spec.b_kinds[i % len(spec.b_kinds)] for i in range(spec.n_b)]
    bs = []
    for i, kind in enumerate(kinds):
        same = [j for j, k in enumerate(kinds) if k == kind]
        stratum, strata = same.index(i), len(same)
        lo = space.n * stratum // strata
        hi = max(lo + 1, space.n * (stratum + 1) // strata)
        b = random_b(space, kind, rng, int(rng.integers(lo, hi)))
        bs.append(b)
        if spec.sign_variants:
            bs.extend([-b, b - b.min()])
    fs = []
    rand_kinds = [k for k in spec.f_kinds if k != "ball"]
    for i in range(spec.n_f):
        if rand_kinds:
            fs.append(random_f(space, rand_kinds[i % len(rand_kinds)], rng, spec.sparse_fraction))
    if "ball" in spec.f_kinds:
        for j in ball_indicator_indices(space, spec.n_balls):
            fs.append(space.family.indicator(int(j)))
    return bs, fs


def pairs(spec_or_lists, space=None, seed=0):
    """All ``(i, b, f)`` of the product ensemble in a fixed order."""
    if isinstance(spec_or_lists, EnsembleSpec):
        bs, fs = make_ensemble(space, spec_or_lists, seed)
    else:
        bs, fs = spec_or_lists
    out = []
    for ib, b in enumerate(bs):
        for jf, f in enumerate(fs):
            out.append((ib * len(fs) + jf, b, f))
    return out
