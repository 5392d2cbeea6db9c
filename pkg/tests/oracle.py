"""Brute-force reference implementations used only by the tests.

Balls are enumerated as ``{y : d(c, y) <= t}`` for every center c and every
distinct distance t in row c.  Arithmetic is exact (Fraction) when the inputs
are Fractions, so hand-derived fixtures can be recomputed without rounding.
"""
from fractions import Fraction


def balls(dist):
    n = len(dist)
    seen = []
    for c in range(n):
        for t in sorted(set(dist[c])):
            s = frozenset(y for y in range(n) if dist[c][y] <= t)
            if s not in seen:
                seen.append(s)
    return seen


def _mean(vals, mass, s):
    mu = sum(mass[y] for y in s)
    return sum(vals[y] * mass[y] for y in s) / mu


def maximal(dist, mass, f):
    out = [None] * len(dist)
    for s in balls(dist):
        v = _mean([abs(x) for x in f], mass, s)
        for x in s:
            out[x] = v if out[x] is None else max(out[x], v)
    return out


def sharp(dist, mass, f):
    out = [0] * len(dist)
    for s in balls(dist):
        m = _mean(f, mass, s)
        v = _mean([abs(x - m) for x in f], mass, s)
        for x in s:
            out[x] = max(out[x], v)
    return out


def maxcomm(dist, mass, b, f):
    out = [0] * len(dist)
    for s in balls(dist):
        for x in s:
            v = _mean([abs(b[x] - b[y]) * abs(f[y]) for y in range(len(f))], mass, s)
            out[x] = max(out[x], v)
    return out


def bmo(dist, mass, b):
    best = 0
    for s in balls(dist):
        m = _mean(b, mass, s)
        best = max(best, _mean([abs(x - m) for x in b], mass, s))
    return best


def doubling(dist, mass):
    """``max mu(B(x, 2r)) / mu(B(x, r))`` over strict balls, r ranging over
    every radius just above a realized distance."""
    n = len(dist)
    best = 1
    for c in range(n):
        ds = sorted(set(dist[c]))
        for i, d in enumerate(ds):
            if i + 1 == len(ds):
                continue
            r = ds[i + 1]  # strict ball of radius r is {dist <= d}
            small = sum(mass[y] for y in range(n) if dist[c][y] < r)
            big = sum(mass[y] for y in range(n) if dist[c][y] < 2 * r)
            best = max(best, Fraction(big) / Fraction(small))
    return best


def a2(dist, mass, w):
    best = 0
    for s in balls(dist):
        best = max(best, _mean(w, mass, s) * _mean([1 / Fraction(x) for x in w], mass, s))
    return best
