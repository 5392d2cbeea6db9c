"""Muckenhoupt weights and the weighted characterization quantities."""
from __future__ import annotations

import math
import warnings

import numpy as np

from . import kernels
from .errors import BadExponent, ValidationError
from .function_norms import as_field
from .operators import _check_p, _sharp, maximal

W_MIN, W_MAX = 1e-12, 1e12
CHAR_KINDS = ("mp", "sharp")


class Weight:
    """Strictly positive weight with cached ball totals ``w(B)``.

    Values outside ``[1e-12, 1e12]`` are clamped (with a warning) so that the
    dual weight ``w^(-1/(p-1))`` stays finite.
    """

    def __init__(self, space, values):
        w = as_field(space, values, "w")
        if np.any(w <= 0):
            raise ValidationError("weight must be strictly positive")
        clipped = np.clip(w, W_MIN, W_MAX)
        if not np.array_equal(clipped, w):
            warnings.warn("weight values clamped to [1e-12, 1e12]", RuntimeWarning, stacklevel=2)
        clipped.flags.writeable = False
        self.space = space
        self.w = clipped
        self._totals = None

    @classmethod
    def ones(cls, space):
        return cls(space, np.ones(space.n))

    @property
    def ball_totals(self):
        if self._totals is None:
            self._totals = self.space.family.ball_sums(self.w)
        return self._totals


def _as_weight(space, w):
    if w is None:
        return Weight.ones(space)
    return w if isinstance(w, Weight) else Weight(space, w)


def _check_open_p(p):
    p = float(p)
    if not (1 < p < math.inf):
        raise BadExponent(f"p must lie in (1, inf), got {p}")
    return p


def ap_ball_products(space, w, p):
    """Per family ball: ``mean(w) * mean(w^(-1/(p-1)))^(p-1)``."""
    p = _check_open_p(p)
    w = _as_weight(space, w)
    fam = space.family
    mean_w = w.ball_totals / fam.masses
    mean_s = fam.ball_means(w.w ** (-1.0 / (p - 1.0)))
    return mean_w * mean_s ** (p - 1.0)


def ap_constant(space, w, p):
    """``[w]_{A_p}``: max over balls of the A_p product."""
    return float(ap_ball_products(space, w, p).max())


def a1_constant(space, w):
    """``max M w / w``."""
    w = _as_weight(space, w)
    return float(np.max(maximal(space, w.w) / w.w))


def weighted_char_quantity(space, b, w=None, q=1.0, kind="mp", p=1.0, balls=None, details=False):
    """Sup over balls of ``(1/w(B)) sum_B |b - T(b chi_B)|^q w mass``.

    ``kind="mp"`` takes ``T`` to be ``M_p`` restricted to B; ``kind="sharp"``
    takes ``T = 2 M#``.  ``balls`` limits the sweep to those family indices.
    With ``details`` a dict of per-ball arrays is returned as well.
    """
    q = float(q)
    if not (1 <= q < math.inf):
        raise BadExponent(f"q must lie in [1, inf), got {q}")
    b = as_field(space, b, "b")
    w = _as_weight(space, w)
    fam = space.family
    idx = np.arange(len(fam)) if balls is None else np.asarray(balls, dtype=np.intp)
    centers = np.ascontiguousarray(fam.centers[idx])
    sizes = np.ascontiguousarray(fam.sizes[idx])
    wm = np.ascontiguousarray(w.w * space.mass)
    if kind == "mp":
        p = _check_p(p)
        a = np.abs(b) ** p
        troot = space.prefix_sums(a) / space.prefix_sums(np.ones(space.n))
        troot = np.ascontiguousarray(troot ** (1.0 / p))
        devq, dev1, osc, margin = kernels.get().restricted_scan(
            space.order, space.tie_end, centers, sizes, troot, b, wm, space.mass, q
        )
    elif kind == "sharp":
        devq = np.empty(len(idx))
        dev1 = np.empty(len(idx))
        osc = np.full(len(idx), np.nan)
        margin = np.full(len(idx), np.nan)
        for i, (c, k) in enumerate(zip(centers, sizes)):
            members = space.order[c, :k]
            chi_b = np.zeros(space.n)
            chi_b[members] = b[members]
            t = 2.0 * np.maximum(_sharp(space, chi_b), 0.0)
            diff = np.abs(b[members] - t[members])
            devq[i] = (diff**q * wm[members]).sum() / wm[members].sum()
            dev1[i] = (diff * space.mass[members]).sum() / space.mass[members].sum()
    else:
        raise ValidationError(f"unknown kind {kind!r}")
    value = float(devq.max()) if len(devq) else 0.0
    if details:
        return value, {"devq": devq, "dev1": dev1, "osc": osc, "margin": margin, "balls": idx}
    return value


def exp_weight_scan(space, b, w=None, q=2.0, d_grid=(0.0,), threshold=math.inf):
    """``[e^{d b} w]_{A_q}`` for each d in ``d_grid``.

    Returns a dict with the rows and the largest ``|d|`` such that every grid
    value with ``|d'| <= |d|`` stays below ``threshold``.
    """
    q = _check_open_p(q)
    b = as_field(space, b, "b")
    base = _as_weight(space, w).w
    # shift b so e^{db} stays in range; constants cancel in the A_q product
    bc = b - 0.5 * (b.max() + b.min())
    rows = []
    for d in d_grid:
        ew = np.clip(np.exp(float(d) * bc) * base, W_MIN, W_MAX)
        rows.append((float(d), ap_constant(space, ew, q)))
    largest = 0.0
    for d, val in sorted(rows, key=lambda r: abs(r[0])):
        if val >= threshold:
            break
        largest = abs(d)
    return {"rows": rows, "largest_d": largest, "threshold": threshold, "q": q}


def unweighted_char_quantity(space, b, kind="mp", p=1.0, balls=None):
    """``sup_B (1/mu(B)) sum_B |b - T(b chi_B)| mass`` computed ball by ball
    through the public operators (independent of the scan kernel)."""
    b = as_field(space, b, "b")
    fam = space.family
    idx = np.arange(len(fam)) if balls is None else np.asarray(balls, dtype=np.intp)
    best = 0.0
    for i in idx:
        members = np.sort(space.order[fam.centers[i], : fam.sizes[i]])
        if kind == "mp":
            t = maximal(space, b, p, restriction=members)
        elif kind == "sharp":
            chi_b = np.zeros(space.n)
            chi_b[members] = b[members]
            t = 2.0 * np.maximum(_sharp(space, chi_b), 0.0)
        else:
            raise ValidationError(f"unknown kind {kind!r}")
        m = space.mass[members]
        best = max(best, float((np.abs(b[members] - t[members]) * m).sum() / m.sum()))
    return best
