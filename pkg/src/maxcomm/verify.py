"""Verification harness: pointwise inequality sweeps, characterization
quantities, weak-type sweeps, operator-norm lower bounds and
John-Nirenberg decay fits.

Checks come in two tiers.  *Exact* checks are inequalities that hold
identically on a finite space; they pass when the largest violation is at
most ``exact_rtol`` times the input scale.  *Fitted* checks estimate a
constant as the largest pointwise ratio over a seeded ensemble; they pass
when the constant is finite (and under a configured ceiling where one
exists).  Stability across seeds is assessed separately by
:func:`fitted_stability`.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import ensembles as ens
from .config import load_config
from .errors import BadExponent, BadParameter, EmptyBall, EmptyGrid, UnknownCheck, UnknownSuite
from .examples import admissible_centers, make_counterexample_pair
from .function_norms import (
    as_field,
    ball_oscillations,
    bmo_norm,
    distribution_function,
    holder_gap,
    llogl_functional,
    log_plus,
    lp_norm,
)
from .operators import (
    commutator,
    delta_variant,
    maximal,
    maximal_commutator,
    maximal_llogl,
    sharp_maximal,
)
from .space import doubling_constant, upper_dimension_estimate
from .weights import (
    Weight,
    a1_constant,
    ap_ball_products,
    ap_constant,
    exp_weight_scan,
    unweighted_char_quantity,
    weighted_char_quantity,
)

EXACT_CHECKS = (
    "lemma_mc",
    "lemma_cbm",
    "msharp_le_2m",
    "m_chain",
    "msharp_chi_half",
    "mpb_ge_b",
    "e1e2_chain",
    "eq_ab",
)
FITTED_CHECKS = ("cor_cm", "cor_cb", "prop_212", "eq_mml_two_sided", "holder_llogl")
POINTWISE_CHECKS = EXACT_CHECKS + FITTED_CHECKS
SUITES = ("pointwise", "equivalence", "weaktype", "counterexample", "weights", "jn", "local")
OPNORM_KINDS = ("maximal", "sharp", "maximal_commutator", "commutator_mp", "commutator_sharp")

_F_CHECKS = {"msharp_le_2m", "m_chain", "msharp_chi_half"}
_B_CHECKS = {"mpb_ge_b", "e1e2_chain"}


class NotAWeightWarning(RuntimeWarning):
    """The supplied weight has a large A_p constant."""


def _finite(x):
    if isinstance(x, float) and not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return x


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return _finite(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


@dataclass
class Report:
    check_id: str
    instances: int = 0
    max_violation: float = 0.0
    fitted_constant: float = 0.0
    percentile_95_ratio: float = 0.0
    passed: bool = True
    tier: str = "exact"
    metadata: dict = field(default_factory=dict)
    values: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)

    def to_dict(self):
        return _jsonable(
            {
                "check_id": self.check_id,
                "tier": self.tier,
                "instances": self.instances,
                "max_violation": self.max_violation,
                "fitted_constant": self.fitted_constant,
                "percentile_95_ratio": self.percentile_95_ratio,
                "pass": bool(self.passed),
                "metadata": self.metadata,
                "values": self.values,
                "rows": self.rows,
            }
        )


def space_descriptor(space):
    d = {
        "n": space.n,
        "metric": space.metric,
        "total_mass": space.total_mass,
        "diameter": space.diameter,
        # finite instances stand in for infinite-measure spaces; the
        # diameter is the truncation radius
        "truncation_radius": space.diameter,
    }
    if space.metric == "circle":
        d["exponent"] = space.exponent
    return d


def _pmap(fn, items, threads=1):
    items = list(items)
    if threads is None or threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=int(threads)) as pool:
        return list(pool.map(fn, items))


class _Tally:
    """Running max violation and ratio collection for one check."""

    def __init__(self, check_id, tier, rtol):
        self.check_id = check_id
        self.tier = tier
        self.rtol = rtol
        self.count = 0
        self.violation = 0.0
        self.flagged = 0
        self.ratios = []

    def add(self, lhs, rhs, scale=None):
        lhs = np.asarray(lhs, dtype=np.float64).reshape(-1)
        rhs = np.asarray(rhs, dtype=np.float64).reshape(-1)
        self.count += 1
        if scale is None:
            scale = max(float(np.max(np.abs(lhs), initial=0.0)), float(np.max(np.abs(rhs), initial=0.0)))
        excess = float(np.max(lhs - rhs, initial=0.0))
        if excess > 0:
            self.violation = max(self.violation, excess / scale if scale > 0 else math.inf)
        pos = rhs > 0
        self.ratios.append(lhs[pos] / rhs[pos])
        self.flagged += int(np.count_nonzero(~pos & (lhs > 0)))

    def all_ratios(self):
        return np.concatenate(self.ratios) if self.ratios else np.zeros(0)

    def report(self, metadata, ceiling=None, values=None):
        r = self.all_ratios()
        fitted = float(r.max()) if r.size else 0.0
        p95 = float(np.percentile(r, 95)) if r.size else 0.0
        if self.tier == "exact":
            violation = self.violation
            ok = violation <= self.rtol
        else:
            # fitted tier: count x/0 points, plus any excess over the ceiling
            violation = float(self.flagged)
            if not math.isfinite(fitted):
                violation = math.inf
            elif ceiling is not None:
                violation += max(0.0, fitted - ceiling)
            ok = violation == 0
        vals = {"zero_majorant_points": self.flagged}
        if values:
            vals.update(values)
        return Report(
            check_id=self.check_id,
            instances=self.count,
            max_violation=violation,
            fitted_constant=fitted,
            percentile_95_ratio=p95,
            passed=ok,
            tier=self.tier,
            metadata=metadata,
            values=vals,
        )


# -- pointwise checks ---------------------------------------------------------


def _f_stats(space, f, checks, is_ball):
    out = {"Mf": maximal(space, f)}
    out["M2f"] = maximal(space, out["Mf"])
    if checks & {"msharp_le_2m", "msharp_chi_half"}:
        out["Msf"] = sharp_maximal(space, f)
    if "eq_mml_two_sided" in checks:
        out["Mll"] = maximal_llogl(space, f)
    out["is_ball"] = is_ball
    return out


def _b_stats(space, b, checks):
    out = {}
    if checks & {"cor_cm", "prop_212"}:
        out["bmo"] = bmo_norm(space, b)
    if "cor_cb" in checks:
        out["bmo_plus"] = bmo_norm(space, np.maximum(b, 0.0))
        out["bminus_inf"] = float(np.max(np.maximum(-b, 0.0)))
    if checks & _B_CHECKS:
        _, det = weighted_char_quantity(space, b, None, 1.0, "mp", 1.0, details=True)
        out["scan"] = det
    return out


def _pair_terms(space, b, f, fs_, bs_, checks, delta):
    """Per-check ``(lhs, rhs, scale)`` triples for one (b, f) pair."""
    terms = {}
    Mf, M2f = fs_["Mf"], fs_["M2f"]
    need_cb = checks & {"lemma_mc", "lemma_cbm", "cor_cm", "prop_212"}
    cbf = maximal_commutator(space, b, f) if need_cb else None
    # commutators are differences; relative error is measured against the operands
    if checks & {"lemma_cbm", "cor_cb"}:
        Mbf = maximal(space, b * f)
        comm = Mbf - b * Mf
        op_scale = max(float(np.max(np.abs(Mbf))), float(np.max(np.abs(b * Mf))))
    if "lemma_mc" in checks:
        bp = b - b.min()
        Mbpf = maximal(space, bp * f)
        comm_p = Mbpf - bp * Mf
        sc = max(float(np.max(np.abs(Mbpf))), float(np.max(np.abs(bp * Mf))), float(np.max(cbf)))
        terms["lemma_mc"] = (np.abs(comm_p), cbf, sc)
    if "lemma_cbm" in checks:
        rhs = cbf + 2.0 * np.maximum(-b, 0.0) * Mf
        terms["lemma_cbm"] = (np.abs(comm), rhs, max(op_scale, float(np.max(rhs))))
    if "cor_cm" in checks:
        terms["cor_cm"] = (cbf, bs_["bmo"] * M2f, None)
    if "cor_cb" in checks:
        terms["cor_cb"] = (np.abs(comm), (bs_["bmo_plus"] + bs_["bminus_inf"]) * M2f, None)
    if "prop_212" in checks:
        terms["prop_212"] = (delta_variant(space, cbf, delta), bs_["bmo"] * M2f, None)
    return terms


def _f_terms(space, f, fs_, checks):
    terms = {}
    if "msharp_le_2m" in checks:
        terms["msharp_le_2m"] = (fs_["Msf"], 2.0 * fs_["Mf"], None)
    if "m_chain" in checks:
        lhs = np.concatenate([np.abs(f), fs_["Mf"]])
        rhs = np.concatenate([fs_["Mf"], fs_["M2f"]])
        terms["m_chain"] = (lhs, rhs, None)
    if "msharp_chi_half" in checks and fs_["is_ball"]:
        terms["msharp_chi_half"] = (fs_["Msf"], np.full(space.n, 0.5), 0.5)
    return terms


def _b_terms(space, b, bs_, checks):
    terms = {}
    det = bs_.get("scan")
    scale = float(np.max(np.abs(b))) or 1.0
    if "mpb_ge_b" in checks:
        # margin = min_B (M_{1,B} b - |b|) per ball
        terms["mpb_ge_b"] = (-det["margin"], np.zeros_like(det["margin"]), scale)
    if "e1e2_chain" in checks:
        terms["e1e2_chain"] = (det["osc"], 2.0 * det["dev1"], scale)
    return terms


def eq_ab_terms(grid=None):
    """``1 + log+(ab) <= (1 + log+ a)(1 + log+ b)`` on a grid of a, b > 0."""
    g = np.logspace(-4, 4, 33) if grid is None else np.asarray(grid, dtype=np.float64)
    A, B = np.meshgrid(g, g)
    lhs = 1.0 + log_plus(A * B)
    rhs = (1.0 + log_plus(A)) * (1.0 + log_plus(B))
    return lhs.ravel(), rhs.ravel()


def _holder_pairs(space, seed, n_pairs):
    rng = np.random.default_rng([int(seed), 1])
    fam = space.family
    whole = int(np.argmax(fam.sizes))
    out = []
    for i in range(n_pairs):
        f = rng.normal(size=space.n)
        g = ens.random_b(space, ens.B_KINDS[i % len(ens.B_KINDS)], rng)
        j = whole if i == 0 else int(rng.integers(len(fam)))
        out.append((f, g, fam.space.order[fam.centers[j], : fam.sizes[j]]))
    return out


def pointwise_suite(space, spec=None, seed=0, checks=None, config=None, threads=1):
    """Run several pointwise checks on one seeded ensemble; one Report each."""
    cfg = load_config() if config is None else config
    spec = _spec_from_config(cfg) if spec is None else spec
    checks = POINTWISE_CHECKS if checks is None else tuple(checks)
    for c in checks:
        if c not in POINTWISE_CHECKS:
            raise UnknownCheck(f"unknown check {c!r}")
    cset = set(checks)
    delta = float(cfg["prop_212_delta"])
    rtol = float(cfg["exact_rtol"])
    bs, fs = ens.make_ensemble(space, spec, seed)
    n_rand = len(fs) - (min(spec.n_balls, len(space.family)) if "ball" in spec.f_kinds else 0)
    meta = {"seed": int(seed), "space": space_descriptor(space), "ensemble": spec.to_dict()}

    tallies = {c: _Tally(c, "exact" if c in EXACT_CHECKS else "fitted", rtol) for c in checks}
    mml_lo = []
    f_stats = _pmap(lambda i: _f_stats(space, fs[i], cset, i >= n_rand), range(len(fs)), threads)
    b_stats = _pmap(lambda i: _b_stats(space, bs[i], cset), range(len(bs)), threads)

    for i, f in enumerate(fs):
        for c, (lhs, rhs, sc) in _f_terms(space, f, f_stats[i], cset).items():
            tallies[c].add(lhs, rhs, sc)
        if "eq_mml_two_sided" in cset:
            m2, ml = f_stats[i]["M2f"], f_stats[i]["Mll"]
            tallies["eq_mml_two_sided"].add(m2, ml)
            pos = m2 > 0
            mml_lo.append(ml[pos] / m2[pos])
    for i, b in enumerate(bs):
        for c, (lhs, rhs, sc) in _b_terms(space, b, b_stats[i], cset).items():
            tallies[c].add(lhs, rhs, sc)

    pair_checks = cset - _F_CHECKS - _B_CHECKS - {"eq_ab", "holder_llogl", "eq_mml_two_sided"}
    if pair_checks:
        items = [(ib, jf) for ib in range(len(bs)) for jf in range(len(fs))]
        results = _pmap(
            lambda it: _pair_terms(space, bs[it[0]], fs[it[1]], f_stats[it[1]], b_stats[it[0]], pair_checks, delta),
            items,
            threads,
        )
        for terms in results:
            for c, (lhs, rhs, sc) in terms.items():
                tallies[c].add(lhs, rhs, sc)

    if "eq_ab" in cset:
        tallies["eq_ab"].add(*eq_ab_terms())
    if "holder_llogl" in cset:
        hp = _holder_pairs(space, seed, int(cfg["holder_pairs"]))
        gaps = _pmap(lambda t: holder_gap(space, t[0], t[1], t[2]), hp, threads)
        for lhs, rhs in gaps:
            tallies["holder_llogl"].add([lhs], [rhs])

    reports = []
    for c in checks:
        values = {}
        ceiling = None
        if c == "holder_llogl":
            ceiling = float(cfg["holder_max"])
            values["ceiling"] = ceiling
        if c == "eq_mml_two_sided":
            lo = np.concatenate(mml_lo) if mml_lo else np.zeros(0)
            # M2 f >= c1 M_LlogL f  <=>  c1 = 1 / max(M_LlogL / M2)
            c1 = float(1.0 / lo.max()) if lo.size and lo.max() > 0 else 0.0
            r = tallies[c].all_ratios()
            values.update({"c1": c1, "c2": float(r.max()) if r.size else 0.0})
        if c == "prop_212":
            values["delta"] = delta
        rep = tallies[c].report(dict(meta, check=c), ceiling=ceiling, values=values)
        if c == "eq_mml_two_sided":
            rep.passed = rep.passed and values["c1"] > 0
        reports.append(rep)
    return reports


def pointwise_inequality_report(check_id, space, ensemble_spec=None, seed=0, config=None, threads=1):
    if check_id not in POINTWISE_CHECKS:
        raise UnknownCheck(f"unknown check {check_id!r}")
    return pointwise_suite(space, ensemble_spec, seed, (check_id,), config, threads)[0]


def _spec_from_config(cfg, key="ensemble"):
    e = cfg.get(key, {})
    keys = ("n_b", "n_f", "n_balls", "sparse_fraction", "sign_variants")
    return ens.EnsembleSpec(**{k: v for k, v in e.items() if k in keys})


def fitted_constants(reports):
    """``{check_id: [constants...]}`` from pointwise reports (two for eq_mml)."""
    out = {}
    for r in reports:
        if r.tier != "fitted":
            continue
        if r.check_id == "eq_mml_two_sided":
            out["eq_mml_c1"] = [r.values["c1"]]
            out["eq_mml_c2"] = [r.values["c2"]]
        else:
            out[r.check_id] = [r.fitted_constant]
    return out


def stability(values, band=0.25):
    """Every value within ``band`` (relative) of the median, all finite."""
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0 or not np.all(np.isfinite(v)):
        return {"values": v.tolist(), "median": math.nan, "max_rel_dev": math.inf, "pass": False}
    med = float(np.median(v))
    dev = float(np.max(np.abs(v - med)) / abs(med)) if med != 0 else (0.0 if np.all(v == 0) else math.inf)
    return {"values": v.tolist(), "median": med, "max_rel_dev": dev, "pass": dev <= band}


def fitted_stability(space, seeds, checks=FITTED_CHECKS, spec=None, config=None, threads=1):
    """Fitted constants per seed and their stability verdicts."""
    cfg = load_config() if config is None else config
    collected = {}
    for s in seeds:
        reps = pointwise_suite(space, spec, s, checks, cfg, threads)
        for k, v in fitted_constants(reps).items():
            collected.setdefault(k, []).extend(v)
    band = float(cfg["stability_band"])
    return {k: stability(v, band) for k, v in collected.items()}


# -- equivalence ---------------------------------------------------------------


def equivalence_report(space, b, p=1.0, q=1.0, weight=None, config=None, seed=0, threads=1):
    """Characterization quantities for one b plus the exact per-ball chain
    ``osc_B(b) <= 2 mean_B |b - M_{p,B} b|``."""
    cfg = load_config() if config is None else config
    b = as_field(space, b, "b")
    p, q = float(p), float(q)
    if not (1 <= p < math.inf) or not (1 <= q < math.inf):
        raise BadExponent("p and q must lie in [1, inf)")
    w = None if weight is None else (weight if isinstance(weight, Weight) else Weight(space, weight))
    values = {"p": p, "q": q}
    if w is not None:
        wc = a1_constant(space, w) if p == 1 else ap_constant(space, w, p)
        values["weight_constant"] = wc
        if wc > float(cfg["ap_warn"]):
            warnings.warn(f"weight constant {wc:.3g} exceeds {cfg['ap_warn']}", NotAWeightWarning, stacklevel=2)
    values["bmo_mean_osc"] = bmo_norm(space, b)
    values["b_minus_inf"] = float(np.max(np.maximum(-b, 0.0)))
    iv_mp, det = weighted_char_quantity(space, b, w, q, "mp", p, details=True)
    values["iv_mp"] = iv_mp
    fam = space.family
    sub = _ball_subset(space, int(cfg["sharp_max_balls"]))
    values["iv_sharp"] = weighted_char_quantity(space, b, w, q, "sharp", balls=sub)
    values["iv_sharp_balls"] = int(len(sub))
    if q > 1:
        for kind in ("commutator_mp", "commutator_sharp"):
            values[f"opnorm_{kind}"] = operator_norm_estimate(
                kind, space, q, w, seed=seed, b=b, p=p, config=cfg, threads=threads
            )
    rtol = float(cfg["exact_rtol"])
    scale = float(np.max(np.abs(b))) or 1.0
    chain_gap = det["osc"] - 2.0 * det["dev1"]
    viol = max(0.0, float(chain_gap.max())) / scale
    values["chain_min_margin"] = float(-chain_gap.max())
    values["mpb_min_margin"] = float(det["margin"].min())
    viol = max(viol, max(0.0, -values["mpb_min_margin"]) / scale)
    return Report(
        check_id="equivalence",
        instances=len(fam),
        max_violation=viol,
        fitted_constant=iv_mp,
        percentile_95_ratio=float(np.percentile(det["devq"], 95)),
        passed=viol <= rtol,
        tier="exact",
        metadata={"seed": int(seed), "space": space_descriptor(space), "weighted": w is not None},
        values=values,
    )


def _ball_subset(space, limit):
    """Deterministic evenly spaced family indices (all when few enough)."""
    m = len(space.family)
    if m <= limit:
        return np.arange(m)
    return np.unique(np.linspace(0, m - 1, limit).round().astype(np.intp))


# -- operator norms --------------------------------------------------------------


def _apply(kind, space, f, b, p):
    if kind == "maximal":
        return maximal(space, f, p)
    if kind == "sharp":
        return sharp_maximal(space, f)
    if kind == "maximal_commutator":
        return maximal_commutator(space, b, f)
    if kind == "commutator_mp":
        return commutator(space, "maximal_p", b, f, p)
    if kind == "commutator_sharp":
        return commutator(space, "sharp", b, f)
    raise BadParameter(f"unknown operator {kind!r}")


def operator_norm_test_functions(space, seed=0, n_random=200, max_balls=None):
    """All family ball indicators (capped at ``max_balls``) then seeded
    Gaussian and sparse functions."""
    lim = len(space.family) if max_balls is None else max_balls
    fs = [space.family.indicator(int(i)) for i in _ball_subset(space, lim)]
    rng = np.random.default_rng([int(seed), 2])
    for i in range(n_random):
        fs.append(ens.random_f(space, ("gaussian", "sparse")[i % 2], rng))
    return fs


def operator_norm_estimate(
    kind, space, q, weight=None, ensemble_spec=None, seed=0, b=None, p=1.0, config=None,
    test_functions=None, threads=1,
):
    """Largest ``||T f||_{L^q(w)} / ||f||_{L^q(w)}`` over test functions.

    A lower bound for the operator norm.  ``ensemble_spec`` may give the
    number of random functions as ``n_f``.
    """
    q = float(q)
    if not (1 < q < math.inf):
        raise BadExponent(f"q must lie in (1, inf), got {q}")
    if kind not in OPNORM_KINDS:
        raise BadParameter(f"unknown operator {kind!r}")
    cfg = load_config() if config is None else config
    if b is None:
        b = np.zeros(space.n)
    b = as_field(space, b, "b")
    wv = None
    if weight is not None:
        wv = (weight if isinstance(weight, Weight) else Weight(space, weight)).w
    if test_functions is None:
        n_random = int(cfg["opnorm_random_f"]) if ensemble_spec is None else ensemble_spec.n_f
        test_functions = operator_norm_test_functions(space, seed, n_random, int(cfg["max_ball_indicators"]))

    def ratio(f):
        den = lp_norm(space, f, q, wv)
        if den == 0:
            return 0.0
        return lp_norm(space, _apply(kind, space, f, b, p), q, wv) / den

    vals = _pmap(ratio, test_functions, threads)
    return float(max(vals)) if vals else 0.0


# -- weak type ---------------------------------------------------------------------


WEAK_OPS = ("comm", "cb", "mllogl")


def _llogl_many(space, f, lams):
    t = np.abs(f)[None, :] / lams[:, None]
    lp = np.log(np.maximum(t, 1.0))
    return (t * (1.0 + lp) * space.mass).sum(axis=1)


def level_ratio_sup(space, v, f, lo, hi):
    """Exact ``sup_{lo <= lam <= hi} mu(|v| > lam) / llogl_functional(f, lam)``.

    The numerator is a right-continuous step function and the denominator
    decreases in lam, so the sup is a left limit at a level of ``|v|`` inside
    ``(lo, hi]`` or the value at ``hi``.
    """
    a = np.abs(np.asarray(v, dtype=np.float64))
    levels = np.unique(a[(a > lo) & (a <= hi)])
    lams = np.concatenate([levels, [hi]])
    order = np.argsort(a)
    cm = np.concatenate([[0.0], np.cumsum(space.mass[order][::-1])])[::-1]
    # cm[i] = mass of points at sorted position >= i
    sa = a[order]
    num = np.empty(lams.size)
    num[:-1] = cm[np.searchsorted(sa, levels, side="left")]
    num[-1] = cm[np.searchsorted(sa, hi, side="right")]
    phi = _llogl_many(space, np.asarray(f, dtype=np.float64), lams)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(phi > 0, num / np.where(phi > 0, phi, 1.0), np.where(num > 0, np.inf, 0.0))
    return float(r.max())


def weak_type_sweep(space, b, f, lambda_grid, ops=WEAK_OPS, criterion="bounded", ratio_max=1e6, precomputed=None):
    """Level-set masses of ``|[M,b]f|``, ``C_b f`` and ``M_LlogL f`` against
    ``llogl_functional(f, lam)`` and the weak-(1,1) functional.

    ``criterion="bounded"`` passes when every ratio is finite and at most
    ``ratio_max``; ``"increasing"`` passes when ``lam * mu(|[M,b]f| > lam)``
    strictly increases as lam decreases.  ``precomputed`` may hold any of
    the operator fields (keyed like ``ops``) to skip recomputation.
    """
    lams = np.asarray(list(lambda_grid), dtype=np.float64)
    if lams.size == 0:
        raise EmptyGrid("lambda grid is empty")
    if np.any(lams <= 0):
        raise BadParameter("lambda grid must be positive")
    lams = np.sort(lams)[::-1]
    b = as_field(space, b, "b")
    f = as_field(space, f)
    fields = {}
    pre = precomputed or {}
    if "comm" in ops:
        fields["comm"] = np.abs(commutator(space, "maximal_p", b, f))
    if "cb" in ops:
        fields["cb"] = maximal_commutator(space, b, f)
    if "mllogl" in ops:
        fields["mllogl"] = pre["mllogl"] if "mllogl" in pre else maximal_llogl(space, f)
    rows = []
    for lam in lams:
        phi = llogl_functional(space, f, lam)
        row = {"lambda": float(lam), "llogl_functional": phi}
        for k, v in fields.items():
            dist = distribution_function(space, v, lam)
            row[f"dist_{k}"] = dist
            row[f"ratio_{k}"] = dist / phi if phi > 0 else (0.0 if dist == 0 else math.inf)
            row[f"weak_{k}"] = float(lam) * dist
        rows.append(row)
    values = {}
    for k in fields:
        values[f"grid_sup_ratio_{k}"] = max(r[f"ratio_{k}"] for r in rows)
        values[f"sup_ratio_{k}"] = level_ratio_sup(space, fields[k], f, lams[-1], lams[0])
    if criterion == "bounded":
        sup = max(values.values()) if values else 0.0
        ok = math.isfinite(sup) and sup <= ratio_max
        fitted = values.get("sup_ratio_cb", sup)
    elif criterion == "increasing":
        weak = np.array([r["weak_comm"] for r in rows])
        ok = bool(np.all(np.diff(weak) > 0))
        fitted = float(weak[-1] / weak[0]) if weak[0] > 0 else math.inf
        values["weak_comm"] = weak.tolist()
    else:
        raise BadParameter(f"unknown criterion {criterion!r}")
    return Report(
        check_id="weak_type",
        instances=len(rows),
        max_violation=0.0 if ok else 1.0,
        fitted_constant=fitted,
        percentile_95_ratio=fitted,
        passed=ok,
        tier="fitted",
        metadata={"space": space_descriptor(space), "criterion": criterion, "ops": list(fields)},
        values=values,
        rows=rows,
    )


# -- John-Nirenberg ------------------------------------------------------------


def jn_decay_fit(space, b, ball=None, config=None):
    """Log-linear fit of ``mu({x in B : |b - m_B b| > alpha})`` against alpha,
    plus the exponential-integrability scan over family balls."""
    cfg = load_config() if config is None else config
    b = as_field(space, b, "b")
    if ball is None:
        members = np.arange(space.n)
    else:
        members = np.asarray(getattr(ball, "members", ball), dtype=np.intp)
    if members.size == 0:
        raise EmptyBall("ball has no members")
    m = space.mass[members]
    mu = float(m.sum())
    v = b[members]
    dev = np.abs(v - (v * m).sum() / mu)
    values = {}
    rows = []
    if not np.any(dev > 0):
        values.update({"slope": None, "intercept": None, "r2": 1.0})
        ok = True
    else:
        # largest alpha whose level set still carries the configured mass fraction
        frac = float(cfg["jn_min_level_fraction"])
        srt = np.argsort(dev)[::-1]
        tail = np.cumsum(m[srt])
        k = int(np.searchsorted(tail, frac * mu, side="left"))
        alpha_top = float(dev[srt][min(k + 1, len(srt) - 1)]) if k + 1 < len(srt) else 0.0
        alphas = np.linspace(0.0, alpha_top, 40)
        lv = np.array([m[dev > a].sum() for a in alphas])
        keep = lv > 0
        alphas, lv = alphas[keep], lv[keep]
        y = np.log(lv)
        if alphas.size >= 2 and np.ptp(alphas) > 0:
            slope, intercept = np.polyfit(alphas, y, 1)
            resid = y - (slope * alphas + intercept)
            sst = float(((y - y.mean()) ** 2).sum())
            r2 = 1.0 - float((resid**2).sum()) / sst if sst > 0 else 1.0
        else:
            slope, intercept, r2 = 0.0, float(y[0]) if y.size else 0.0, 0.0
        rows = [{"alpha": float(a), "level_mass": float(l)} for a, l in zip(alphas, lv)]
        values.update({"slope": float(slope), "intercept": float(intercept), "r2": float(r2)})
        ok = slope < 0 and r2 >= float(cfg["jn_r2_min"])
    values.update(_c3_scan(space, b, cfg))
    return Report(
        check_id="jn_decay",
        instances=len(rows),
        max_violation=0.0 if ok else 1.0,
        fitted_constant=values["slope"] if values["slope"] is not None else 0.0,
        percentile_95_ratio=0.0,
        passed=ok,
        tier="fitted",
        metadata={"space": space_descriptor(space), "ball_size": int(members.size)},
        values=values,
        rows=rows,
    )


def _c3_scan(space, b, cfg):
    grid = np.asarray(cfg["jn_c3_grid"], dtype=np.float64)
    c4 = float(cfg["jn_c4"])
    fam = space.family
    sup = np.zeros(grid.size)
    for i in _ball_subset(space, int(cfg["jn_max_balls"])):
        idx = space.order[fam.centers[i], : fam.sizes[i]]
        m = space.mass[idx]
        v = b[idx]
        dev = np.abs(v - (v * m).sum() / m.sum())
        avg = (np.exp(np.outer(grid, dev)) * m).sum(axis=1) / m.sum()
        sup = np.maximum(sup, avg)
    passing = grid[sup < c4]
    return {
        "c3_grid": grid.tolist(),
        "c3_sup_average": sup.tolist(),
        "c3_largest": float(passing.max()) if passing.size else 0.0,
        "c4": c4,
    }


# -- suites --------------------------------------------------------------------


def _origin_index(space):
    if space.coords is not None and space.metric == "abs1d":
        return int(np.argmin(space.coords.reshape(-1)))
    return 0


def _power_weight(space, rng):
    x1 = int(rng.integers(space.n))
    d = space.dist[x1]
    h = float(d[d > 0].min()) if space.n > 1 else 1.0
    return (d + h) ** rng.uniform(-0.5, 0.5)


def suite_pointwise(space, seed, cfg, threads):
    return pointwise_suite(space, None, seed, None, cfg, threads)


def suite_equivalence(space, seed, cfg, threads):
    bs, _ = ens.make_ensemble(space, _spec_from_config(cfg, "exact_ensemble"), seed)
    out = []
    for i, b in enumerate(bs):
        for p, q in ((1.0, 1.0), (2.0, 2.0)):
            r = equivalence_report(space, b, p, q, config=cfg, seed=seed, threads=threads)
            r.check_id = f"equivalence_b{i}_p{p:g}_q{q:g}"
            out.append(r)
    return out


def suite_weaktype(space, seed, cfg, threads):
    spec = _spec_from_config(cfg)
    bs, fs = ens.make_ensemble(space, spec, seed)
    lams = cfg["weaktype_lambdas"]
    fs = [f for f in fs if np.any(f != 0)]
    mll = _pmap(lambda f: maximal_llogl(space, f), fs, threads)
    items = []
    for b in bs:
        nb = bmo_norm(space, b)
        if nb > 0:
            items.extend((b / nb, j) for j in range(len(fs)))
    reps = _pmap(
        lambda t: weak_type_sweep(
            space, t[0], fs[t[1]], lams, ratio_max=float(cfg["ratio_max"]), precomputed={"mllogl": mll[t[1]]}
        ),
        items,
        threads,
    )
    agg = {}
    for k in ("sup_ratio_comm", "sup_ratio_cb", "sup_ratio_mllogl"):
        agg[k] = max((r.values[k] for r in reps), default=0.0)
    ok = all(r.passed for r in reps)
    return [
        Report(
            check_id="weaktype_ratios",
            instances=len(reps),
            max_violation=0.0 if ok else 1.0,
            fitted_constant=agg["sup_ratio_cb"],
            percentile_95_ratio=float(np.percentile([r.values["sup_ratio_cb"] for r in reps], 95)) if reps else 0.0,
            passed=ok,
            tier="fitted",
            metadata={"seed": int(seed), "space": space_descriptor(space), "lambdas": list(lams), "b_normalized": True},
            values=agg,
        )
    ]


def suite_counterexample(space, seed, cfg, threads):
    i0 = _origin_index(space)
    x0 = int(space.point_ids[i0])
    truncated = not np.any(space.dist[i0] >= 100.0)
    b, f = make_counterexample_pair(space, x0, truncated=True)
    rep = weak_type_sweep(space, b, f, cfg["counterexample_lambdas"], ops=("comm",), criterion="increasing")
    rep.check_id = "counterexample_weak11"
    rep.metadata.update({"x0": x0, "truncated": bool(truncated)})
    bmo = bmo_norm(space, b)
    adm = admissible_centers(space, t_min=2.0, centers=[i0])
    rep.values.update({"bmo_mean_osc_b": bmo, "x0_admissible": bool(adm.size == 1)})
    return [rep]


def suite_weights(space, seed, cfg, threads):
    rtol = float(cfg["exact_rtol"])
    spec = _spec_from_config(cfg, "exact_ensemble")
    bs, _ = ens.make_ensemble(space, spec, seed)
    rng = np.random.default_rng([int(seed), 3])
    meta = {"seed": int(seed), "space": space_descriptor(space)}
    sub = _ball_subset(space, int(cfg["sharp_max_balls"]))

    unit = _Tally("weights_unit_match", "exact", rtol)
    for b in bs:
        for kind in ("mp", "sharp"):
            w_val = weighted_char_quantity(space, b, None, 1.0, kind, 1.0, balls=sub)
            u_val = unweighted_char_quantity(space, b, kind, 1.0, balls=sub)
            unit.add([w_val, u_val], [u_val, w_val])
    reports = [unit.report(meta)]

    weights = [_power_weight(space, rng) for _ in range(len(bs))]
    ap1 = _Tally("ap_ge_1", "exact", rtol)
    dual = _Tally("ap_duality", "exact", rtol)
    mono = _Tally("ap_monotone_p", "exact", rtol)
    a1 = _Tally("a1_ge_1", "exact", rtol)
    ps = (1.5, 2.0, 3.0, 4.0)
    for w in weights:
        consts = [ap_constant(space, w, p) for p in ps]
        ap1.add(np.ones(len(ps)), consts)
        mono.add(consts[1:], consts[:-1])
        for p in ps:
            pp = p / (p - 1.0)
            lhs = ap_constant(space, w, p)
            rhs = ap_constant(space, w ** (-1.0 / (p - 1.0)), pp) ** (p - 1.0)
            dual.add([lhs, rhs], [rhs, lhs])
        a1.add([1.0], [a1_constant(space, w)])
    reports += [ap1.report(meta), dual.report(meta), mono.report(meta), a1.report(meta)]

    x0 = _origin_index(space)
    d = space.dist[x0]
    scale = float(np.median(d[d > 0])) if space.n > 1 else 1.0
    blog = np.log1p(d / scale)
    scan = exp_weight_scan(space, blog, None, 2.0, cfg["exp_scan_d"], float(cfg["exp_scan_threshold"]))
    vals = np.array([v for _, v in scan["rows"]])
    inc = _Tally("exp_weight_scan", "exact", rtol)
    inc.add(vals[:-1], vals[1:])
    rep = inc.report(meta, values={"largest_d": scan["largest_d"], "threshold": scan["threshold"]})
    rep.passed = rep.passed and bool(np.all(np.isfinite(vals)))
    rep.rows = [{"d": dd, "ap_constant": v} for dd, v in scan["rows"]]
    reports.append(rep)

    reports.append(cb_necessity_report(space, bs, [None] + weights[:1], 2.0, seed, cfg, threads))
    return reports


def cb_necessity_report(space, bs, weights, p, seed, cfg, threads=1):
    """``bmo(b) <= C [w]_{A_p}^{1/p} ||C_b||_{L^p(w)}`` with C fitted; the
    ball-indicator test functions force ``C <= 2`` exactly."""
    ratios = []
    rows = []
    fs = operator_norm_test_functions(space, seed, int(cfg["opnorm_random_f"]), int(cfg["max_ball_indicators"]))
    for i, b in enumerate(bs):
        nb = bmo_norm(space, b)
        for j, w in enumerate(weights):
            wc = 1.0 if w is None else ap_constant(space, w, p)
            op = operator_norm_estimate(
                "maximal_commutator", space, p, w, seed=seed, b=b, config=cfg, test_functions=fs, threads=threads
            )
            r = nb / (wc ** (1.0 / p) * op) if op > 0 else (0.0 if nb == 0 else math.inf)
            ratios.append(r)
            rows.append({"b": i, "weight": j, "bmo": nb, "ap": wc, "opnorm": op, "ratio": r})
    ratios = np.asarray(ratios)
    fitted = float(ratios.max()) if ratios.size else 0.0
    viol = max(0.0, fitted - 2.0) / 2.0
    return Report(
        check_id="cb_necessity",
        instances=len(rows),
        max_violation=viol,
        fitted_constant=fitted,
        percentile_95_ratio=float(np.percentile(ratios, 95)) if ratios.size else 0.0,
        passed=math.isfinite(fitted) and viol <= float(cfg["exact_rtol"]),
        tier="fitted",
        metadata={"seed": int(seed), "space": space_descriptor(space), "p": p},
        values={"bound": 2.0},
        rows=rows,
    )


def suite_jn(space, seed, cfg, threads):
    x0 = _origin_index(space)
    b = np.log1p(space.dist[x0])
    rep = jn_decay_fit(space, b, None, cfg)
    rep.metadata["x0"] = int(space.point_ids[x0])
    return [rep]


def local_bound_report(space, bs, cfg, c_mu=None, n_hat=None):
    """Large-radius bound ``osc_B(b) <= 2 C_mu (diam/R)^n ||b||_1 / mu(X)``
    on family balls of radius ``R >= diam / 2`` (R capped at the diameter)."""
    rtol = float(cfg["exact_rtol"])
    c_mu = doubling_constant(space) if c_mu is None else c_mu
    n_hat = upper_dimension_estimate(space, c_mu) if n_hat is None else n_hat
    fam = space.family
    diam = space.diameter
    R = np.minimum(fam.radii, diam)
    big = np.nonzero(R >= diam / 2.0)[0]
    t = _Tally("local_large_radius", "exact", rtol)
    for b in bs:
        osc = ball_oscillations(space, b, "mean")[big]
        rhs = 2.0 * c_mu * (diam / R[big]) ** n_hat * lp_norm(space, b, 1) / space.total_mass
        t.add(osc, rhs)
    return t.report(
        {"space": space_descriptor(space)},
        values={"c_mu": c_mu, "n_hat": n_hat, "balls": int(big.size)},
    )


def suite_local(space, seed, cfg, threads):
    rtol = float(cfg["exact_rtol"])
    bs, _ = ens.make_ensemble(space, _spec_from_config(cfg, "exact_ensemble"), seed)
    meta = {"seed": int(seed), "space": space_descriptor(space)}
    fin = _Tally("local_bmo_finite", "exact", rtol)
    vals = []
    for b in bs:
        v = bmo_norm(space, b, "local_l1")
        vals.append(v)
        fin.add([0.0], [1.0 if math.isfinite(v) else -1.0])
    c = float(np.random.default_rng([int(seed), 4]).normal())
    const_val = bmo_norm(space, np.full(space.n, c), "local_l1")
    fin.add([const_val, abs(c) * space.total_mass], [abs(c) * space.total_mass, const_val])
    rep = fin.report(meta, values={"local_l1": vals, "constant": c, "constant_value": const_val})
    return [rep, local_bound_report(space, bs, cfg)]


_SUITE_FUNCS = {
    "pointwise": suite_pointwise,
    "equivalence": suite_equivalence,
    "weaktype": suite_weaktype,
    "counterexample": suite_counterexample,
    "weights": suite_weights,
    "jn": suite_jn,
    "local": suite_local,
}


def run_suite(name, space, seed=0, config=None, threads=1):
    """Run one suite (or ``"all"``); returns ``{suite: [Report, ...]}``."""
    cfg = load_config() if config is None else config
    names = SUITES if name == "all" else (name,)
    out = {}
    for nm in names:
        if nm not in _SUITE_FUNCS:
            raise UnknownSuite(f"unknown suite {nm!r}")
        out[nm] = _SUITE_FUNCS[nm](space, seed, cfg, threads)
    return out


def exact_failures(reports):
    return [r for r in reports if r.tier == "exact" and not r.passed]
