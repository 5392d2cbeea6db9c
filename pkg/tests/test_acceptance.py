"""The ten acceptance criteria, each at its stated tolerance.

Every test records a PASS/FAIL line (see ``record`` in conftest) that is
printed in the terminal summary.
"""
import json
import math
import time
from fractions import Fraction

import numpy as np
import pytest

import oracle
from conftest import random_space
from maxcomm import kernels
from maxcomm import verify as V
from maxcomm.bench import run_benchmark
from maxcomm.config import load_config
from maxcomm.examples import make_bessel_halfline, make_finite_torus, make_grid_1d
from maxcomm.function_norms import bmo_norm, luxemburg_norm
from maxcomm.operators import commutator, maximal, maximal_commutator, naive_maximal, sharp_maximal
from maxcomm.space import build_space, doubling_constant
from maxcomm.weights import ap_ball_products, ap_constant

CFG = load_config()


@pytest.fixture(scope="module")
def spaces():
    return {
        "grid30": make_grid_1d(30),
        "bessel200": make_bessel_halfline(1, 200, 50),
        "torus64": make_finite_torus(64, 4),
    }


def rel_err(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    scale = max(float(np.max(np.abs(a))), float(np.max(np.abs(b))), 1e-300)
    return float(np.max(np.abs(a - b))) / scale


def test_criterion_01_exact_pointwise(spaces, record):
    spec = V._spec_from_config(CFG, "exact_ensemble")
    t0 = time.perf_counter()
    worst, failures = 0.0, []
    for name, sp in spaces.items():
        for seed in range(20):
            for r in V.pointwise_suite(sp, spec, seed, V.EXACT_CHECKS, CFG):
                worst = max(worst, r.max_violation)
                if not r.passed:
                    failures.append((name, seed, r.check_id, r.max_violation))
    elapsed = time.perf_counter() - t0
    ok = not failures and worst <= 1e-12 and elapsed < 60
    record(1, ok, f"60 ensembles, max_violation={worst:.2e}, {elapsed:.1f}s")
    assert not failures, failures[:5]
    assert elapsed < 60


def test_criterion_02_oracle_and_speed(spaces, record, tmp_path):
    worst = 0.0
    rng = np.random.default_rng(0)
    pool = list(spaces.values()) + [random_space(rng, n, ties=n % 2 == 0) for n in (5, 17, 64, 150, 200)]
    for backend in kernels.available():
        with kernels.using(backend):
            for sp in pool:
                assert sp.n <= 200
                for p in (1.0, 2.0):
                    f = rng.normal(size=sp.n)
                    worst = max(worst, rel_err(maximal(sp, f, p), naive_maximal(sp, f, p)))
    res = run_benchmark(n=2000, repeat=1, extra=False)
    (tmp_path / "bench.json").write_text(json.dumps(res, indent=2, sort_keys=True))
    print(json.dumps(res, indent=2, sort_keys=True))
    speed = res["speedup_fast_vs_naive"]
    ok = worst <= 1e-12 and speed >= 10 and res["max_rel_diff_naive"] <= 1e-12
    record(2, ok, f"max rel diff {worst:.2e}; speedup at n=2000 {speed:.1f}x")
    assert worst <= 1e-12
    assert speed >= 10


def test_criterion_03_invariances(spaces, record):
    rng = np.random.default_rng(3)
    errs = {"cb_shift": 0.0, "bmo_shift": 0.0, "bmo_scale": 0.0, "ap_duality": 0.0, "lux": 0.0}
    ap_ok = True
    for sp in spaces.values():
        for _ in range(3):
            b, f = rng.normal(size=sp.n), rng.normal(size=sp.n)
            c, s = rng.normal() * 5, rng.uniform(0.1, 10)
            base = maximal_commutator(sp, b, f)
            errs["cb_shift"] = max(errs["cb_shift"], rel_err(maximal_commutator(sp, b + c, f), base))
            nb = bmo_norm(sp, b)
            errs["bmo_shift"] = max(errs["bmo_shift"], abs(bmo_norm(sp, b + c) - nb) / nb)
            errs["bmo_scale"] = max(errs["bmo_scale"], abs(bmo_norm(sp, -s * b) - s * nb) / (s * nb))
            w = np.exp(rng.normal(size=sp.n))
            for p in (1.5, 2.0, 3.0):
                a = ap_constant(sp, w, p)
                d = ap_constant(sp, w ** (-1 / (p - 1)), p / (p - 1)) ** (p - 1)
                errs["ap_duality"] = max(errs["ap_duality"], abs(a - d) / a)
                prods = ap_ball_products(sp, w, p)
                ap_ok &= bool(np.all(prods >= 1 - 1e-12))
            # equality iff constant on the ball, checked ball by ball
            w2 = np.ones(sp.n)
            w2[rng.integers(sp.n)] = 3.0
            prods = ap_ball_products(sp, w2, 2.0)
            fam = sp.family
            for i in range(len(fam)):
                const = np.ptp(w2[fam.members(i)]) == 0
                ap_ok &= (abs(prods[i] - 1) <= 1e-12) == const
            ap_ok &= abs(ap_constant(sp, np.full(sp.n, 2.5), 2.0) - 1) <= 1e-12
            for kind in ("llogl", "expl"):
                l1 = luxemburg_norm(sp, f, kind=kind)
                errs["lux"] = max(errs["lux"], abs(luxemburg_norm(sp, s * f, kind=kind) - s * l1) / (s * l1))
    ok = (
        ap_ok
        and errs["cb_shift"] <= 1e-12
        and errs["bmo_shift"] <= 1e-12
        and errs["bmo_scale"] <= 1e-12
        and errs["ap_duality"] <= 1e-12
        and errs["lux"] <= 1e-9
    )
    record(3, ok, ", ".join(f"{k}={v:.1e}" for k, v in errs.items()) + f", ap>=1 & equality iff constant: {ap_ok}")
    assert ok, errs


def test_criterion_04_hand_fixtures(record):
    L = [[0, 1, 2], [1, 0, 1], [2, 1, 0]]
    one = [Fraction(1)] * 3
    f = [Fraction(1), Fraction(0), Fraction(0)]
    b = [Fraction(0), Fraction(1), Fraction(2)]
    # brute-force oracle first, then the library
    ref = {
        "Mf": oracle.maximal(L, one, f),
        "Msf": oracle.sharp(L, one, f),
        "Cb": oracle.maxcomm(L, one, b, f),
        "bmo": oracle.bmo(L, one, b),
        "doubling": oracle.doubling(L, one),
        "A2": oracle.a2(L, one, [Fraction(1), Fraction(4), Fraction(1)]),
    }
    Mb = oracle.maximal(L, one, [bi * fi for bi, fi in zip(b, f)])
    ref["comm"] = [m - bi * mf for m, bi, mf in zip(Mb, b, ref["Mf"])]
    hand = {
        "Mf": [1, Fraction(1, 2), Fraction(1, 3)],
        "Msf": [Fraction(1, 2), Fraction(1, 2), Fraction(4, 9)],
        "Cb": [0, Fraction(1, 2), Fraction(2, 3)],
        "comm": [0, Fraction(-1, 2), Fraction(-2, 3)],
        "bmo": Fraction(2, 3),
        "doubling": 3,
        "A2": Fraction(25, 16),
    }
    oracle_ok = all(ref[k] == hand[k] for k in hand)
    sp = make_grid_1d(3, 3.0)
    fv, bv = np.array([1.0, 0, 0]), np.array([0.0, 1, 2])
    lib = {
        "Mf": maximal(sp, fv),
        "Msf": sharp_maximal(sp, fv),
        "Cb": maximal_commutator(sp, bv, fv),
        "comm": commutator(sp, "maximal_p", bv, fv),
        "bmo": bmo_norm(sp, bv),
        "doubling": doubling_constant(sp),
        "A2": ap_constant(sp, np.array([1.0, 4.0, 1.0]), 2.0),
    }
    worst = 0.0
    for k, v in lib.items():
        h = np.array(hand[k], dtype=float)
        worst = max(worst, float(np.max(np.abs(np.asarray(v, float) - h))))
    ok = oracle_ok and worst <= 4e-16
    record(4, ok, f"oracle reproduces hand values: {oracle_ok}; library max abs error {worst:.1e}")
    assert ok


def test_criterion_05_luxemburg_fixtures(record):
    x = np.arange(5.0)
    sp = build_space(range(5), np.abs(x[:, None] - x[None, :]), np.array([1.0, 0.5, 2.0, 1.0, 3.0]))
    E = [0, 2, 3]
    chi = np.zeros(5)
    chi[E] = 1.0
    expl = luxemburg_norm(sp, chi, E, "expl")
    g = lambda lam: (1 / lam) * math.log(2 + 1 / lam) - 1  # noqa: E731
    lo, hi = 0.1, 10.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if g(mid) > 0 else (lo, mid)
    root = 0.5 * (lo + hi)
    llogl = luxemburg_norm(sp, chi, E, "llogl")
    e1, e2 = abs(expl - 1 / math.log(2)), abs(llogl - root)
    ok = e1 <= 1e-9 and e2 <= 1e-9
    record(5, ok, f"|expL - 1/ln2|={e1:.1e}, |LlogL - root|={e2:.1e} (root {root:.12f})")
    assert ok


def test_criterion_06_fitted_stability(spaces, record):
    lines, ok = [], True
    holder_max = 0.0
    for name, sp in spaces.items():
        st = V.fitted_stability(sp, range(5), config=CFG)
        expected = {"cor_cm", "cor_cb", "prop_212", "eq_mml_c1", "eq_mml_c2", "holder_llogl"}
        ok &= expected <= set(st)
        for k, v in st.items():
            ok &= v["pass"] and all(math.isfinite(x) for x in v["values"])
        holder_max = max(holder_max, max(st["holder_llogl"]["values"]))
        worst = max(st.values(), key=lambda v: v["max_rel_dev"])
        lines.append(f"{name} worst dev {worst['max_rel_dev']:.3f}")
    ok &= holder_max <= 4.0
    record(6, ok, "; ".join(lines) + f"; holder max {holder_max:.3f}")
    assert ok


def test_criterion_07_weak_type(spaces, record):
    t0 = time.perf_counter()
    band = float(CFG["stability_band"])
    ok, parts = True, []
    for name, sp in spaces.items():
        vals = [V.run_suite("weaktype", sp, seed=s, config=CFG)["weaktype"][0] for s in range(5)]
        ok &= all(r.passed for r in vals)
        for key in ("sup_ratio_cb", "sup_ratio_mllogl"):
            st = V.stability([r.values[key] for r in vals], band)
            ok &= st["pass"]
            if key == "sup_ratio_cb":
                parts.append(f"{name} C_b sup ratio median {st['median']:.3f} dev {st['max_rel_dev']:.3f}")
    big = make_bessel_halfline(1, 4000, 1000)
    rep = V.run_suite("counterexample", big, config=CFG)["counterexample"][0]
    weak = rep.values["weak_comm"]
    inc = bool(np.all(np.diff(weak) > 0))
    elapsed = time.perf_counter() - t0
    ok &= inc and rep.passed and elapsed < 300
    parts.append("counterexample lambda*mu = [" + ", ".join(f"{w:.3f}" for w in weak) + "]")
    record(7, ok, "; ".join(parts) + f"; {elapsed:.0f}s")
    assert inc and rep.passed
    assert ok


def test_criterion_08_weighted(spaces, record):
    band = float(CFG["stability_band"])
    ok, parts = True, []
    for name in ("grid30", "torus64"):
        sp = spaces[name]
        necessity = []
        for seed in range(5):
            reps = {r.check_id: r for r in V.run_suite("weights", sp, seed=seed, config=CFG)["weights"]}
            unit = reps["weights_unit_match"]
            scan = reps["exp_weight_scan"]
            vals = [row["ap_constant"] for row in scan.rows]
            ok &= unit.passed and unit.max_violation <= 1e-12
            ok &= scan.passed and all(math.isfinite(v) for v in vals) and bool(np.all(np.diff(vals) > 0))
            ok &= reps["cb_necessity"].passed
            necessity.append(reps["cb_necessity"].fitted_constant)
        st = V.stability(necessity, band)
        ok &= st["pass"]
        parts.append(f"{name} unit-weight match ok, bmo/(||C_b|| [w]^1/p) median {st['median']:.3f} dev {st['max_rel_dev']:.3f}")
    record(8, ok, "; ".join(parts))
    assert ok


def test_criterion_09_local(record):
    ok, parts = True, []
    for sp in (make_finite_torus(64, 4), make_finite_torus(48, 2)):
        for seed in range(3):
            reps = V.run_suite("local", sp, seed=seed, config=CFG)["local"]
            for r in reps:
                ok &= r.passed
        bound = reps[1]
        parts.append(f"n={sp.n}: C_mu={bound.values['c_mu']:.2f}, n_hat={bound.values['n_hat']:.3f}, balls={bound.values['balls']}")
    record(9, ok, "; ".join(parts))
    assert ok


def test_criterion_10_determinism(spaces, record):
    def dump(sp, suite, threads):
        res = V.run_suite(suite, sp, seed=11, config=CFG, threads=threads)
        return json.dumps({k: [r.to_dict() for r in v] for k, v in res.items()}, sort_keys=True).encode()

    checked, ok = 0, True
    runs = [("grid30", s) for s in V.SUITES] + [("torus64", s) for s in ("pointwise", "weaktype", "local", "jn")]
    runs.append(("bessel200", "pointwise"))
    for name, suite in runs:
        sp = spaces[name]
        a, b, c = dump(sp, suite, 1), dump(sp, suite, 2), dump(sp, suite, 1)
        ok &= a == b == c
        checked += 1
    record(10, ok, f"{checked} suite runs byte-identical at threads 1, 2, 1")
    assert ok
