"""Command-line front end.

    maxcomm space gen --kind grid1d --n 3 --length 3 --out s.json
    maxcomm space inspect --in s.json
    maxcomm eval --in s.json --f f.json --op mp --p 1 --out mf.csv
    maxcomm verify --suite pointwise --in s.json --seed 7 --out reports/
    maxcomm bench --n 2000 --out bench.json

Exit codes: 0 success, 1 a verification check failed, 2 usage error,
3 I/O error, 4 validation error.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import kernels
from .errors import MaxcommError, MissingFunction, UnknownSuite, ValidationError
from .examples import make_bessel_halfline, make_finite_torus, make_grid_1d
from .function_norms import as_field
from .operators import (
    commutator,
    delta_variant,
    iterated_maximal,
    maximal,
    maximal_commutator,
    maximal_llogl,
    sharp_maximal,
)
from .space import Space, doubling_constant, upper_dimension_estimate

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO, EXIT_INVALID = 0, 1, 2, 3, 4
OPS = ("mp", "sharp", "m2", "mllogl", "cb", "comm-mp", "comm-sharp", "delta")
COMMUTATOR_OPS = ("cb", "comm-mp", "comm-sharp")


def fmt(x):
    """17 significant digits, enough to round-trip a double."""
    return format(float(x), ".17g")


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def read_function(path, space, name):
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if isinstance(data, dict):
        data = data.get("values")
    if not isinstance(data, list):
        raise ValidationError(f"{name} file must hold a JSON array")
    return as_field(space, data, name)


# -- space ------------------------------------------------------------------------


def cmd_space_gen(args):
    if args.kind == "grid1d":
        sp = make_grid_1d(args.n, args.length)
    elif args.kind == "bessel":
        sp = make_bessel_halfline(args.lambda_b, args.n, args.r_max)
    else:
        sp = make_finite_torus(args.n, args.dim_growth)
    sp.save(args.out)
    print(f"wrote {sp.n}-point {args.kind} space to {args.out}")
    return EXIT_OK


def inspect_space(sp):
    c_mu = doubling_constant(sp)
    return {
        "points": sp.n,
        "total_mass": sp.total_mass,
        "diameter": sp.diameter,
        "a0": sp.a0,
        "doubling": c_mu,
        "upper_dimension": upper_dimension_estimate(sp, c_mu),
    }


def cmd_space_inspect(args):
    info = inspect_space(Space.load(args.input))
    for k, v in info.items():
        print(f"{k}={v:.17g}" if isinstance(v, float) else f"{k}={v}")
    return EXIT_OK


# -- eval -------------------------------------------------------------------------


def evaluate(sp, op, f, b=None, p=1.0, delta=0.5):
    if op in COMMUTATOR_OPS and b is None:
        raise MissingFunction(f"operator {op} needs --b")
    if op == "mp":
        return maximal(sp, f, p)
    if op == "sharp":
        return sharp_maximal(sp, f)
    if op == "m2":
        return iterated_maximal(sp, f)
    if op == "mllogl":
        return maximal_llogl(sp, f)
    if op == "cb":
        return maximal_commutator(sp, b, f)
    if op == "comm-mp":
        return commutator(sp, "maximal_p", b, f, p)
    if op == "comm-sharp":
        return commutator(sp, "sharp", b, f)
    if op == "delta":
        return delta_variant(sp, f, delta)
    raise ValidationError(f"unknown operator {op!r}")


def cmd_eval(args):
    sp = Space.load(args.input)
    f = read_function(args.f, sp, "f")
    b = read_function(args.b, sp, "b") if args.b else None
    vals = evaluate(sp, args.op, f, b, args.p, args.delta)
    write_csv(args.out, ["point_id", "value"], zip(sp.point_ids.tolist(), vals.tolist()))
    return EXIT_OK


# -- verify -----------------------------------------------------------------------


def write_reports(outdir, suite, reports):
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    dicts = [r.to_dict() for r in reports]
    (outdir / f"{suite}.json").write_text(json.dumps(dicts, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    cols = ["check_id", "tier", "instances", "max_violation", "fitted_constant", "percentile_95_ratio", "pass"]
    write_csv(
        outdir / f"{suite}.csv",
        cols,
        ([r.check_id, r.tier, r.instances, float(r.max_violation), float(r.fitted_constant),
          float(r.percentile_95_ratio), str(bool(r.passed)).lower()] for r in reports),
    )
    for r in reports:
        if r.rows:
            keys = list(r.rows[0].keys())
            write_csv(outdir / f"{suite}__{r.check_id}.csv", keys, ([row[k] for k in keys] for row in r.rows))


def cmd_verify(args):
    from .config import load_config
    from .verify import SUITES, run_suite

    if args.suite != "all" and args.suite not in SUITES:
        raise UnknownSuite(f"unknown suite {args.suite!r}")
    cfg = load_config(args.config)
    sp = Space.load(args.input)
    results = run_suite(args.suite, sp, seed=args.seed, config=cfg, threads=args.threads)
    failed = []
    for suite, reports in results.items():
        write_reports(args.out, suite, reports)
        for r in reports:
            status = "PASS" if r.passed else "FAIL"
            print(f"[{status}] {suite}/{r.check_id} ({r.tier}) max_violation={r.max_violation:.3g} "
                  f"fitted={r.fitted_constant:.6g}")
            if not r.passed:
                failed.append(r.check_id)
    return EXIT_FAIL if failed else EXIT_OK


# -- bench --------------------------------------------------------------------------


def cmd_bench(args):
    from .bench import run_benchmark

    res = run_benchmark(n=args.n, seed=args.seed, repeat=args.repeat, naive=not args.no_naive)
    text = json.dumps(res, sort_keys=True, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    print(text)
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="maxcomm", description=__doc__.splitlines()[0])
    ap.add_argument("--backend", choices=kernels.available(), help="kernel backend (default: compiled if built)")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("space", help="generate or inspect a space file")
    ssub = sp.add_subparsers(dest="action", required=True)
    gen = ssub.add_parser("gen")
    gen.add_argument("--kind", choices=("grid1d", "bessel", "torus"), required=True)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--length", type=float, default=None)
    gen.add_argument("--lambda-b", type=float, default=1.0)
    gen.add_argument("--r-max", type=float, default=1000.0)
    gen.add_argument("--dim-growth", type=float, default=1.0)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_space_gen)
    ins = ssub.add_parser("inspect")
    ins.add_argument("--in", dest="input", required=True)
    ins.set_defaults(func=cmd_space_inspect)

    ev = sub.add_parser("eval", help="evaluate an operator pointwise")
    ev.add_argument("--in", dest="input", required=True)
    ev.add_argument("--f", required=True)
    ev.add_argument("--b")
    ev.add_argument("--op", choices=OPS, required=True)
    ev.add_argument("--p", type=float, default=1.0)
    ev.add_argument("--q", type=float, default=None, help="accepted for symmetry; unused by pointwise ops")
    ev.add_argument("--delta", type=float, default=0.5)
    ev.add_argument("--out", required=True)
    ev.set_defaults(func=cmd_eval)

    ve = sub.add_parser("verify", help="run verification suites")
    ve.add_argument("--suite", required=True)
    ve.add_argument("--in", dest="input", required=True)
    ve.add_argument("--seed", type=int, default=0)
    ve.add_argument("--config")
    ve.add_argument("--out", required=True)
    ve.add_argument("--threads", type=int, default=1)
    ve.set_defaults(func=cmd_verify)

    be = sub.add_parser("bench", help="benchmark fast vs naive maximal evaluation")
    be.add_argument("--n", type=int, default=2000)
    be.add_argument("--seed", type=int, default=0)
    be.add_argument("--repeat", type=int, default=3)
    be.add_argument("--no-naive", action="store_true")
    be.add_argument("--out")
    be.set_defaults(func=cmd_bench)
    return ap


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        with kernels.using(args.backend) if args.backend else contextlib.nullcontext():
            return args.func(args)
    except UnknownSuite as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValidationError, MissingFunction) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (OSError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except MaxcommError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
