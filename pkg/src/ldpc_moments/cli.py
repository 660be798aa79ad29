"""Command-line surface: table/figure reproduction and verification suites.

Commands
  growth   growth-rate curve over an abscissa grid
  bound    concentration-bound curve (the data behind the figures)
  table    omega_min and the bound at omega_min+ for a list of degree pairs
  exact    exact first/second moments at small block length
  mc       Monte-Carlo moments against the exact oracle
  verify   named self-check suites; nonzero exit on any failure

Output is CSV (default) or JSON; identical configuration and seed produce
byte-identical files.  Exit codes: 0 ok, 1 verification failure, 2 usage
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import ensemble_oracle, exactcomb, firstmoment, secondmoment
from .errors import SolverError, UnsupportedPolyError
from .genfun import KIND_WEIGHT, KINDS, EnsembleParams

BOUND_HEADER = ("abscissa", "x", "growth", "delta", "bound", "cond1", "cond2")
GROWTH_HEADER = ("abscissa", "x", "growth", "curvature")
TABLE_HEADER = ("pair", "min_abscissa", "bound")
EXACT_HEADER = ("n", "W", "first", "second")
MC_HEADER = ("moment", "mean", "variance", "halfwidth", "exact", "within_3sigma")
VERIFY_HEADER = ("check", "status", "measured", "tolerance")

VERIFY_SUITES = ("hayman", "locallimit", "closedform", "endpoint", "exact", "mc")

# the tables report the one-sided limit omega -> omega_min+
MIN_ABSCISSA_OFFSET = 1e-6


def run_growth_curve(params, kind, grid):
    rows = []
    for w in grid:
        row = {"abscissa": w, "x": None, "growth": None, "curvature": None}
        try:
            gp = firstmoment.growth_point(params, kind, w)
            row.update(x=gp.saddle_x, growth=gp.growth, curvature=gp.curvature_b)
        except (SolverError, ValueError) as exc:
            row["growth"] = _error_code(exc)
        rows.append(row)
    return rows


def run_bound_curve(params, kind, grid, epsilon):
    """Rows of (abscissa, x, growth, delta, bound, cond1, cond2).

    Abscissas with nonpositive growth get bound="markov"; rows where a
    dominance condition fails keep delta/bound empty; per-row numerical
    failures are recorded in the bound column and never abort the sweep.
    """
    rows = []
    for w in grid:
        row = {k: None for k in BOUND_HEADER}
        row["abscissa"] = w
        try:
            gp = firstmoment.growth_point(params, kind, w)
            row.update(x=gp.saddle_x, growth=gp.growth)
            if gp.growth <= 0.0:
                row["bound"] = "markov"
            else:
                rep = secondmoment.delta(params, kind, w, epsilon)
                row.update(cond1=rep.condition1_ok, cond2=rep.condition2_ok,
                           delta=rep.delta, bound=rep.bound)
        except (SolverError, ValueError) as exc:
            row["bound"] = _error_code(exc)
        rows.append(row)
    return rows


def run_table(pairs, kind, epsilon):
    """One row per degree pair: typical minimum abscissa and bound there."""
    rates = {round(1.0 - l / r, 12) for l, r in pairs}
    if len(rates) != 1:
        raise ValueError(f"pairs must share one design rate, got rates {sorted(rates)}")
    rows = []
    for l, r in pairs:
        row = {"pair": f"{l}:{r}", "min_abscissa": None, "bound": None}
        try:
            params = EnsembleParams(l, r)
            wmin = firstmoment.min_abscissa(params, kind)
            row["min_abscissa"] = wmin
            rep = secondmoment.delta(params, kind, wmin + MIN_ABSCISSA_OFFSET, epsilon)
            row["bound"] = rep.bound if rep.bound is not None else "conditions_failed"
        except (SolverError, ValueError) as exc:
            row["bound"] = _error_code(exc)
        rows.append(row)
    return rows


def run_exact(params, kind, n, W):
    first = exactcomb.exact_first_moment(params, n, W, kind)
    second = exactcomb.exact_second_moment(params, n, W, kind)
    return [{"n": n, "W": W, "first": str(first), "second": str(second)}]


def run_mc(params, kind, n, W, samples, seed):
    rows = []
    for moment in (1, 2):
        est = ensemble_oracle.mc_moments(params, n, W, kind, samples, seed,
                                         moment=moment)
        exact = (exactcomb.exact_first_moment(params, n, W, kind) if moment == 1
                 else exactcomb.exact_second_moment(params, n, W, kind))
        inside = abs(est.mean - float(exact)) <= est.confidence_halfwidth_3sigma
        rows.append({
            "moment": moment,
            "mean": est.mean,
            "variance": est.variance,
            "halfwidth": est.confidence_halfwidth_3sigma,
            "exact": str(exact),
            "within_3sigma": bool(inside),
        })
    return rows


def run_verify(suite, seed=12345):
    """Run one named self-check suite; returns (rows, all_passed)."""
    if suite not in VERIFY_SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {VERIFY_SUITES}")
    checks = {
        "hayman": _verify_hayman,
        "locallimit": _verify_locallimit,
        "closedform": _verify_closedform,
        "endpoint": _verify_endpoint,
        "exact": _verify_exact,
        "mc": _verify_mc,
    }[suite](seed)
    rows = [{"check": name, "status": status, "measured": measured,
             "tolerance": tol} for name, status, measured, tol in checks]
    ok = all(row["status"] != "FAIL" for row in rows)
    return rows, ok


# ---------------------------------------------------------------------------
# verify suites

def _verify_hayman(seed):
    checks = []
    binom = exactcomb.ExactPolynomial(1, {0: 1, 1: 1})
    approx = firstmoment.hayman_coeff(binom, 60, 18)
    err = abs(approx / math.comb(60, 18) - 1.0)
    checks.append(("binomial_60_18", _status(err <= 0.02), err, 0.02))

    p6 = exactcomb.poly_weight_check(6)
    exact = exactcomb.power_coeff(p6, 50, 10)
    ratio = firstmoment.hayman_coeff(p6, 50, 10) / exact
    checks.append(("weight_poly_ratio", _status(0.95 <= ratio <= 1.05),
                   ratio, "0.95..1.05"))

    errs = {}
    for n in (20, 40):
        m, k = n * 3 // 6, round(n * 3 * 0.3)
        exact = exactcomb.power_coeff(p6, m, k)
        errs[n] = abs(firstmoment.hayman_coeff(p6, m, k) / exact - 1.0)
    ok = errs[40] < errs[20] and errs[40] < 0.10 and errs[20] < 0.10
    checks.append(("convergence_n20_n40", _status(ok),
                   f"{errs[20]:.4g}->{errs[40]:.4g}", "decreasing <0.1"))

    off = firstmoment.hayman_coeff(p6, 9, 7)  # odd index off the even lattice
    checks.append(("off_lattice_zero", _status(off == 0.0), off, 0.0))

    try:
        firstmoment.hayman_coeff(exactcomb.ExactPolynomial(1, {0: 5}), 10, 3)
        checks.append(("single_term_poly", "FAIL", "no error raised", "UNSUPPORTED_POLY"))
    except UnsupportedPolyError:
        checks.append(("single_term_poly", "SKIP", "UNSUPPORTED_POLY", "degenerate input"))
    except ValueError as exc:
        checks.append(("single_term_poly", "FAIL", repr(exc), "UNSUPPORTED_POLY"))
    return checks


def _llt_errors(params, n, omega, alpha, offsets):
    l, r = params.left_degree, params.right_degree
    W, i0 = round(n * omega), round(n * alpha)
    base = (l * (W - i0), l * i0, l * (W - i0))
    pair = exactcomb.expand_pair_gf(params, KIND_WEIGHT)
    indices = [base] + [tuple(base[k] + o[k] for k in range(3)) for o in offsets]
    coeffs = exactcomb.power_coefficients(pair, n * l // r, indices)
    errors = {}
    for o in offsets:
        j = tuple(base[k] + o[k] for k in range(3))
        exact_ratio = coeffs[j] / coeffs[base]
        pred = secondmoment.local_limit_ratio(params, KIND_WEIGHT, n, omega,
                                              alpha, o)
        errors[o] = abs(pred / exact_ratio - 1.0)
    return errors


def _verify_locallimit(seed):
    params = EnsembleParams(3, 6)
    omega, alpha = 1.0 / 3.0, 1.0 / 6.0
    offsets = [(-3, 3, -3), (3, -3, 3), (2, 0, 0), (0, 2, 0), (-1, 1, -1), (1, 1, 1)]
    e24 = _llt_errors(params, 24, omega, alpha, offsets)
    e48 = _llt_errors(params, 48, omega, alpha, offsets)
    checks = []
    for o in offsets:
        ok = e24[o] <= 0.30 and e48[o] < e24[o]
        checks.append((f"offset_{o[0]}_{o[1]}_{o[2]}", _status(ok),
                       f"{e24[o]:.4g}->{e48[o]:.4g}", "<=0.3 decreasing"))
    ident = secondmoment.local_limit_ratio(params, KIND_WEIGHT, 24, omega,
                                           alpha, (0, 0, 0))
    checks.append(("identity_offset", _status(ident == 1.0), ident, 1.0))
    return checks


def _verify_closedform(seed):
    params = EnsembleParams(3, 4)
    checks = []
    worst = 0.0
    for k in range(15):
        w = 0.15 + 0.05 * k
        diff = abs(secondmoment.delta_value(params, KIND_WEIGHT, w)
                   - secondmoment.delta34_closed_form(w))
        worst = max(worst, diff)
    checks.append(("grid_0.15_0.85", _status(worst <= 1e-9), worst, 1e-9))
    spot = abs(secondmoment.delta34_closed_form(0.25) - 0.08059)
    checks.append(("spot_0.25", _status(spot <= 1e-4), spot, 1e-4))
    return checks


def _verify_endpoint(seed):
    params = EnsembleParams(3, 6)
    checks = []
    sad = secondmoment.endpoint_exponent(params, KIND_WEIGHT, 0.3, method="saddle")
    ext = secondmoment.endpoint_exponent(params, KIND_WEIGHT, 0.3,
                                         method="extrapolate")
    diff = abs(sad - ext)
    checks.append(("saddle_vs_extrapolation", _status(diff <= 1e-3), diff, 1e-3))

    peak = secondmoment.exponent_curve(params, KIND_WEIGHT, 0.3, 0.09)
    ident = abs(peak - 2.0 * firstmoment.growth_rate(params, KIND_WEIGHT, 0.3))
    checks.append(("peak_identity", _status(ident <= 1e-8), ident, 1e-8))

    # exact growth of the disjoint-support term approaches the endpoint value
    endpoint = secondmoment.endpoint_exponent(params, KIND_WEIGHT, 0.5)
    errs = {}
    for n in (24, 48):
        s0 = exactcomb.exact_term(params, n, n // 2, 0, KIND_WEIGHT)
        errs[n] = abs(math.log(float(s0)) / n - endpoint)
    ok = errs[48] < errs[24]
    checks.append(("disjoint_term_growth", _status(ok),
                   f"{errs[24]:.4g}->{errs[48]:.4g}", "decreasing"))
    return checks


def _verify_exact(seed):
    params = EnsembleParams(2, 4)
    checks = []
    for kind in KINDS:
        worst = "match"
        for W in range(5):
            for moment in (1, 2):
                ex = ensemble_oracle.exhaustive_moment(params, 4, W, kind, moment)
                gf = (exactcomb.exact_first_moment(params, 4, W, kind) if moment == 1
                      else exactcomb.exact_second_moment(params, 4, W, kind))
                if ex != gf:
                    worst = f"W={W} m={moment}: {ex} != {gf}"
        checks.append((f"exhaustive_{kind}", _status(worst == "match"),
                       worst, "exact equality"))
    return checks


def _verify_mc(seed):
    params = EnsembleParams(3, 6)
    n, W, samples = 12, 4, 10_000
    checks = []
    for moment, exact in (
            (1, exactcomb.exact_first_moment(params, n, W, KIND_WEIGHT)),
            (2, exactcomb.exact_second_moment(params, n, W, KIND_WEIGHT))):
        attempts = []
        ok = False
        for trial in range(2):  # rerun once with a fresh seed on failure
            est = ensemble_oracle.mc_moments(
                params, n, W, KIND_WEIGHT, samples,
                seed + trial * samples, moment=moment)
            dev = abs(est.mean - float(exact))
            attempts.append(f"{dev:.4g}/{est.confidence_halfwidth_3sigma:.4g}")
            if dev <= est.confidence_halfwidth_3sigma:
                ok = True
                break
        checks.append((f"moment{moment}_3sigma", _status(ok),
                       ";".join(attempts), "|dev| <= 3sigma"))
    return checks


def _status(ok):
    return "PASS" if ok else "FAIL"


def _error_code(exc):
    return getattr(exc, "code", "ERROR")


# ---------------------------------------------------------------------------
# output formatting

def _fmt_cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.9g}"
    return str(v)


def render_csv(header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt_cell(row[k]) for k in header))
    return "\n".join(lines) + "\n"


def render_json(header, rows):
    out = [{k: row[k] for k in header} for row in rows]
    return json.dumps(out, indent=2) + "\n"


def _emit(args, header, rows):
    text = (render_csv(header, rows) if args.format == "csv"
            else render_json(header, rows))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# argument parsing

def _build_parser():
    parser = argparse.ArgumentParser(
        prog="ldpc-moments",
        description="Concentration bounds for regular LDPC weight and "
                    "stopping-set distributions.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, *, grid=False, block=False, sampling=False):
        p.add_argument("--kind", choices=KINDS, default=KIND_WEIGHT)
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        if grid:
            p.add_argument("--min", type=float, required=True)
            p.add_argument("--max", type=float, required=True)
            p.add_argument("--steps", type=int, required=True)
        if block:
            p.add_argument("--n", type=int, required=True)
            p.add_argument("--weight", type=int, default=None)
            p.add_argument("--size", type=int, default=None)
        if sampling:
            p.add_argument("--samples", type=int, default=10_000)
            p.add_argument("--seed", type=int, default=12345)

    p_growth = sub.add_parser("growth", help="growth-rate curve")
    p_growth.add_argument("--l", type=int, required=True)
    p_growth.add_argument("--r", type=int, required=True)
    add_common(p_growth, grid=True)

    p_bound = sub.add_parser("bound", help="concentration-bound curve")
    p_bound.add_argument("--l", type=int, required=True)
    p_bound.add_argument("--r", type=int, required=True)
    p_bound.add_argument("--epsilon", type=float, default=0.95)
    add_common(p_bound, grid=True)

    p_table = sub.add_parser("table", help="omega_min/bound table for pairs")
    p_table.add_argument("--pairs", required=True,
                         help="comma list like 3:6,6:12,12:24")
    p_table.add_argument("--epsilon", type=float, default=0.95)
    add_common(p_table)

    p_exact = sub.add_parser("exact", help="exact moments at small n")
    p_exact.add_argument("--l", type=int, required=True)
    p_exact.add_argument("--r", type=int, required=True)
    add_common(p_exact, block=True)

    p_mc = sub.add_parser("mc", help="Monte-Carlo moments vs exact oracle")
    p_mc.add_argument("--l", type=int, required=True)
    p_mc.add_argument("--r", type=int, required=True)
    add_common(p_mc, block=True, sampling=True)

    p_verify = sub.add_parser("verify", help="run a self-check suite")
    p_verify.add_argument("--suite", choices=VERIFY_SUITES, required=True)
    p_verify.add_argument("--seed", type=int, default=12345)
    p_verify.add_argument("--format", choices=("csv", "json"), default="csv")
    p_verify.add_argument("--out", default=None)
    return parser


def _parse_pairs(text):
    pairs = []
    for chunk in text.split(","):
        l_str, _, r_str = chunk.partition(":")
        pairs.append((int(l_str), int(r_str)))
    return pairs


def _grid(args, parser):
    if not args.min < args.max:
        parser.error("--min must be smaller than --max")
    if args.steps < 2:
        parser.error("--steps must be at least 2")
    return [float(v) for v in np.linspace(args.min, args.max, args.steps)]


def _block_index(args, parser):
    W = args.weight if args.kind == KIND_WEIGHT else args.size
    if W is None:
        flag = "--weight" if args.kind == KIND_WEIGHT else "--size"
        parser.error(f"{flag} is required for kind={args.kind}")
    return W


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "growth":
            params = EnsembleParams(args.l, args.r)
            rows = run_growth_curve(params, args.kind, _grid(args, parser))
            _emit(args, GROWTH_HEADER, rows)
        elif args.command == "bound":
            params = EnsembleParams(args.l, args.r)
            if not 0.0 < args.epsilon <= 1.0:
                parser.error("--epsilon must lie in (0, 1]")
            rows = run_bound_curve(params, args.kind, _grid(args, parser),
                                   args.epsilon)
            _emit(args, BOUND_HEADER, rows)
        elif args.command == "table":
            try:
                pairs = _parse_pairs(args.pairs)
            except ValueError:
                parser.error(f"cannot parse --pairs {args.pairs!r}")
            try:
                rows = run_table(pairs, args.kind, args.epsilon)
            except ValueError as exc:
                parser.error(str(exc))
            _emit(args, TABLE_HEADER, rows)
        elif args.command == "exact":
            params = EnsembleParams(args.l, args.r)
            rows = run_exact(params, args.kind, args.n, _block_index(args, parser))
            _emit(args, EXACT_HEADER, rows)
        elif args.command == "mc":
            params = EnsembleParams(args.l, args.r)
            rows = run_mc(params, args.kind, args.n, _block_index(args, parser),
                          args.samples, args.seed)
            _emit(args, MC_HEADER, rows)
        elif args.command == "verify":
            rows, ok = run_verify(args.suite, seed=args.seed)
            _emit(args, VERIFY_HEADER, rows)
            if not ok:
                return 1
    except SystemExit as exc:
        return int(exc.code or 0)
    except SolverError as exc:
        print(f"numerical failure [{exc.code}]: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        code = getattr(exc, "code", "INVALID")
        print(f"invalid input [{code}]: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
