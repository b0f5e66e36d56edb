"""Command line front end: one subcommand per experiment or verifier.

Exit codes: 0 success, 2 invalid flags, 3 guard exceeded, 4 property violation.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import pipeline
from .correlations import enumerate_specs, gowers_norm, random_spec, s8_identity_check
from .digits import DigitError, carry_count, carry_profile
from .dirichlet import odd_elimination_census, odd_eliminate
from .discrepancy import GuardExceeded, TorusSequence, discrepancy, etk_rhs
from .parallel import resolve_threads
from .plotting import Series, render, write_series
from .suites import vaaler_trials, vdc_trials

EXIT_OK, EXIT_USAGE, EXIT_GUARD, EXIT_VIOLATION = 0, 2, 3, 4
DEFAULT_SEED = 0x5EED


class UsageError(ValueError):
    pass


@dataclass
class Outcome:
    payload: dict
    rows: list | None = None  # CSV table; defaults to one row of scalar payload fields
    series: list = field(default_factory=list)
    violation: bool = False


def _clean(obj):
    """JSON-safe copy: non-finite floats become null, numpy scalars become Python ones."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def _fit_slope(xs, ys) -> float | None:
    if len(xs) < 2:
        return None
    return float(np.polyfit(xs, ys, 1)[0])


# ---------------------------------------------------------------------------
# subcommands


def cmd_density(args, threads: int) -> Outcome:
    res = pipeline.density_experiment(args.log2_n, args.checkpoints, threads)
    rows = res.get("checkpoints", [{k: res[k] for k in ("N", "count", "deviation")}])
    pts = [(r["N"], r["deviation"]) for r in rows if r["deviation"] > 0]
    return Outcome(res, rows, [Series("deviation |count/N - 1/2|", pts, "N", "deviation", True, True)])


def cmd_expsum_s0(args, threads: int) -> Outcome:
    if args.nu_max is None:
        res = pipeline.s0_sup(args.nu, args.xi_grid, threads)
        return Outcome(res)
    if args.nu_max < args.nu:
        raise UsageError("--nu-max must be at least --nu")
    res = pipeline.s0_decay_experiment(range(args.nu, args.nu_max + 1), args.xi_grid, threads, args.seed)
    fit = res.get("fit")
    violation = fit is not None and not (fit["slope"] < 0 and fit["ci_high"] < 0)
    pts = [(r["nu"], r["sup"]) for r in res["rows"]]
    return Outcome(res, res["rows"], [Series("grid sup |S0|", pts, "nu", "sup |S0|", False, True)], violation)


def cmd_gowers(args, threads: int) -> Outcome:
    lo = args.rho if args.rho_min is None else args.rho_min
    if lo > args.rho or lo < 1:
        raise UsageError("need 1 <= --rho-min <= --rho")
    rows = []
    for rho in range(lo, args.rho + 1):
        row = {"rho": rho, "q": args.q, "value": gowers_norm(rho, args.q, args.method)}
        if args.q == 2 and 3 * rho <= 30:
            # independent route for the same quantity
            other = gowers_norm(rho, 2, "direct" if args.method != "direct" else "fast")
            row["paths_agree"] = abs(other - row["value"]) <= 1e-9
        rows.append(row)
    payload = dict(rows[-1])
    violation = any(r.get("paths_agree") is False for r in rows)
    if len(rows) > 1:
        slope = _fit_slope([r["rho"] for r in rows], [math.log2(r["value"]) for r in rows])
        payload["rows"] = rows
        payload["eta"] = -slope
        violation = violation or not payload["eta"] > 0
    pts = [(r["rho"], r["value"]) for r in rows]
    return Outcome(payload, rows, [Series(f"U^{args.q} norm power", pts, "rho", "value", False, True)], violation)


def cmd_carry(args, threads: int) -> Outcome:
    res = carry_count(args.a, args.b, args.r, args.lam)
    payload = {"A": args.a, "B": args.b, "r": args.r, "lambda": args.lam, "count": res.count,
               "bound": None if res.bound is None else float(res.bound),
               "bound_exact": res.bound, "holds": res.holds}
    top = max(args.lam, 3 * max(1, args.b + args.r).bit_length())
    prof = carry_profile(args.a, args.b, args.r, top)
    pts = [(lam, c) for lam, c in enumerate(prof)]
    return Outcome(payload, None, [Series("carry count by lambda", pts, "lambda", "count")], res.holds is False)


def cmd_oddelim(args, threads: int) -> Outcome:
    if args.census:
        c = odd_elimination_census(args.ell, args.kappa, args.seed, args.sample_size)
        payload = {"ell": c.ell, "kappa": c.kappa, "good_count": c.good_count, "total": c.total,
                   "bound": c.bound, "sampled": c.sampled,
                   "omega0_per_omega": c.omega0_per_omega, "holds": c.holds}
        return Outcome(payload, violation=not c.holds)
    mu = args.ell - 4 * args.kappa - 4 if args.mu is None else args.mu
    if mu < 0:
        raise UsageError("mu must be nonnegative (default ell - 4 kappa - 4)")
    res = odd_eliminate(args.omega, args.ell, args.kappa, mu)
    payload = {"omega": res.omega, "ell": args.ell, "kappa": args.kappa, "mu": mu, "found": res.found,
               "checked": res.checked, "witness_M": res.witness_M,
               "max_witness": max(res.witnesses) if res.witnesses else None}
    pts = list(enumerate(res.witnesses))
    series = [Series("least odd witness", pts, "omega0", "M")] if pts else []
    return Outcome(payload, None, series)


def _parse_xi(text: str) -> Fraction:
    try:
        xi = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad --xi {text!r}") from exc
    if not 0 < xi < Fraction(1, 100):
        raise UsageError("--xi must lie in (0, 1/100)")
    return xi


def cmd_params(args, threads: int) -> Outcome:
    xi = _parse_xi(args.xi)
    s = pipeline.build_schedule(args.nu, xi, args.zeta_const)
    payload = {"schedule": s.as_dict()}
    rows = None
    violation = False
    audit_ok = None
    if args.audit or args.budget:
        a = pipeline.audit_schedule(s, with_nu0=args.audit)
        audit_ok = a.ok
        if args.audit:
            payload["audit"] = {"ok": a.ok, "violations": a.violations, "nu0": a.nu0}
    if args.budget:
        if not audit_ok:
            payload["budget"] = None
        else:
            b = pipeline.error_budget(s)
            rows = [{"name": t.name, "log2": t.log2, "kind": t.kind, "c": t.rate(s.nu), "note": t.note}
                    for t in b.terms]
            bad = [t.name for t in b.terms if t.kind == "closed" and t.log2 is not None and t.log2 >= 0]
            payload["budget"] = {"terms": rows, "nonnegative_closed": bad}
            violation = bool(bad)
    return Outcome(payload, rows, violation=violation)


def cmd_vaaler(args, threads: int) -> Outcome:
    res = vaaler_trials(args.h, args.samples, args.seed)
    return Outcome(res.as_dict(), violation=not res.ok)


def _read_points(path: str, dim: int) -> np.ndarray:
    src = sys.stdin if path == "-" else open(path)
    with src:
        pts = np.loadtxt(src, ndmin=2)
    if pts.size == 0:
        raise UsageError("input holds no points")
    if pts.shape[1] != dim:
        raise UsageError(f"input has {pts.shape[1]} columns, expected {dim}")
    return pts


def cmd_discrepancy(args, threads: int) -> Outcome:
    try:
        pts = _read_points(args.input, args.dim)
    except OSError as exc:
        raise UsageError(str(exc)) from exc
    seq = TorusSequence(pts)
    rep = discrepancy(seq, args.grid)
    payload = {"N": rep.N, "dim": rep.dim, "value": rep.value, "method": rep.method,
               "grid_resolution": rep.grid_resolution, "padding": rep.padding, "upper": rep.upper}
    series = []
    if args.etk:
        rows = [{"H": H, "etk_rhs": etk_rhs(seq, H)} for H in range(1, args.etk + 1)]
        payload["etk_rhs"] = rows[-1]["etk_rhs"]
        payload["H"] = args.etk
        # the constant in the inequality is unspecified: report the fitted one
        payload["fitted_constant"] = rep.value / rows[-1]["etk_rhs"]
        series.append(Series("ETK right-hand side", [(r["H"], r["etk_rhs"]) for r in rows], "H", "rhs"))
    return Outcome(payload, None, series)


def cmd_s8_identity(args, threads: int) -> Outcome:
    if args.exhaustive_nu > 8 or args.lam > 24:
        raise GuardExceeded("exhaustive grid limited to nu <= 8, lambda <= 24")
    ex = s8_identity_check(enumerate_specs(args.lam, args.exhaustive_nu), args.literal_window)
    rng = np.random.default_rng(args.seed)
    rnd = s8_identity_check((random_spec(rng)[1] for _ in range(args.random)), args.literal_window)
    payload = {"lambda": args.lam, "nu_max": args.exhaustive_nu, "literal_window": args.literal_window,
               "exhaustive": {"checked": ex.checked, "failures": ex.failures, "max_error": ex.max_error},
               "random": {"checked": rnd.checked, "failures": rnd.failures, "max_error": rnd.max_error}}
    first = ex.first_failure or rnd.first_failure
    payload["first_failure"] = None if first is None else vars(first)
    return Outcome(payload, violation=bool(ex.failures or rnd.failures))


def cmd_vdc_verify(args, threads: int) -> Outcome:
    res = vdc_trials(args.variant, args.trials, args.seed)
    return Outcome(res.as_dict(), violation=not res.ok)


COMMANDS = {
    "density": cmd_density,
    "expsum-s0": cmd_expsum_s0,
    "gowers": cmd_gowers,
    "carry": cmd_carry,
    "oddelim": cmd_oddelim,
    "params": cmd_params,
    "vaaler": cmd_vaaler,
    "discrepancy": cmd_discrepancy,
    "s8-identity": cmd_s8_identity,
    "vdc-verify": cmd_vdc_verify,
}


# ---------------------------------------------------------------------------
# parsing and output


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be a nonnegative integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "plot-data"), default="json")
    common.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
    common.add_argument("--threads", default=None, help="worker count or 'auto'; GELFOND_THREADS overrides")
    common.add_argument("--out-dir", type=Path, default=None,
                        help="also write tables, series files and a PNG figure here")

    p = argparse.ArgumentParser(prog="gelfond", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("density", parents=[common], help="count n < 2**K with t(n**3) = 0")
    q.add_argument("--log2-n", type=_nonneg, required=True)
    q.add_argument("--checkpoints", type=_positive, default=1)

    q = sub.add_parser("expsum-s0", parents=[common], help="grid supremum of |S0(nu, xi)|")
    q.add_argument("--nu", type=_nonneg, required=True)
    q.add_argument("--xi-grid", type=_positive, default=None)
    q.add_argument("--nu-max", type=_nonneg, default=None, help="decay table over nu .. nu-max")

    q = sub.add_parser("gowers", parents=[common], help="Gowers norm power of Thue-Morse mod 2**rho")
    q.add_argument("--rho", type=_positive, required=True)
    q.add_argument("--q", type=_positive, default=2)
    q.add_argument("--rho-min", type=_positive, default=None, help="table and decay fit over rho-min .. rho")
    q.add_argument("--method", choices=("auto", "fast", "direct"), default="auto")

    q = sub.add_parser("carry", parents=[common], help="carry lemma count against its bound")
    q.add_argument("--a", type=_nonneg, required=True)
    q.add_argument("--b", type=_nonneg, required=True)
    q.add_argument("--r", type=_nonneg, required=True)
    q.add_argument("--lambda", dest="lam", type=_nonneg, required=True)

    q = sub.add_parser("oddelim", parents=[common], help="odd-multiplier digit elimination")
    q.add_argument("--kappa", type=_positive, required=True)
    q.add_argument("--ell", type=_positive, required=True)
    q.add_argument("--census", action="store_true")
    q.add_argument("--omega", type=_nonneg, default=0)
    q.add_argument("--mu", type=_nonneg, default=None)
    q.add_argument("--sample-size", type=_positive, default=1 << 10)

    q = sub.add_parser("params", parents=[common], help="parameter schedule, audit and error budget")
    q.add_argument("--nu", type=_positive, required=True)
    q.add_argument("--xi", default="1/15000")
    q.add_argument("--zeta-const", type=_positive, default=pipeline.ZETA_CONST)
    q.add_argument("--audit", action="store_true")
    q.add_argument("--budget", action="store_true")

    q = sub.add_parser("vaaler", parents=[common], help="Vaaler and interval-detector bounds at random points")
    q.add_argument("--h", type=_positive, required=True)
    q.add_argument("--samples", type=_positive, default=10**5)

    q = sub.add_parser("discrepancy", parents=[common], help="discrepancy of a point file")
    q.add_argument("--dim", type=_positive, required=True)
    q.add_argument("--input", required=True, help="whitespace table, one point per line; '-' for stdin")
    q.add_argument("--etk", type=_nonneg, default=0, help="Erdos-Turan-Koksma frequency cut-off H")
    q.add_argument("--grid", type=_nonneg, default=0, help="grid resolution (0: exact sweep in dim 1)")

    q = sub.add_parser("s8-identity", parents=[common], help="S8 defining form against its linearisation")
    q.add_argument("--exhaustive-nu", type=_nonneg, default=6)
    q.add_argument("--lambda", dest="lam", type=_positive, default=12)
    q.add_argument("--random", type=_nonneg, default=0, help="additional random larger specs")
    q.add_argument("--literal-window", action="store_true")

    q = sub.add_parser("vdc-verify", parents=[common], help="van der Corput inequalities on random trials")
    q.add_argument("--variant", choices=("gen", "mr", "iter"), required=True)
    q.add_argument("--trials", type=_positive, default=500)
    return p


def _dumps(payload) -> str:
    return json.dumps(_clean(payload), sort_keys=True, separators=(",", ":"))


def _cell(v):
    if isinstance(v, (dict, list)):
        return _dumps(v)
    return "" if v is None else v


def _csv(outcome: Outcome) -> str:
    rows = outcome.rows
    if rows is None:
        rows = [{k: v for k, v in outcome.payload.items() if not isinstance(v, (dict, list))}]
    rows = _clean(rows)
    keys = sorted({k for r in rows for k in r})
    buf = io.StringIO()
    w = csv.writer(buf)  # RFC 4180: CRLF line ends, minimal quoting
    w.writerow(keys)
    for r in rows:
        w.writerow([_cell(r.get(k)) for k in keys])
    return buf.getvalue()


def _write_reports(command: str, outcome: Outcome, out_dir: Path) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    (out_dir / f"{command}.json").write_text(_dumps(outcome.payload) + "\n")
    (out_dir / f"{command}.csv").write_text(_csv(outcome), newline="")
    written += [out_dir / f"{command}.json", out_dir / f"{command}.csv"]
    for i, s in enumerate(outcome.series):
        written.append(write_series(s, out_dir / f"{command}_series{i}.dat"))
    if outcome.series:
        written.append(render(outcome.series, out_dir / f"{command}.png", command))
    return written


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.format == "plot-data" and args.out_dir is None:
        print("gelfond: --format plot-data needs --out-dir", file=sys.stderr)
        return EXIT_USAGE
    try:
        threads = resolve_threads(args.threads)
        outcome = COMMANDS[args.command](args, threads)
    except GuardExceeded as exc:
        print(f"gelfond: guard exceeded: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (UsageError, DigitError, ValueError) as exc:
        print(f"gelfond: {exc}", file=sys.stderr)
        return EXIT_USAGE
    written = _write_reports(args.command, outcome, args.out_dir) if args.out_dir else []
    if args.format == "json":
        sys.stdout.write(_dumps(outcome.payload) + "\n")
    elif args.format == "csv":
        sys.stdout.write(_csv(outcome))
    else:
        for path in written:
            if path.suffix == ".dat":
                sys.stdout.write(f"{path.name}\n")
    return EXIT_VIOLATION if outcome.violation else EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
