"""Command-line front end.

Every subcommand writes a JSON report (stdout, or ``--out PREFIX.json``)
and, where a table makes sense, a CSV next to it.  Exit status is 0 on
success, 2 when a hypothesis of the tested statement is violated, 1 on
errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from fractions import Fraction
from pathlib import Path

from . import __version__
from .core import DomainError, TargetVector, default_precision, fraction_str, parse_rational
from .correspondence import (PrecisionError, ba_constant_estimate, detect_ba, multiplicative_trajectory,
                             trajectory)
from .goodness import check_good, check_nonplanar
from .measures import (DEFAULT_REFERENCE_SIZE, check_abs_decay, check_federer, check_scaling, parse_map,
                       parse_measure)
from .nondivergence import HypothesisWarning, borel_cantelli_series, extremality_experiment, scan
from .oracle import BudgetError, best_approximations, multiplicative_best

SCHEMA_VERSION = 1

FORMULAS = {
    "gamma_scaled": "(v-n)/(n(v+1))",
    "gamma_sharp": "(v-n)/(v+1)",
    "omega_from_gamma_sharp": "(n+gamma)/(1-gamma)",
    "flow": "g_t = diag(2^(nt), 2^-t, ..., 2^-t)",
    "lattice": "u_y Z^(n+1), vector (p + y.q, q)",
    "norm": "sup",
    "box_volume": "2^(2n+1-(v-n)s)",
}


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# ------------------------------------------------------------------ grammar

def rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except (ValueError, ZeroDivisionError) as e:
        raise argparse.ArgumentTypeError(f"malformed number {text!r}") from e


def rational_list(text: str) -> list[Fraction]:
    """Comma list of rationals, or a power range ``b^i..b^j``."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part and "^" in part:
            lo, hi = part.split("..")
            b1, e1 = lo.split("^")
            b2, e2 = hi.split("^")
            if b1.strip() != b2.strip():
                raise argparse.ArgumentTypeError(f"power range needs one base: {part!r}")
            base = rational(b1)
            e1, e2 = int(e1), int(e2)
            step = 1 if e2 >= e1 else -1
            out.extend(base ** k for k in range(e1, e2 + step, step))
        elif part:
            out.append(rational(part))
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def int_list(text: str) -> list[int]:
    """Comma list of integers, or ``a..b[:step]``."""
    out = []
    try:
        for part in text.split(","):
            if ".." in part:
                rng, _, step = part.partition(":")
                a, b = rng.split("..")
                out.extend(range(int(a), int(b) + 1, int(step or 1)))
            elif part.strip():
                out.append(int(part))
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"malformed integer list {text!r}") from e
    return out


def _target(args) -> TargetVector:
    lits = [s for s in args.y.split(",") if s.strip()]
    if len(lits) != args.n:
        raise CliError(f"--y has {len(lits)} coordinates but --n is {args.n}")
    tmax = getattr(args, "tmax", 0) or 0
    prec = max(default_precision(args.n, tmax), 2 * (getattr(args, "smax", 0) or 0) + 64)
    if args.command == "mult" or getattr(args, "flow", None) == "multiplicative":
        # the multiplicative walk runs to n * tmax along each coordinate
        prec = max(prec, 2 * args.n * tmax + 64)
    prec = args.precision or prec
    try:
        return TargetVector.from_literals(lits, prec)
    except (ValueError, ZeroDivisionError) as e:
        raise CliError(f"malformed decimal in --y: {e}") from e


# ------------------------------------------------------------------- output

def _clean(x):
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, Fraction):
        return fraction_str(x)
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if hasattr(x, "item"):
        return _clean(x.item())
    return x


def _config(args) -> dict:
    # worker count and output location do not affect results, so they stay out of the artifact
    skip = {"func", "out", "threads", "csv"}
    return {k: _clean(v) for k, v in sorted(vars(args).items()) if k not in skip}


def emit(args, result: dict, csv_text: str | None = None, warnings_: list[str] | None = None) -> int:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "version": __version__,
        "command": args.command,
        "config": _config(args),
        "formulas": FORMULAS,
        "warnings": warnings_ or [],
        "result": _clean(result),
    }
    text = json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"
    if args.out:
        base = Path(args.out)
        base.parent.mkdir(parents=True, exist_ok=True)
        base.with_suffix(".json").write_text(text)
        if csv_text is not None:
            base.with_suffix(".csv").write_text(csv_text)
    else:
        sys.stdout.write(text)
        if csv_text is not None and args.csv:
            sys.stdout.write(csv_text)
    return 2 if warnings_ else 0


def _measure(args):
    ms = parse_measure(args.measure, args.seed)
    return ms


def _ball(args, ms):
    """Ball from --center/--radius, defaulting to the whole declared domain."""
    if args.center is not None:
        return args.center, args.radius
    base = ms
    if base.kind == "lebesgue_ball":
        return list(base.center), base.radius
    if base.kind in ("cantor", "ifs"):
        return [Fraction(1, 2)] * base.d, Fraction(1, 2)
    raise CliError("--center/--radius required for this measure")


# ----------------------------------------------------------------- commands

def cmd_traj(args) -> int:
    y = _target(args)
    if args.flow == "multiplicative":
        rec = multiplicative_trajectory(y, args.tmax, stride=args.stride)
        rows = ["t_vec,height,log2_height"] + [
            f"{' '.join(map(str, tv))},{fraction_str(h)},{repr(lh)}"
            for tv, h, lh in zip(rec.t_vecs, rec.heights, rec.log2_heights)]
    else:
        rec = trajectory(y, args.tmax)
        rows = ["t,height,log2_height"] + [
            f"{t},{fraction_str(h)},{repr(lh)}" for t, h, lh in zip(rec.schedule, rec.heights, rec.log2_heights)]
    return emit(args, rec.summary(), "\n".join(rows) + "\n")


def cmd_exponent(args) -> int:
    y = _target(args)
    out = {"n": y.n}
    if args.mode in ("dyn", "both"):
        rec = trajectory(y, args.tmax)
        out.update(gamma_hat=rec.gamma_hat, omega_dyn_sharp=rec.omega_hat_sharp,
                   omega_dyn_scaled=rec.omega_hat_scaled, window=list(rec.window))
    if args.mode in ("oracle", "both"):
        table = best_approximations(y, args.smax)
        out.update(omega_oracle=table.omega_oracle, omega_scale_max=table.omega_scale_max,
                   oracle_window=list(table.window))
    return emit(args, out)


def cmd_ba(args) -> int:
    y = _target(args)
    rec = trajectory(y, args.tmax)
    verdict = detect_ba(rec, args.eps0)
    out = {"bounded": verdict.bounded, "h_min": verdict.h_min, "t_at_h_min": verdict.t_at_h_min,
           "epsilon0": verdict.epsilon0}
    if args.Q:
        out["ba_constant"] = ba_constant_estimate(y, args.Q)
    return emit(args, out)


def cmd_oracle(args) -> int:
    y = _target(args)
    table = best_approximations(y, args.smax)
    rows = ["s,m,log2_m,p,q,v_scale"]
    for r in table.rows:
        lm = "-inf" if r.m == 0 else repr(math.log2(r.m.numerator) - math.log2(r.m.denominator))
        rows.append(f"{r.s},{fraction_str(r.m)},{lm},{r.p},{' '.join(map(str, r.q))},{repr(r.v_scale)}")
    out = {"omega_oracle": table.omega_oracle, "omega_scale_max": table.omega_scale_max,
           "window": list(table.window)}
    return emit(args, out, "\n".join(rows) + "\n")


def cmd_mult(args) -> int:
    y = _target(args)
    std = trajectory(y, args.tmax)
    mul = multiplicative_trajectory(y, y.n * args.tmax, stride=args.stride)
    out = {"omega_hat_sharp": std.omega_hat_sharp, "omega_hat_mult": mul.omega_hat_sharp,
           "gamma_hat": std.gamma_hat, "gamma_hat_mult": mul.gamma_hat, "grid_points": len(mul.schedule)}
    if args.smax is not None:
        tab = multiplicative_best(y, args.smax)
        out.update(omega_oracle=tab.omega_oracle, omega_mult_oracle=tab.omega_mult_oracle)
    return emit(args, out)


def cmd_check_measure(args) -> int:
    ms = _measure(args)
    if args.map:
        from .measures import MeasureSampler

        ms = MeasureSampler.pushforward(ms, parse_map(args.map))
    props = ["federer", "abs_decay", "scaling"] if args.property == "all" else [args.property]
    out = {}
    for p in props:
        if p == "federer":
            rep = check_federer(ms, args.trials, reference_size=args.reference_size)
        elif p == "abs_decay":
            rep = check_abs_decay(ms, args.trials, reference_size=args.reference_size)
        else:
            rep = check_scaling(ms, args.trials, reference_size=args.reference_size)
        d = json.loads(rep.to_json())
        if not args.census:
            d.pop("census")
        out[p] = d
    return emit(args, out)


def cmd_check_good(args) -> int:
    ms = _measure(args)
    f = parse_map(args.map)
    center, radius = _ball(args, ms)
    center = [float(c) for c in center]
    rep = check_good(f, ms, center, float(radius), coeff_census=args.census_size)
    npv = check_nonplanar(f, ms, center, float(radius))
    out = json.loads(rep.to_json())
    out["nonplanar"] = {"verdict": npv.nonplanar, "smallest_relative_sv": npv.smallest_relative,
                        "tolerance": npv.tolerance}
    warn = [] if npv.nonplanar else ["map is planar on the ball: nonplanarity hypothesis fails"]
    return emit(args, out, warnings_=warn)


def cmd_nondiv_scan(args) -> int:
    ms = _measure(args)
    f = parse_map(args.map)
    center, radius = _ball(args, ms)
    res = scan(f, ms, center, radius, args.t, args.eps, args.samples, threads=args.threads)
    out = json.loads(res.to_json())
    warn = list(res.notes)
    return emit(args, out, res.to_csv(), warn)


def cmd_bc_series(args) -> int:
    ms = _measure(args)
    f = parse_map(args.map)
    center, radius = _ball(args, ms)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", HypothesisWarning)
        res = borel_cantelli_series(f, ms, center, radius, args.v, args.gamma, args.tmax,
                                    args.samples, threads=args.threads)
    warn = [str(w.message) for w in caught if issubclass(w.category, HypothesisWarning)]
    rows = ["t,term,partial_sum"] + [f"{t},{repr(a)},{repr(b)}" for t, (a, b)
                                     in enumerate(zip(res.terms, res.partial_sums), 1)]
    return emit(args, json.loads(res.to_json()), "\n".join(rows) + "\n", warn)


def cmd_extremality(args) -> int:
    ms = _measure(args)
    f = parse_map(args.map)
    center, radius = _ball(args, ms)
    res = extremality_experiment(f, ms, center, radius, args.samples, args.tmax,
                                 multiplicative=args.mult, stride=args.stride, threads=args.threads)
    rows = ["index,omega_hat_sharp,omega_hat_mult"]
    mult = res.omegas_mult or [math.nan] * len(res.omegas)
    rows += [f"{i},{repr(a)},{repr(b)}" for i, (a, b) in enumerate(zip(res.omegas, mult))]
    out = {k: v for k, v in vars(res).items()}
    return emit(args, out, "\n".join(rows) + "\n")


# ------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dioflow", description="Diophantine exponents via flows on the space of lattices")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--out", help="output prefix; writes PREFIX.json and PREFIX.csv")
        sp.add_argument("--csv", action="store_true", help="also print the CSV table to stdout")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--threads", type=int, default=1)

    def target(sp):
        sp.add_argument("--y", required=True, help="comma-separated coordinates (decimal, p/q, b^k)")
        sp.add_argument("--n", type=int, default=1)
        sp.add_argument("--precision", type=int, default=None, help="bits (default (n+1)*tmax+64)")

    def measure(sp, need_map=True):
        sp.add_argument("--measure", required=True, help="lebesgue:LO,HI[,d=D] | cantor[:DEPTH] | ifs:...")
        sp.add_argument("--map", required=need_map, help="veronese:N | poly:... | affine:...")
        sp.add_argument("--center", type=rational_list, default=None)
        sp.add_argument("--radius", type=rational, default=None)

    sp = sub.add_parser("traj", help="first minima along the flow")
    target(sp); common(sp)
    sp.add_argument("--tmax", type=int, required=True)
    sp.add_argument("--flow", choices=["standard", "multiplicative"], default="standard")
    sp.add_argument("--stride", type=int, default=10)
    sp.set_defaults(func=cmd_traj)

    sp = sub.add_parser("exponent", help="dynamic and oracle exponent estimates")
    target(sp); common(sp)
    sp.add_argument("--mode", choices=["dyn", "oracle", "both"], default="both")
    sp.add_argument("--tmax", type=int, default=150)
    sp.add_argument("--smax", type=int, default=20)
    sp.set_defaults(func=cmd_exponent)

    sp = sub.add_parser("ba", help="bounded-orbit test for badly approximable vectors")
    target(sp); common(sp)
    sp.add_argument("--tmax", type=int, default=200)
    sp.add_argument("--eps0", type=rational, default=Fraction(1, 4))
    sp.add_argument("--Q", type=int, default=0, help="also scan min |y.q+p| |q|^n up to Q")
    sp.set_defaults(func=cmd_ba)

    sp = sub.add_parser("oracle", help="exhaustive best-approximation table")
    target(sp); common(sp)
    sp.add_argument("--smax", type=int, required=True)
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("mult", help="multiplicative exponent estimates")
    target(sp); common(sp)
    sp.add_argument("--tmax", type=int, default=60)
    sp.add_argument("--stride", type=int, default=10)
    sp.add_argument("--smax", type=int, default=None)
    sp.set_defaults(func=cmd_mult)

    sp = sub.add_parser("check-measure", help="Federer / decay / scaling checks")
    measure(sp, need_map=False); common(sp)
    sp.add_argument("--property", choices=["federer", "abs_decay", "scaling", "all"], default="all")
    sp.add_argument("--trials", type=int, default=50)
    sp.add_argument("--reference-size", type=int, default=DEFAULT_REFERENCE_SIZE)
    sp.add_argument("--census", action="store_true", help="include per-trial census in the report")
    sp.set_defaults(func=cmd_check_measure)

    sp = sub.add_parser("check-good", help="(C, alpha)-good constants and nonplanarity")
    measure(sp); common(sp)
    sp.add_argument("--census-size", type=int, default=256)
    sp.set_defaults(func=cmd_check_good)

    sp = sub.add_parser("nondiv-scan", help="measure of points with short vectors on a (t, eps) grid")
    measure(sp); common(sp)
    sp.add_argument("--t", type=int_list, default=list(range(5, 101, 5)))
    sp.add_argument("--eps", type=rational_list, default=[Fraction(1, 2 ** k) for k in range(1, 13)])
    sp.add_argument("--samples", type=int, default=2000)
    sp.set_defaults(func=cmd_nondiv_scan)

    sp = sub.add_parser("bc-series", help="partial sums of the summability series")
    measure(sp); common(sp)
    sp.add_argument("--v", type=rational, required=True)
    sp.add_argument("--gamma", type=rational, required=True)
    sp.add_argument("--tmax", type=int, default=100)
    sp.add_argument("--samples", type=int, default=1000)
    sp.set_defaults(func=cmd_bc_series)

    sp = sub.add_parser("extremality", help="exponent histogram over a pushforward measure")
    measure(sp); common(sp)
    sp.add_argument("--samples", type=int, default=50)
    sp.add_argument("--tmax", type=int, default=100)
    sp.add_argument("--mult", action="store_true")
    sp.add_argument("--stride", type=int, default=10)
    sp.set_defaults(func=cmd_extremality)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "center", None) is not None and getattr(args, "radius", None) is None:
        parser.error("--center needs --radius")
    try:
        return args.func(args)
    except BudgetError as e:
        print(f"error: budget refused: {e}", file=sys.stderr)
    except PrecisionError as e:
        print(f"error: precision: {e}", file=sys.stderr)
    except (CliError, DomainError) as e:
        print(f"error: {e}", file=sys.stderr)
    except (ValueError, ZeroDivisionError) as e:
        print(f"error: invalid input: {e}", file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
