"""Command-line front end.

Exit codes: 0 success, 1 hypothesis violation, 2 numerical failure,
3 configuration error (including unknown flags or subcommands).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__, io
from .config import METHODS, SweepConfig, config_from_dict, load_config, parse_grid
from .diagnostics import ce_report, uniformity
from .errors import ConfigError, HypothesisViolation, NumericalFailure, SrbZetaError
from .orbits import find_periodic_points
from .response import analyticity_report, response_curve
from .selftest import format_table, run_checks
from .ulam import build_ulam, leading_eigenpair
from .zeta import inverse_zeta_series, leading_zero, pressure_s_derivative, trace_sums

log = logging.getLogger("srbzeta")

DEFAULT_CONFIG = {"family": {"kind": "direct", "coefficients": [[1.0, 0.0, -2.0]]},
                  "grid": {"min": 0.0, "max": 0.0, "count": 3}}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(3)


def _common(p):
    p.add_argument("--config", help="JSON config (path or shipped name)")
    p.add_argument("--out", help="output file")
    p.add_argument("--json", action="store_true", help="print a JSON record to stdout")
    p.add_argument("--t", type=float, default=None, help="parameter value (default: window centre)")


def build_parser():
    parser = _Parser(prog="srb-zeta", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"srb-zeta {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p = sub.add_parser("density", help="Ulam invariant density at one (t, s)")
    _common(p)
    p.add_argument("--n", type=int, default=4096, help="number of bins")
    p.add_argument("--s", type=float, default=0.0)
    p.add_argument("--profile", choices=("postcritical", "flat"), default="postcritical")

    p = sub.add_parser("orbits", help="periodic-orbit table")
    _common(p)
    p.add_argument("--p", type=int, default=6, help="period (cycles whose period divides it)")

    p = sub.add_parser("zeta", help="trace sums, 1/zeta series and leading zero")
    _common(p)
    p.add_argument("--p", type=int, default=16, help="truncation order")
    p.add_argument("--s", type=float, default=0.0)

    p = sub.add_parser("diagnose", help="Collet-Eckmann constants and Theta bound")
    _common(p)
    p.add_argument("--p", type=int, default=None, help="largest cycle period")
    p.add_argument("--grid", help="MIN:MAX:COUNT sweep instead of a single t")

    p = sub.add_parser("sweep", help="response curve and analyticity report")
    _common(p)
    p.add_argument("--p", type=int, default=None, help="zeta truncation order")
    p.add_argument("--n", type=int, default=None, help="Ulam bins")
    p.add_argument("--grid", help="MIN:MAX:COUNT")
    p.add_argument("--method", help=f"comma-separated subset of {','.join(METHODS)}")
    p.add_argument("--force", action="store_true", help="run even if diagnostics fail")

    p = sub.add_parser("selftest", help="closed-form oracle checks")
    p.add_argument("--p", type=int, default=20, help="zeta truncation order")
    p.add_argument("--n", type=int, default=4096, help="Ulam bins")
    p.add_argument("--json", action="store_true")
    return parser


def _config(args) -> SweepConfig:
    if args.config:
        return load_config(args.config)
    return config_from_dict(DEFAULT_CONFIG)


def _t(args, cfg):
    if args.t is not None:
        return args.t
    lo, hi = cfg.family.window
    return 0.0 if lo <= 0.0 <= hi else 0.5 * (lo + hi)


def _emit(args, record, text):
    print(io.dumps(record) if args.json else text)


def cmd_density(args):
    cfg = _config(args)
    t = _t(args, cfg)
    M = build_ulam(cfg.family, t, cfg.observable, args.s, args.n, args.profile)
    lam, dens, iters = leading_eigenpair(M)
    record = io.eigen_record(dens, lam, iters)
    if args.out:
        io.write_density_csv(args.out, dens)
    _emit(args, record, f"N={args.n} t={t:g} s={args.s:g} lambda={lam!r} iterations={iters}")
    return 0


def cmd_orbits(args):
    cfg = _config(args)
    t = _t(args, cfg)
    orbits = find_periodic_points(cfg.family, t, args.p)
    if args.out:
        io.write_orbits_csv(args.out, orbits, t)
    record = [{"period": o.period, "itinerary": o.itinerary.word, "multiplier": o.multiplier,
               "residual": o.residual, "points": list(o.points)} for o in orbits]
    text = "\n".join(f"{o.period:3d} {o.itinerary.word:>{args.p}} {o.multiplier:>24.16g} "
                     f"{o.points[0]:>22.16g}" for o in orbits)
    _emit(args, record, text)
    return 0


def cmd_zeta(args):
    cfg = _config(args)
    t = _t(args, cfg)
    traces = trace_sums(cfg.family, t, cfg.observable, args.s, args.p)
    series = inverse_zeta_series(traces)
    zero = leading_zero(series)
    record = {"t": t, "s": args.s, "P": args.p, "a": traces.values, "d": series.coefficients,
              "z0": zero.z0, "lambda": zero.eigenvalue, "residual": zero.residual,
              "simple": zero.simple}
    if args.s == 0:
        record["pressure_s_derivative"], _ = pressure_s_derivative(
            cfg.family, t, cfg.observable, args.p)
    if args.out:
        io.write_zeta_csv(args.out, traces, series)
    text = f"z0={zero.z0!r} lambda={zero.eigenvalue!r}"
    if "pressure_s_derivative" in record:
        text += f" dlog(lambda)/ds={record['pressure_s_derivative']!r}"
    _emit(args, record, text)
    return 0


def cmd_diagnose(args):
    cfg = _config(args)
    kw = dict(cfg.diagnostics)
    if args.p is not None:
        kw["p_max"] = args.p
    kw["safety"] = cfg.safety
    if args.grid:
        lo, hi, count = parse_grid(args.grid)
        ts = np.linspace(lo, hi, count)
    else:
        ts = [_t(args, cfg)]
    reports = [ce_report(cfg.family, t, **kw) for t in ts]
    if args.out:
        if args.out.endswith(".csv"):
            io.write_ce_csv(args.out, reports)
        else:
            io.write_json(args.out, [r.to_dict() for r in reports])
    mins, uniform = uniformity(reports)
    record = {"reports": [r.to_dict() for r in reports], "minimum": mins, "uniform": uniform}
    text = "\n".join(
        f"t={r.t:+.4f} lambda_c={r.lambda_c:.10g} lambda_per={r.lambda_per:.10g} "
        f"lambda_eta={r.lambda_eta:.6g} (n={r.eta_n}, extrapolated {r.lambda_eta_extrapolated:.6g}) "
        f"Theta^-1={r.theta_inv:.6g}" for r in reports)
    _emit(args, record, text)
    return 0


def cmd_sweep(args):
    cfg = _config(args)
    over = {}
    if args.grid:
        over["grid"] = parse_grid(args.grid)
    if args.p is not None:
        over["P"] = args.p
    if args.n is not None:
        over["N"] = args.n
    if args.method:
        over["methods"] = tuple(s.strip() for s in args.method.split(",") if s.strip())
    cfg = cfg.with_overrides(**over)
    curve = response_curve(cfg, force=args.force)
    out = args.out or cfg.outputs.get("curve")
    report = None
    # a fit needs spread in t; a single-point grid just tabulates the methods
    if ("zeta" in cfg.methods or "ulam" in cfg.methods) and np.ptp(curve.t) > 0:
        column = "value_zeta" if "zeta" in cfg.methods else "value_ulam"
        degree = min(cfg.max_degree, len(curve.t) - 3)
        report = analyticity_report(curve, degree, column)
    if out:
        io.write_curve_csv(out, curve)
        rep_path = cfg.outputs.get("report") if not args.out else None
        rep_path = rep_path or str(Path(out).with_suffix(".json"))
        io.write_json(rep_path, {"metadata": curve.metadata, "flags": curve.flags,
                                 "analyticity": report.to_dict() if report else None})
    record = {"rows": curve.rows, "flags": curve.flags,
              "analyticity": report.to_dict() if report else None}
    lines = [io.CURVE_HEADER] + [",".join(f"{v:.12g}" for v in row) for row in curve.rows]
    if report:
        lines.append(f"analyticity: {report.verdict} (decay ratio {report.decay_ratio:.3g})")
    lines += [f"flag: {f}" for f in curve.flags]
    _emit(args, record, "\n".join(lines))
    return 0


def cmd_selftest(args):
    checks = run_checks(order=args.p, n_bins=args.n)
    ok = all(c.passed for c in checks)
    record = [{"name": c.name, "value": c.value, "expected": c.expected, "tol": c.tol,
               "passed": c.passed} for c in checks]
    _emit(args, record, format_table(checks) + f"\n{sum(c.passed for c in checks)}/{len(checks)} "
          "checks passed")
    return 0 if ok else NumericalFailure.exit_code


COMMANDS = {"density": cmd_density, "orbits": cmd_orbits, "zeta": cmd_zeta,
            "diagnose": cmd_diagnose, "sweep": cmd_sweep, "selftest": cmd_selftest}


def _join_grid(argv):
    """Let ``--grid -0.1:0.1:21`` through; argparse reads -0.1:... as a flag."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok == "--grid":
            nxt = next(it, None)
            out.append(tok if nxt is None else f"--grid={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None):
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(_join_grid(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except HypothesisViolation as exc:
        print(f"hypothesis violation: {exc}", file=sys.stderr)
        return exc.exit_code
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ConfigError, ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return ConfigError.exit_code
    except SrbZetaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
