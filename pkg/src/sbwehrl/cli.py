"""Command-line front end.

Subcommands::

    sweep        entropies over an eta grid (CSV or JSON)
    husimi       Husimi section over (u1, v1) at a fixed mode-2 point (CSV)
    observables  ground-state observables, closed form and moment engine
    verify       run the self-check suite and print a JSON summary

Exit codes: 0 ok, 1 invalid input, 2 unwritable output, 3 quadrature did
not converge (output still written), 4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import wehrl as W
from .coupling import N_MAX, as_coupling
from .gaussian_moments import observable_report
from .husimi import husimi_of, slice_grid
from .quadrature import QuadratureSpec, resolve_workers
from .sbs_state import excited_state

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_OUTPUT = 2
EXIT_NOT_CONVERGED = 3
EXIT_VERIFY = 4

MAX_STEPS = 100_000
MAX_GRID = 4001

SWEEP_COLUMNS = ("eta", "s_total_analytic", "s_total_numeric", "s1", "s2",
                 "mutual_info", "s1_minus_s2", "err_flags")


class UsageError(Exception):
    pass


class OutputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def fmt(x):
    """17 significant digits, empty for a missing value."""
    if x is None:
        return ""
    return "%.17g" % float(x)


# --- output ----------------------------------------------------------------------------

def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    try:
        return open(path, "w", newline="", encoding="utf-8"), True
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _emit(path, text):
    handle, owned = _open_out(path)
    try:
        handle.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc
    finally:
        if owned:
            handle.close()


def _plot_path(args):
    if args.plot is None:
        return None
    if args.plot:
        return args.plot
    if args.out in (None, "-"):
        raise UsageError("--plot without a path needs --out")
    return os.path.splitext(args.out)[0] + ".png"


def _check_plot_target(path):
    if path is None:
        return
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent) or not os.access(parent, os.W_OK):
        raise OutputError(f"cannot write {path}")


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# --- validation -------------------------------------------------------------------------

def _eta(value):
    try:
        return as_coupling(value).eta
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def _excitation(value, name):
    if not 0 <= value <= N_MAX:
        raise UsageError(f"{name} must be in [0, {N_MAX}]")
    return value


def _spec(order):
    if order is None:
        return QuadratureSpec()
    if not 4 <= order <= 200:
        raise UsageError("--order must be in [4, 200]")
    return QuadratureSpec(base_order=max(2, min(24, order // 2)), max_order=order)


def _workers(value):
    if value is not None and value < 1:
        raise UsageError("--workers must be positive")
    try:
        return resolve_workers(value)
    except ValueError as exc:
        raise UsageError(f"invalid worker count: {exc}") from exc


# --- commands ---------------------------------------------------------------------------

def sweep_rows(etas, n1, n2, spec, workers):
    """One report per eta, evaluated in parallel and returned in eta order."""
    job = lambda e: W.report(e, n1, n2, spec)  # noqa: E731
    if workers > 1 and len(etas) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(job, etas))
    return [job(e) for e in etas]


def _sweep_record(r):
    return {
        "eta": r.eta,
        "s_total_analytic": r.s_total.analytic,
        "s_total_numeric": r.s_total.numeric,
        "s1": r.s_partial_1.numeric,
        "s2": r.s_partial_2.numeric,
        "mutual_info": r.mutual_info.numeric,
        "s1_minus_s2": r.s_partial_1.numeric - r.s_partial_2.numeric,
        "err_flags": ";".join(r.flags),
    }


def cmd_sweep(args):
    lo, hi = _eta(args.eta_min), _eta(args.eta_max)
    if not lo < hi:
        raise UsageError("need --eta-min < --eta-max")
    if not 2 <= args.steps <= MAX_STEPS:
        raise UsageError(f"--steps must be in [2, {MAX_STEPS}]")
    n1, n2 = _excitation(args.n1, "--n1"), _excitation(args.n2, "--n2")
    spec, workers = _spec(args.order), _workers(args.workers)
    plot = _plot_path(args)
    _check_plot_target(plot)
    handle, owned = _open_out(args.out)
    try:
        etas = [float(e) for e in np.linspace(lo, hi, args.steps)]
        reports = sweep_rows(etas, n1, n2, spec, workers)
        records = [_sweep_record(r) for r in reports]
        if args.format == "json":
            handle.write(json.dumps([r.to_dict() for r in reports], indent=1) + "\n")
        else:
            rows = [[fmt(v) if k != "err_flags" else v for k, v in rec.items()] for rec in records]
            handle.write(_csv_text(SWEEP_COLUMNS, rows))
    finally:
        if owned:
            handle.close()
    if plot:
        from .plotting import sweep_figure

        sweep_figure(records, plot, title=f"state ({n1}, {n2})")
    return EXIT_OK if all(r.converged for r in reports) else EXIT_NOT_CONVERGED


def cmd_husimi(args):
    eta = _eta(args.eta)
    n1, n2 = _excitation(args.n1, "--n1"), _excitation(args.n2, "--n2")
    if not 1 <= args.grid <= MAX_GRID:
        raise UsageError(f"--grid must be in [1, {MAX_GRID}]")
    fixed = (args.fix_u2, args.fix_v2)
    if not all(math.isfinite(v) for v in fixed):
        raise UsageError("fixed point must be finite")
    if args.extent is not None and not (math.isfinite(args.extent) and args.extent > 0):
        raise UsageError("--extent must be positive")
    plot = _plot_path(args)
    _check_plot_target(plot)
    density = husimi_of(excited_state(eta, n1, n2))
    uu, vv, values = slice_grid(density, fixed, args.grid, args.extent)
    rows = [[fmt(u), fmt(v), fmt(f)] for u, v, f in zip(uu.ravel(), vv.ravel(), values.ravel())]
    _emit(args.out, _csv_text(("u1", "v1", "value"), rows))
    if plot:
        from .plotting import slice_figure

        slice_figure(uu, vv, values, plot,
                     title=f"eta = {eta:g}, (u2, v2) = ({fixed[0]:g}, {fixed[1]:g})")
    return EXIT_OK


def cmd_observables(args):
    rep = observable_report(_eta(args.eta))
    if args.format == "json":
        text = json.dumps(rep.to_dict(), indent=1) + "\n"
    else:
        rows = [[name, fmt(v.analytic), fmt(v.numeric), fmt(v.discrepancy)] for name, v in rep.items()]
        text = _csv_text(("observable", "analytic", "numeric", "discrepancy"), rows)
    _emit(args.out, text)
    return EXIT_OK


def _parse_tolerances(items):
    from .verification import DEFAULT_TOLERANCES

    out = {}
    for item in items or ():
        name, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--tol expects NAME=VALUE, got {item!r}")
        if name not in DEFAULT_TOLERANCES:
            raise UsageError(f"unknown check {name!r}; known: {', '.join(DEFAULT_TOLERANCES)}")
        try:
            tol = float(value)
        except ValueError as exc:
            raise UsageError(f"bad tolerance {value!r}") from exc
        if not (math.isfinite(tol) and tol > 0):
            raise UsageError("tolerances must be positive and finite")
        out[name] = tol
    return out


def cmd_verify(args):
    from .verification import run_checks

    tolerances = _parse_tolerances(args.tol)
    if args.mc_samples is not None and args.mc_samples < 1000:
        raise UsageError("--mc-samples must be at least 1000")
    if args.seed is not None and not 0 <= args.seed < 2 ** 64:
        raise UsageError("--seed must be a 64-bit unsigned integer")
    results = run_checks(tolerances, args.seed, args.mc_samples, _workers(args.workers),
                         _spec(args.order))
    _emit(args.out, json.dumps([r.to_dict() for r in results], indent=1) + "\n")
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


# --- parser ---------------------------------------------------------------------------

def build_parser():
    p = _Parser(prog="sbwehrl", description="Wehrl entropies of coupled oscillators.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, plot=False):
        sp.add_argument("--out", help="output file (default: stdout)")
        sp.add_argument("--workers", type=int, help="worker threads (default: $SBWEHRL_WORKERS or 1)")
        if plot:
            sp.add_argument("--plot", nargs="?", const="", default=None, metavar="PNG",
                            help="also render a figure; defaults to the --out path with .png")

    s = sub.add_parser("sweep", help="entropies over an eta grid")
    s.add_argument("--eta-min", type=float, required=True)
    s.add_argument("--eta-max", type=float, required=True)
    s.add_argument("--steps", type=int, default=31)
    s.add_argument("--n1", type=int, default=0)
    s.add_argument("--n2", type=int, default=0)
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.add_argument("--order", type=int, help="largest quadrature order")
    common(s, plot=True)
    s.set_defaults(func=cmd_sweep)

    h = sub.add_parser("husimi", help="Husimi section at a fixed mode-2 point")
    h.add_argument("--eta", type=float, required=True)
    h.add_argument("--n1", type=int, default=0)
    h.add_argument("--n2", type=int, default=0)
    h.add_argument("--fix-u2", type=float, default=0.0)
    h.add_argument("--fix-v2", type=float, default=0.0)
    h.add_argument("--grid", type=int, default=101)
    h.add_argument("--extent", type=float, help="half-width of the square window")
    common(h, plot=True)
    h.set_defaults(func=cmd_husimi)

    o = sub.add_parser("observables", help="ground-state observables")
    o.add_argument("--eta", type=float, required=True)
    o.add_argument("--format", choices=("csv", "json"), default="json")
    common(o)
    o.set_defaults(func=cmd_observables)

    v = sub.add_parser("verify", help="run the self-check suite")
    v.add_argument("--tol", action="append", metavar="NAME=VALUE")
    v.add_argument("--seed", type=int)
    v.add_argument("--mc-samples", type=int)
    v.add_argument("--order", type=int, help="largest quadrature order")
    common(v)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"sbwehrl: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OutputError as exc:
        print(f"sbwehrl: error: {exc}", file=sys.stderr)
        return EXIT_OUTPUT


if __name__ == "__main__":
    sys.exit(main())
