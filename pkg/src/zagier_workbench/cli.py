"""Command-line entry point: `zagier-workbench <command> [options]`.

Every command writes a table (CSV by default, JSON with --format json) whose
'#' lines carry the run metadata.  Exit codes: 0 success, 1 invalid
parameters, 2 computation failure or a failed check.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__

LOG = logging.getLogger("zagier_workbench")
EIGEN_NAME = "maass_eigenvalues.txt"


class ValidationError(ValueError):
    pass


class CheckFailed(RuntimeError):
    pass


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ValidationError(msg)


# -- output ---------------------------------------------------------------------

class Table:
    """Rows are streamed to CSV as they arrive; JSON is written at the end."""

    def __init__(self, out, fmt: str, meta: dict, columns: list[str]):
        self.out, self.fmt, self.meta, self.columns = out, fmt, dict(meta), columns
        self.rows: list[list] = []
        self.trailer: dict = {}
        if fmt == "csv":
            for k, v in self.meta.items():
                out.write(f"# {k}: {v}\n")
            self.writer = csv.writer(out, lineterminator="\n")
            self.writer.writerow(columns)

    def add(self, row) -> None:
        row = [_plain(v) for v in row]
        if self.fmt == "csv":
            self.writer.writerow([_fmt(v) for v in row])
        else:
            self.rows.append(row)

    def close(self, truncated: bool = False) -> None:
        if self.fmt == "csv":
            for k, v in self.trailer.items():
                self.out.write(f"# {k}: {v}\n")
            if truncated:
                self.out.write("#truncated\n")
        else:
            meta = {**self.meta, **self.trailer}
            if truncated:
                meta["truncated"] = True
            doc = {"metadata": meta, "rows": [dict(zip(self.columns, r)) for r in self.rows]}
            json.dump(doc, self.out, indent=1)
            self.out.write("\n")
        self.out.flush()


def _plain(v):
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    return v


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


# -- commands -------------------------------------------------------------------
# each returns (meta, columns, row iterator); the iterator may fill `trailer`
# and raise CheckFailed after its rows are out.

def cmd_zagier(a, trailer):
    from .zagier import zagier_L
    _require(a.n >= 3, "--n must be >= 3")
    s = complex(a.s.replace(" ", ""))
    _require(abs(s.imag) <= 1e3, "|Im s| must be <= 1e3")
    meta = {"n": a.n, "s": s, "method": a.method}
    cols = ["n", "s_re", "s_im", "re", "im", "error_estimate", "route"]

    def rows():
        v = zagier_L(a.n, s, method=a.method)
        yield [a.n, s.real, s.imag, v.value.real, v.value.imag, v.error_estimate, v.method]
    return meta, cols, rows()


def cmd_psi(a, trailer):
    from .geodesics import psi_direct, psi_via_zagier
    _require(4 < a.X <= 1e8, "--X must lie in (4, 1e8]")
    meta = {"X": a.X, "reading": a.reading, "tolerance": a.tol}
    cols = ["X", "direct", "via_zagier", "gap", "relative_gap"]

    def rows():
        d = psi_direct(a.X, data_dir=a.data_dir, use_cache=a.cache).value
        z = psi_via_zagier(a.X, reading=a.reading).value
        gap = abs(d - z)
        rel = gap / max(abs(d), 1.0)
        yield [a.X, d, z, gap, rel]
        if rel > a.tol:
            raise CheckFailed(f"psi methods differ by {rel:.3g} > {a.tol}")
    return meta, cols, rows()


def cmd_verify_identity(a, trailer):
    from .geodesics import trace_identity_check
    _require(3 <= a.n_min <= a.n_max <= 10**4, "need 3 <= --n-min <= --n-max <= 1e4")
    meta = {"n_min": a.n_min, "n_max": a.n_max, "tolerance": a.tol}
    cols = ["n", "lhs", "rhs", "gap"]

    def rows():
        worst = 0.0
        for n in range(a.n_min, a.n_max + 1):
            lhs, rhs, gap = trace_identity_check(n)
            worst = max(worst, gap)
            yield [n, lhs, rhs, gap]
        trailer["max_gap"] = worst
        if worst > a.tol:
            raise CheckFailed(f"identity gap {worst:.3g} > {a.tol}")
    return meta, cols, rows()


def _check_t(t):
    from .averages import MAX_TWIST
    _require(abs(t) <= MAX_TWIST, f"|t| must be <= {MAX_TWIST}")


def cmd_average(a, trailer):
    from .averages import CSV_HEADER, error_scan, record_row
    _require(2 <= a.X <= 1.6e6, "--X must lie in [2, 1.6e6]")
    _check_t(a.t)
    meta = {"X": a.X, "t": a.t}

    def rows():
        for r in error_scan([a.X], a.t, data_dir=a.data_dir, use_cache=a.cache):
            yield record_row(r)
    return meta, CSV_HEADER, rows()


def _grid(lo, hi, points, log):
    _require(points >= 1, "--points must be positive")
    _require(2 <= lo <= hi, "need 2 <= --x-min <= --x-max")
    if points == 1:
        return np.array([lo])
    return np.geomspace(lo, hi, points) if log else np.linspace(lo, hi, points)


def cmd_error_scan(a, trailer):
    from .averages import CSV_HEADER, error_scan, exponent_fit, record_row
    _require(a.x_max <= 1.6e6, "--x-max must be <= 1.6e6")
    _check_t(a.t)
    grid = _grid(a.x_min, a.x_max, a.points, not a.linear)
    meta = {"x_min": a.x_min, "x_max": a.x_max, "points": a.points,
            "spacing": "linear" if a.linear else "log", "t": a.t}

    def rows():
        recs = []
        for X in grid:
            # one record at a time so that an interrupt keeps finished rows
            r = error_scan([X], a.t, data_dir=a.data_dir, use_cache=a.cache)[0]
            recs.append(r)
            yield record_row(r)
        if len(recs) >= 10:
            slope, _, r2 = exponent_fit(recs)
            trailer["fit_slope"] = slope
            trailer["fit_r2"] = r2
        trailer["max_normalized"] = max(r.normalized for r in recs)
    return meta, CSV_HEADER, rows()


def _window(a):
    from .smoothing import WindowParams
    try:
        return WindowParams(a.X, a.delta1, a.delta2)
    except ValueError as e:
        raise ValidationError(str(e)) from None


def cmd_omega_scan(a, trailer):
    from .smoothing import omega_window
    p = _window(a)
    _require(a.points >= 2, "--points must be >= 2")
    lo, hi = p.support
    pad = 0.02 * (hi - lo)
    ts = np.linspace(lo - pad, hi + pad, a.points)
    meta = {"X": a.X, "delta1": a.delta1, "delta2": a.delta2, "support": p.support,
            "plateau": p.plateau}

    def rows():
        for t, w in zip(ts, omega_window(ts, p)):
            yield [float(t), float(w)]
    return meta, ["t", "omega"], rows()


def cmd_smooth_check(a, trailer):
    from .smoothing import window_checks
    p = _window(a)
    _require(p.X <= 1e5, "--X must be <= 1e5 for the direct double integral")
    meta = {"X": a.X, "delta1": a.delta1, "delta2": a.delta2}

    def rows():
        failed = []
        for name, value, bound, ok in window_checks(p, a.data_dir, a.cache):
            if not ok:
                failed.append(name)
            yield [name, value, bound, ok]
        if failed:
            raise CheckFailed("failed: " + ", ".join(failed))
    return meta, ["check", "value", "bound", "passed"], rows()


def _eigen_table(a):
    from .halfvalues import data_dir
    from .spectral import load_eigenvalues
    path = Path(a.eigenvalues) if a.eigenvalues else data_dir(a.data_dir) / EIGEN_NAME
    _require(path.exists(), f"eigenvalue file {path} not found")
    return load_eigenvalues(path), path


def cmd_spectral_sum(a, trailer):
    from .spectral import count_up_to, exp_sum, weighted_exp_sum
    _require(a.X >= 1 and a.T > 0, "need X >= 1 and T > 0")
    table, path = _eigen_table(a)
    meta = {"X": a.X, "T": a.T, "eigenvalues": path, "table_count": table.count,
            "table_max": table.t_max}
    cols = ["X", "T", "count", "sum_re", "sum_im", "sum_abs", "weighted_re", "weighted_im"]

    def rows():
        z = exp_sum(table, a.X, a.T)
        w = weighted_exp_sum(table, a.X, a.T)
        yield [a.X, a.T, count_up_to(table, a.T), z.real, z.imag, abs(z), w.real, w.imag]
    return meta, cols, rows()


def cmd_explicit_formula(a, trailer):
    from .spectral import explicit_formula_residual
    _require(4 < a.X <= 1e8 and a.T >= 1, "need 4 < X <= 1e8 and T >= 1")
    table, path = _eigen_table(a)
    meta = {"X": a.X, "T": a.T, "eigenvalues": path, "table_count": table.count,
            "constant": a.constant}
    cols = ["X", "T", "psi", "spectral_term", "residual", "bound", "ratio", "terms"]

    def rows():
        r = explicit_formula_residual(table, a.X, a.T, data_dir=a.data_dir, use_cache=a.cache)
        yield [r.X, r.T, r.psi, r.spectral_term, r.residual, r.bound, r.ratio, r.terms]
        if r.ratio > a.constant:
            raise CheckFailed(f"|residual| = {r.ratio:.3g} x bound exceeds {a.constant}")
    return meta, cols, rows()


def cmd_kloosterman(a, trailer):
    from .kloosterman import kloosterman, weil_bound
    _require(1 <= a.c_max <= 10**6, "--c-max must lie in [1, 1e6]")
    meta = {"m": a.m, "n": a.n, "c_max": a.c_max}

    def rows():
        worst = 0.0
        for c in range(1, a.c_max + 1):
            s = kloosterman(a.m, a.n, c).real
            worst = max(worst, abs(s) / weil_bound(a.m, a.n, c))
            yield [c, s]
        trailer["max_weil_ratio"] = worst
        if worst > 1 + 1e-9:
            raise CheckFailed(f"Weil bound violated (ratio {worst:.6g})")
    return meta, ["c", "S"], rows()


def cmd_linnik(a, trailer):
    from .kloosterman import LINNIK_HEADER, linnik_growth, linnik_scan
    _require(all(1 <= C <= 1e5 for C in a.C), "each C must lie in [1, 1e5]")
    _require(all(n >= 1 for n in a.n) and all(D >= 1 for D in a.D), "n and D must be positive")
    meta = {"n": a.n, "C": a.C, "D": a.D}

    def rows():
        out = linnik_scan(a.n, a.C, a.D)
        yield from out
        trailer["growth_sup_exponent_0.2"] = linnik_growth(out)
    return meta, LINNIK_HEADER, rows()


def cmd_weighted_sum(a, trailer):
    from .kloosterman import (default_cutoff, weighted_kloosterman_sum,
                              weighted_kloosterman_sum_partial)
    from .spectral import test_function_params
    _require(2 <= a.N <= 1e3, "--N must lie in [2, 1e3]")
    _require(a.X >= 2 and a.T >= 2, "need X, T >= 2")
    _require(a.Q is None or a.Q >= 1, "--Q must be positive")
    params = test_function_params(a.X, a.T)
    Q = a.Q if a.Q is not None else default_cutoff(a.N, params)
    meta = {"N": a.N, "X": a.X, "T": a.T, "Q": Q, "a": params.a, "b": params.b,
            "truncation": "q <= Q; small q are damped by exp(-4 pi n a/q)"}
    cols = ["N", "X", "T", "Q", "re", "im", "abs_over_T2", "tail_bound",
            "partial_re", "partial_im", "relative_gap"]

    def rows():
        w = weighted_kloosterman_sum(a.N, a.X, a.T, Q)
        p = weighted_kloosterman_sum_partial(a.N, a.X, a.T, Q)
        rel = abs(w.value - p.value) / max(abs(w.value), 1e-300)
        yield [a.N, a.X, a.T, Q, w.value.real, w.value.imag, abs(w.value) / a.T**2,
               w.tail_bound, p.value.real, p.value.imag, rel]
        if rel > 1e-6:
            raise CheckFailed(f"summation-by-parts form differs by {rel:.3g}")
    return meta, cols, rows()


def cmd_subconvexity_scan(a, trailer):
    from .zagier import subconvexity_scan
    _require(3 <= a.n_max <= 10**5, "--n-max must lie in [3, 1e5]")
    meta = {"n_max": a.n_max, "normalization": "n^(1/3)"}

    def rows():
        out, best = subconvexity_scan(a.n_max, data_dir=a.data_dir, use_cache=a.cache)
        for r in out:
            yield [r.n, r.abs_value, r.normalized]
        trailer["max_normalized"] = best
    return meta, ["n", "abs", "normalized"], rows()


COMMANDS = {
    "zagier": cmd_zagier, "psi": cmd_psi, "verify-identity": cmd_verify_identity,
    "average": cmd_average, "error-scan": cmd_error_scan, "omega-scan": cmd_omega_scan,
    "smooth-check": cmd_smooth_check, "spectral-sum": cmd_spectral_sum,
    "explicit-formula": cmd_explicit_formula, "kloosterman": cmd_kloosterman,
    "linnik": cmd_linnik, "weighted-sum": cmd_weighted_sum,
    "subconvexity-scan": cmd_subconvexity_scan,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--data-dir", default=None,
                        help="data directory (overrides $ZAGIER_WORKBENCH_DATA; default ./data)")
    common.add_argument("--no-cache", dest="cache", action="store_false",
                        help="ignore on-disk caches and recompute")
    common.add_argument("--output", "-o", default="-", help="output file (default stdout)")
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--threads", type=int, default=0, help="numba threads (0 = auto)")
    common.add_argument("--verbose", "-v", action="store_true")

    ap = argparse.ArgumentParser(prog="zagier-workbench", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("zagier", parents=[common], help="one value L_{n^2-4}(s)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--s", default="0.5", help="complex s, e.g. 0.5+14j")
    p.add_argument("--method", choices=["auto", "hurwitz", "afe"], default="auto")

    p = sub.add_parser("psi", parents=[common], help="Psi(X) by both methods")
    p.add_argument("--X", type=float, required=True)
    p.add_argument("--reading", choices=["norm", "trace"], default="norm")
    p.add_argument("--tol", type=float, default=1e-8)

    p = sub.add_parser("verify-identity", parents=[common], help="trace identity sweep")
    p.add_argument("--n-min", type=int, default=3)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--tol", type=float, default=1e-8)

    p = sub.add_parser("average", parents=[common], help="partial sum, main term, error")
    p.add_argument("--X", type=float, required=True)
    p.add_argument("--t", type=float, default=0.0)

    p = sub.add_parser("error-scan", parents=[common], help="E_t(X) over a grid")
    p.add_argument("--x-min", type=float, required=True)
    p.add_argument("--x-max", type=float, required=True)
    p.add_argument("--points", type=int, default=50)
    p.add_argument("--linear", action="store_true", help="linear instead of log spacing")
    p.add_argument("--t", type=float, default=0.0)

    for name, helptext in [("omega-scan", "window omega_X over its support"),
                           ("smooth-check", "window properties and smoothed-error agreement")]:
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--X", type=float, required=True)
        p.add_argument("--delta1", type=float, default=0.1)
        p.add_argument("--delta2", type=float, default=0.5)
        if name == "omega-scan":
            p.add_argument("--points", type=int, default=1001)

    for name, helptext in [("spectral-sum", "sum of X^{i t_j}"),
                           ("explicit-formula", "explicit-formula residual")]:
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--X", type=float, required=True)
        p.add_argument("--T", type=float, required=True)
        p.add_argument("--eigenvalues", default=None, help=f"table (default DATA/{EIGEN_NAME})")
        if name == "explicit-formula":
            p.add_argument("--constant", type=float, default=5.0)

    p = sub.add_parser("kloosterman", parents=[common], help="S(m,n;c) for c <= c_max")
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--c-max", type=int, required=True)

    p = sub.add_parser("linnik", parents=[common], help="sum_{c<=C} e(D/c) S(n,n;c)/c")
    p.add_argument("--n", type=int, nargs="+", default=[1])
    p.add_argument("--C", type=float, nargs="+", required=True)
    p.add_argument("--D", type=int, nargs="+", default=[1])

    p = sub.add_parser("weighted-sum", parents=[common], help="weighted Kloosterman double sum")
    p.add_argument("--N", type=float, required=True)
    p.add_argument("--X", type=float, required=True)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--Q", type=int, default=None)

    p = sub.add_parser("subconvexity-scan", parents=[common], help="|L_{n^2-4}(1/2)| / n^{1/3}")
    p.add_argument("--n-max", type=int, required=True)
    return ap


def run(argv=None) -> int:
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 1
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s %(message)s")
    if a.threads > 0:
        import numba
        numba.set_num_threads(min(a.threads, numba.config.NUMBA_NUM_THREADS))
    out = sys.stdout if a.output == "-" else open(a.output, "w", newline="")
    table = None
    t0 = time.time()
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            trailer: dict = {}
            try:
                meta, cols, rows = COMMANDS[a.command](a, trailer)
            except ValueError as e:  # includes ValidationError and bad input files
                print(f"error: {e}", file=sys.stderr)
                return 1
            meta = {"command": a.command, "version": __version__, **meta}
            table = Table(out, a.format, meta, cols)
            table.trailer = trailer
            status = 0
            try:
                for row in rows:
                    table.add(row)
            except CheckFailed as e:
                trailer["check_failed"] = str(e)
                print(f"check failed: {e}", file=sys.stderr)
                status = 2
            except KeyboardInterrupt:
                trailer["wall_time_s"] = round(time.time() - t0, 3)
                table.close(truncated=True)
                print("interrupted", file=sys.stderr)
                return 2
            except ValidationError as e:
                print(f"error: {e}", file=sys.stderr)
                return 1
            except ValueError as e:
                print(f"error: {e}", file=sys.stderr)
                trailer["error"] = str(e)
                status = 1
            except (ArithmeticError, RuntimeError) as e:
                print(f"computation failed: {type(e).__name__}: {e}", file=sys.stderr)
                trailer["error"] = f"{type(e).__name__}: {e}"
                status = 2
            for w in caught:
                print(f"warning: {w.message}", file=sys.stderr)
                trailer.setdefault("warnings", []).append(str(w.message))
            trailer["wall_time_s"] = round(time.time() - t0, 3)
            table.close()
            return status
    finally:
        if out is not sys.stdout:
            out.close()


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
