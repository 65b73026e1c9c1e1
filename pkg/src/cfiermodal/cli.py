"""Command-line front end: every experiment writes a deterministic CSV table.

Exit codes: 0 success, 1 usage error, 2 failed numerical check.
"""

from __future__ import annotations

import argparse
import io
import math
import sys
from typing import Sequence

import numpy as np

from .errors import CfierError, DomainError
from .modal3d import PRESETS

FLOAT_FMT = "%.16e"  # 17 significant digits


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_help(sys.stderr)
        raise UsageError(message)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return FLOAT_FMT % float(v)
    return str(v)


def to_csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO(newline="")
    buf.write(",".join(header) + "\n")
    for r in rows:
        buf.write(",".join(_fmt(v) for v in r) + "\n")
    return buf.getvalue()


class Table:
    def __init__(self, header, rows, *, failures=(), title="", logx=False, logy=False):
        self.header, self.rows = list(header), list(rows)
        self.failures = list(failures)
        self.title, self.logx, self.logy = title, logx, logy


# ---------------------------------------------------------------- commands

def cmd_spectrum_sweep(a) -> Table:
    from .spectra import k_grid, sweep

    count = 101 if a.fast and a.count is None else (a.count or 5041)
    ks = k_grid(a.kmin, a.kmax, count)
    t = sweep(a.op, ks, "auto", jobs=a.jobs)
    rows, bad = [], []
    for r in t.rows:
        rows.append((r.k, r.cond, r.coercivity, r.n_max))
        if r.error:
            bad.append(f"k={r.k!r}: {r.error}")
    return Table(["k", "cond", "coercivity", "n_max"], rows, failures=bad,
                 title=f"{a.op} modal spectrum", logx=True, logy=False)


def _kappa2(a, k):
    from .dtnfit import optimize_kappa2, reference_kappa2

    if a.kappa2 == "auto":
        return reference_kappa2(k)
    if a.kappa2 == "opt":
        return optimize_kappa2(k, ps_mode=a.ps).kappa2_star
    try:
        return float(a.kappa2)
    except ValueError:
        raise UsageError(f"--kappa2 expects a number, 'auto' or 'opt', got {a.kappa2!r}") from None


def cmd_dtn_curve(a) -> Table:
    from .dtnfit import deviation_curve

    k = _one_k(a)
    c = deviation_curve(k, _kappa2(a, k), a.n_max, ps_mode=a.ps)
    rows = [(int(n), float(x), float(y)) for n, x, y in zip(c.n, c.r1, c.r2)]
    return Table(["n", "r1", "r2"], rows, title=f"DtN deviation k={k:g} kappa2={c.kappa2:.4g}", logy=True)


def cmd_dtn_fit(a) -> Table:
    from .dtnfit import default_grid, fit_exponent, optimize_kappa2

    ks = a.k or [64.0, 128.0, 256.0, 512.0]
    fits = []
    for k in ks:
        grid = default_grid(k, 60 if a.fast else 200)
        fits.append(optimize_kappa2(k, grid=grid, ps_mode=a.ps))
    rows = [(f.k, f.kappa2_star, f.dev_star, f.kappa2_ref, f.dev_ref) for f in fits]
    if len(fits) > 1:
        print(f"# fitted exponent {fit_exponent(fits):.6f}", file=sys.stderr)
    return Table(["k", "kappa2_star", "dev_star", "kappa2_ref", "dev_ref"], rows,
                 title="optimal kappa2", logx=True, logy=True)


def cmd_solve(a) -> Table:
    from . import sphsolve as S
    from .modal3d import preset

    ks = a.k or [64.0]
    ops = a.op_list or ["cfie", "regt-complex"]
    n_dirs = 16 if a.fast else a.n_dirs
    rows, bad = [], []
    for k in ks:
        rhs = S.planewave_trace(k, a.n_max)
        for op in ops:
            spec = preset(op, k)
            x, st = S.solve_gmres(spec, rhs, a.tol, a.max_iter)
            res = S.boundary_residual(x, k)
            ffe = S.far_field_error(x, k, n_dirs)
            rows.append((op, k, rhs.n_max, st.iterations, st.final_relative_residual,
                         st.converged, res, ffe))
            if not st.converged:
                bad.append(f"{op} k={k!r}: no convergence in {a.max_iter} iterations")
    return Table(["op", "k", "n_max", "iterations", "final_relative_residual", "converged",
                  "boundary_residual", "far_field_error"], rows, failures=bad)


def cmd_bessel_audit(a) -> Table:
    from . import specfun as sf

    ks = a.k or [8.0, 64.0, 512.0]
    rows, bad = [], []
    for k in ks:
        N = int(math.ceil(2 * k)) + 200
        n = np.arange(N + 1)
        tol = np.where(n > 4 * k, 1e-11, 1e-12)
        w_re = sf.wronskian_defects(k, N)
        w_im = sf.wronskian_defects(1j * k, N)
        mod = sf.modified_wronskian_defects(k, N + 0.5)
        cyl = sf.cyl_wronskian_defects(k, N + 0.5)
        a1 = sf.sph_radial_products(1j * k, N).jh
        a2 = sf.sph_jh_imag_via_modified(k, N)
        cross = np.abs(a1 - a2) / np.abs(a2)
        rows.append((k, N, w_re.max(), w_im.max(), mod.max(), cyl.max(), cross.max()))
        for name, d, t in (("sph_real", w_re, tol), ("sph_imag", w_im, tol)):
            for j in np.nonzero(d > t)[0]:
                bad.append(f"{name} (k={k!r}, n={int(j)}) defect {d[j]:.3e}")
        for name, d, t in (("modified", mod, 1e-12), ("cylindrical", cyl, 1e-12), ("cross_path", cross, 1e-10)):
            for j in np.nonzero(d > t)[0]:
                bad.append(f"{name} (k={k!r}, n={int(j)}) defect {d[j]:.3e}")
    return Table(["k", "n_max", "sph_real", "sph_imag", "modified", "cylindrical", "cross_path"],
                 rows, failures=bad, logx=True, logy=True)


def cmd_lemma_audit(a) -> Table:
    from .spectra import lemma_imkm_check

    ks = a.k or [16.0, 64.0, 256.0]
    rec = lemma_imkm_check(ks)
    rows = [(p["k"], p["i_min"], p["i_max"], p["ii_min"], p["C3"], p["iii_max"]) for p in rec.per_k]
    bad = [f"part {v[0]} (k={v[1]!r}, n={v[2]}) ratio {v[3]:.6g}" for v in rec.violations]
    return Table(["k", "i_min", "i_max", "ii_min", "C3", "iii_max"], rows, failures=bad, logx=True)


def cmd_bnu_scan(a) -> Table:
    from .spectra import b_nu_scan

    ks = a.k or ([64.0, 128.0] if a.fast else [64.0, 128.0, 256.0, 512.0])
    rows = []
    for k in ks:
        s = b_nu_scan(k)
        rows.append((k, s.max_value, s.normalized, s.argmax_nu))
    return Table(["k", "max_value", "normalized", "argmax_nu"], rows, logx=True)


D_FLOOR, P_FLOOR = 0.5, 0.35


def cmd_coercivity_2d(a) -> Table:
    from .modal2d import d_values, p_values

    ks = a.k or ([64.0, 128.0] if a.fast else [256.0, 512.0])
    rows, bad = [], []
    for k in ks:
        M = int(4 * k)
        d = d_values(k, k, M)
        p = p_values(k, k ** (1.0 / 3.0), M)
        rows.append((k, M, d.real.min(), p.real.min(), np.abs(d).max(), np.abs(p).max()))
        for j in np.nonzero(d.real < D_FLOOR)[0]:
            bad.append(f"d (k={k!r}, nu={int(j)}) Re={d.real[j]:.6g}")
        for j in np.nonzero(p.real < P_FLOOR)[0]:
            bad.append(f"p (k={k!r}, nu={int(j)}) Re={p.real[j]:.6g}")
    return Table(["k", "nu_max", "min_re_d", "min_re_p", "max_abs_d", "max_abs_p"], rows,
                 failures=bad, logx=True)


COMMANDS = {
    "spectrum-sweep": cmd_spectrum_sweep,
    "dtn-curve": cmd_dtn_curve,
    "dtn-fit": cmd_dtn_fit,
    "solve": cmd_solve,
    "bessel-audit": cmd_bessel_audit,
    "lemma-audit": cmd_lemma_audit,
    "bnu-scan": cmd_bnu_scan,
    "coercivity-2d": cmd_coercivity_2d,
}


def _one_k(a) -> float:
    if not a.k or len(a.k) != 1:
        raise UsageError("this command needs exactly one --k value")
    return a.k[0]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cfiermodal", description="Modal spectra and sphere scattering experiments (CSV output).")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    def common(sp):
        sp.add_argument("--out", help="CSV path (default: stdout)")
        sp.add_argument("--fast", action="store_true", help="reduced grids for quick runs")
        sp.add_argument("--figure", metavar="PATH", help="also render a PNG (needs matplotlib)")
        return sp

    s = common(sub.add_parser("spectrum-sweep", help="cond and coercivity over a k grid"))
    s.add_argument("--op", choices=sorted(PRESETS), required=True)
    s.add_argument("--kmin", type=float, default=8.0)
    s.add_argument("--kmax", type=float, default=512.0)
    s.add_argument("--count", type=int)
    s.add_argument("--jobs", type=int, default=1)

    s = common(sub.add_parser("dtn-curve", help="DtN deviation ratios r1, r2 per mode"))
    s.add_argument("--k", type=float, action="append")
    s.add_argument("--kappa2", default="auto", help="number, 'auto' (0.4 k^(1/3)) or 'opt'")
    s.add_argument("--n-max", type=int)
    s.add_argument("--ps", action="store_true", help="principal-symbol eigenvalues")

    s = common(sub.add_parser("dtn-fit", help="grid-optimal kappa2 per k"))
    s.add_argument("--k", type=float, action="append")
    s.add_argument("--ps", action="store_true")

    s = common(sub.add_parser("solve", help="plane-wave sphere solve with GMRES"))
    s.add_argument("--op", dest="op_list", choices=sorted(PRESETS), action="append")
    s.add_argument("--k", type=float, action="append")
    s.add_argument("--tol", type=float, default=1e-4)
    s.add_argument("--max-iter", type=int, default=500)
    s.add_argument("--n-max", type=int)
    s.add_argument("--n-dirs", type=int, default=32)

    for name, hlp in (("bessel-audit", "Wronskian and cross-path defects"),
                      ("lemma-audit", "imaginary-argument product bounds"),
                      ("bnu-scan", "maximum of b_nu(k) over nu >= k"),
                      ("coercivity-2d", "circle eigenvalue floors")):
        s = common(sub.add_parser(name, help=hlp))
        s.add_argument("--k", type=float, action="append")
    return p


def _validate(a):
    if getattr(a, "count", None) is not None and a.count < 1:
        raise UsageError("--count must be >= 1")
    if getattr(a, "jobs", 1) < 1:
        raise UsageError("--jobs must be >= 1")
    if a.command == "spectrum-sweep":
        if a.kmax < a.kmin:
            raise UsageError("--kmax must be >= --kmin")
        if a.kmin < 8:
            print(f"warning: kmin={a.kmin:g} below 8, outside the studied range", file=sys.stderr)
    for k in getattr(a, "k", None) or []:
        if not (k > 0 and math.isfinite(k)):
            raise UsageError(f"--k must be positive, got {k}")


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
        _validate(a)
        table = COMMANDS[a.command](a)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except CfierError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        for m in getattr(exc, "modes", []) or getattr(exc, "offenders", []):
            print(f"  {m}", file=sys.stderr)
        return 2
    text = to_csv(table.header, table.rows)
    if a.out:
        with open(a.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if a.figure:
        from .plotting import render_table

        render_table(a.figure, table.header, table.rows, title=table.title,
                     logx=table.logx, logy=table.logy)
    if table.failures:
        print("numerical check failed:", file=sys.stderr)
        for f in table.failures:
            print(f"  {f}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    raise SystemExit(run())
