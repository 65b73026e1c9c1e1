"""Condition-number and coercivity sweeps, the b_nu scan and the lemma audit."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Sequence

import numpy as np
from scipy.special import gamma as gamma_fn

from .errors import CheckViolation, DomainError, TailConvergenceError
from .modal3d import CFIE, OperatorSpec, eig_arrays, layer_eigs, preset, tail_pair
from .specfun import cyl_radial_products

TAIL_RTOL = 1e-6
TAIL_MODE = 0  # argmax/argmin value meaning "the analytic tail pair"

AIRY_A = 2.0 ** (1.0 / 3.0) / (3.0 ** (2.0 / 3.0) * gamma_fn(2.0 / 3.0))
BNU_LIMIT = 2.0 * math.sqrt(2.0) * AIRY_A ** 2


def auto_n_max(k: float, extra: int = 200) -> int:
    return int(math.ceil(2.0 * k)) + extra


def condition_number(values) -> float:
    """``max|v| / min|v|``; ``inf`` when some value is exactly zero."""
    a = np.abs(np.asarray(values))
    lo = a.min()
    return math.inf if lo == 0 else float(a.max() / lo)


@dataclass(frozen=True)
class SpectrumReport:
    spec: OperatorSpec
    k: float
    n_max: int
    cond: float
    coercivity: float
    max_abs: float
    min_abs: float
    argmax_mode: int
    argmin_mode: int
    tail_included: bool
    truncation_dependent: bool = False


def _report(spec, grad, curl, n_max, tail):
    g, c = grad[:n_max], curl[:n_max]
    vals = np.concatenate([g, c])
    modes = np.concatenate([np.arange(1, n_max + 1)] * 2)
    if tail is not None:
        vals = np.concatenate([vals, [tail.grad, tail.curl]])
        modes = np.concatenate([modes, [TAIL_MODE, TAIL_MODE]])
    a = np.abs(vals)
    imax, imin = int(np.argmax(a)), int(np.argmin(a))
    return SpectrumReport(
        spec=spec, k=spec.k, n_max=n_max, cond=condition_number(vals),
        coercivity=float(vals.real.min()), max_abs=float(a[imax]), min_abs=float(a[imin]),
        argmax_mode=int(modes[imax]), argmin_mode=int(modes[imin]),
        tail_included=tail is not None, truncation_dependent=isinstance(spec.reg, CFIE))


def spectrum_report(spec: OperatorSpec, n_max: int | str = "auto") -> SpectrumReport:
    """Modal condition number and coercivity constant of ``spec``.

    With ``n_max="auto"`` the modes run to ``ceil(2k)+200`` and the result is
    compared with the range ``ceil(2k)+400``; a relative change of the
    condition number above ``1e-6`` raises :class:`TailConvergenceError`.
    The audit is skipped for CFIE, whose condition number grows without
    bound with the truncation (the report is flagged as truncation
    dependent instead).
    """
    tail = tail_pair(spec)
    if n_max != "auto":
        n_max = int(n_max)
        g, c = eig_arrays(spec, n_max)
        return _report(spec, g, c, n_max, tail)
    n1, n2 = auto_n_max(spec.k), auto_n_max(spec.k, 400)
    if isinstance(spec.reg, CFIE):
        g, c = eig_arrays(spec, n1)
        return _report(spec, g, c, n1, tail)
    g, c = eig_arrays(spec, n2)
    r1 = _report(spec, g, c, n1, tail)
    r2 = _report(spec, g, c, n2, tail)
    if not (abs(r2.cond - r1.cond) <= TAIL_RTOL * r1.cond):
        raise TailConvergenceError(
            f"cond changed from {r1.cond!r} to {r2.cond!r} when extending n_max {n1}->{n2} at k={spec.k}")
    return r1


@dataclass(frozen=True)
class SweepRow:
    k: float
    cond: float
    coercivity: float
    n_max: int
    error: str = ""


@dataclass(frozen=True)
class SweepTable:
    rows: list[SweepRow] = field(default_factory=list)

    def __len__(self):
        return len(self.rows)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])


def _sweep_row(family, n_max, k):
    try:
        rep = spectrum_report(family(k), n_max)
        return SweepRow(float(k), rep.cond, rep.coercivity, rep.n_max)
    except Exception as exc:  # row-level marker, sweep continues
        return SweepRow(float(k), math.nan, math.nan, 0, f"{type(exc).__name__}: {exc}")


def sweep(family: Callable[[float], OperatorSpec] | str, k_grid: Sequence[float],
          n_max: int | str = "auto", jobs: int = 1) -> SweepTable:
    """One report row per wavenumber, in grid order.

    *family* is a preset name or a picklable callable ``k -> OperatorSpec``.
    Rows are identical for any ``jobs``.
    """
    ks = [float(k) for k in k_grid]
    if not ks:
        raise DomainError("empty k grid")
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise DomainError("k grid must be strictly increasing")
    fam = partial(preset, family) if isinstance(family, str) else family
    work = partial(_sweep_row, fam, n_max)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(work, ks, chunksize=max(1, len(ks) // (4 * jobs))))
    else:
        rows = [work(k) for k in ks]
    return SweepTable(rows)


def k_grid(kmin: float = 8.0, kmax: float = 512.0, count: int = 5041) -> np.ndarray:
    if count < 1:
        raise DomainError("count must be >= 1")
    return np.linspace(kmin, kmax, count) if count > 1 else np.array([float(kmin)])


def loglog_slope(ks, values) -> float:
    """Least-squares slope of ``log(values)`` against ``log(ks)``."""
    return float(np.polyfit(np.log(np.asarray(ks, float)), np.log(np.asarray(values, float)), 1)[0])


# ------------------------------------------------------------------ b_nu

@dataclass(frozen=True)
class BNuScan:
    max_value: float
    normalized: float
    argmax_nu: float


def b_nu_values(k: float, nu_max: float):
    """Half-integer orders and ``b_nu(k) = |J_nu H_nu(k)| sqrt(nu^2 + k^2)``."""
    cp = cyl_radial_products(k, nu_max, False)
    nu = cp.orders
    return nu, np.abs(cp.JH) * np.sqrt(nu * nu + k * k)


def b_nu_scan(k: float) -> BNuScan:
    """Maximum of ``b_nu(k)`` over ``nu >= k`` and its ``k^{-1/3}`` scaling."""
    if not k > 0:
        raise DomainError("k must be positive")
    m_hi = math.ceil(4 * k) + 200
    nu, b = b_nu_values(k, m_hi + 0.5)
    m = nu - 0.5
    sel = (m >= math.ceil(k)) & (nu >= k)
    i = int(np.argmax(np.where(sel, b, -np.inf)))
    return BNuScan(float(b[i]), float(b[i] * k ** (-1.0 / 3.0)), float(nu[i]))


# ------------------------------------------------------------ lemma audit

@dataclass(frozen=True)
class LemmaRecord:
    k_grid: list
    C1: float
    C2: float
    ratio_ii_min: float
    C3: float
    C4: float
    per_k: list
    violations: list


def lemma_imkm_check(k_grid: Sequence[float], n_rule: Callable[[float], int] = auto_n_max,
                     raise_on_violation: bool = False) -> LemmaRecord:
    """Empirical constants of the three imaginary-argument product bounds.

    For every ``k`` and ``n = 0..n_rule(k)`` with ``nu = n + 1/2``:

    (i)   ``-(2/pi) I'_nu K'_nu * k^2 / sqrt(n^2+k^2)``, bracketed by ``[C1, C2]``;
    (ii)  ``-S1_n(ik) * sqrt(n^2+k^2) >= 1/4`` and
          ``-S1_n(ik) <= C3 ((n^2+k^2)^{-1/2} + k^{-2})``;
    (iii) ``k * (2/pi) I'_nu K_nu`` and ``k * (2/pi) |I_nu K'_nu|`` below ``C4``.
    """
    per_k, viol = [], []
    for k in k_grid:
        k = float(k)
        if k < 8:
            raise DomainError("lemma audit expects k >= 8")
        N = int(n_rule(k))
        n = np.arange(N + 1)
        cp = cyl_radial_products(k, N + 0.5, True)
        rho = np.sqrt(n * n + k * k)
        r_i = -(2 / math.pi) * cp.IpKp * k * k / rho
        S1 = layer_eigs(1j * k, N).S1
        mS1 = -S1.real
        r_ii = mS1 * rho
        c3 = mS1 / (1 / rho + k ** -2.0)
        r_iii_a = k * (2 / math.pi) * cp.IpK
        r_iii_b = k * (2 / math.pi) * np.abs(cp.IKp)
        for j in np.nonzero(r_ii < 0.25)[0]:
            viol.append(("ii", k, int(j), float(r_ii[j])))
        for j in np.nonzero(~(r_i > 0))[0]:
            viol.append(("i", k, int(j), float(r_i[j])))
        per_k.append(dict(k=k, i_min=float(r_i.min()), i_max=float(r_i.max()),
                          ii_min=float(r_ii.min()), C3=float(c3.max()),
                          iii_max=float(max(r_iii_a.max(), r_iii_b.max())),
                          S1_imag_max=float(np.max(np.abs(S1.imag) / np.abs(S1)))))
    rec = LemmaRecord(
        k_grid=[float(k) for k in k_grid],
        C1=min(p["i_min"] for p in per_k), C2=max(p["i_max"] for p in per_k),
        ratio_ii_min=min(p["ii_min"] for p in per_k), C3=max(p["C3"] for p in per_k),
        C4=max(p["iii_max"] for p in per_k), per_k=per_k, violations=viol)
    if raise_on_violation and viol:
        raise CheckViolation(f"{len(viol)} lemma violations", [(v[1], v[2]) for v in viol])
    return rec


def spread(values) -> float:
    """Ratio of largest to smallest of positive values."""
    v = np.asarray(values, float)
    return float(v.max() / v.min())
