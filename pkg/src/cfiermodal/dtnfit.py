"""How well ``-2 T_{k + i kappa2}`` mimics the sphere DtN map, and the best kappa2."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateError, DomainError
from .modal3d import dtn_eig_arrays, layer_eigs, ps_T_arrays

REFERENCE_COEF = 0.4
DEGENERATE_TOL = 1e-14


def reference_kappa2(k: float) -> float:
    return REFERENCE_COEF * k ** (1.0 / 3.0)


def default_n_max(k: float) -> int:
    return int(math.ceil(2.0 * k))


@dataclass(frozen=True)
class DeviationCurve:
    k: float
    kappa2: float
    ps_mode: bool
    n: np.ndarray
    r1: np.ndarray
    r2: np.ndarray

    @property
    def max_dev(self) -> float:
        return float(max(self.r1.max(), self.r2.max()))


class _DtN:
    """Caches the DtN eigenvalues for one (k, n_max)."""

    def __init__(self, k: float, n_max: int):
        Z1, Z2 = dtn_eig_arrays(k, n_max)
        self.Z1, self.Z2 = Z1[1:], Z2[1:]
        if min(np.abs(self.Z1).min(), np.abs(self.Z2).min()) < DEGENERATE_TOL:
            raise DegenerateError("DtN eigenvalue below 1e-14 in magnitude")
        self.a1, self.a2 = np.abs(self.Z1), np.abs(self.Z2)
        self.k, self.n_max = k, n_max

    def curve(self, kappa2: float, ps_mode: bool) -> DeviationCurve:
        K = complex(self.k, kappa2)
        n = np.arange(1, self.n_max + 1)
        if ps_mode:
            L1, L2 = ps_T_arrays(K, n)
        else:
            L = layer_eigs(K, self.n_max)
            L1, L2 = L.Lam1[1:], L.Lam2[1:]
        r1 = np.abs(self.Z1 + 2.0 * L1) / self.a1
        r2 = np.abs(self.Z2 + 2.0 * L2) / self.a2
        return DeviationCurve(self.k, kappa2, ps_mode, n, r1, r2)


def _check(k, kappa2):
    if not (k > 0 and math.isfinite(k)):
        raise DomainError("k must be positive")
    if not (kappa2 > 0 and math.isfinite(kappa2)):
        raise DomainError("kappa2 must be positive")


def deviation_curve(k: float, kappa2: float, n_max: int | None = None,
                    ps_mode: bool = False) -> DeviationCurve:
    """Relative gaps ``|Z_n + 2 Lambda_n(k + i kappa2)| / |Z_n|`` for n = 1..n_max."""
    _check(k, kappa2)
    n_max = default_n_max(k) if n_max is None else int(n_max)
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    return _DtN(float(k), n_max).curve(float(kappa2), ps_mode)


def default_grid(k: float, count: int = 200) -> np.ndarray:
    """Log-spaced kappa2 values in ``[0.05, 4] k^{1/3}`` plus the reference point."""
    c = k ** (1.0 / 3.0)
    g = np.geomspace(0.05 * c, 4.0 * c, count)
    return np.unique(np.append(g, reference_kappa2(k)))


@dataclass(frozen=True)
class KappaFit:
    k: float
    kappa2_star: float
    dev_star: float
    kappa2_ref: float
    dev_ref: float


def optimize_kappa2(k: float, n_max: int | None = None, grid: Sequence[float] | None = None,
                    ps_mode: bool = False) -> KappaFit:
    """Grid minimizer of the maximal deviation; ties go to the smaller kappa2."""
    k = float(k)
    _check(k, 1.0)
    ref = reference_kappa2(k)
    g = default_grid(k) if grid is None else np.asarray(grid, float)
    g = np.unique(np.append(g, ref))  # reference point enforced, sorted ascending
    if np.any(g <= 0):
        raise DomainError("kappa2 grid must be positive")
    n_max = default_n_max(k) if n_max is None else int(n_max)
    dtn = _DtN(k, n_max)
    devs = np.array([dtn.curve(float(x), ps_mode).max_dev for x in g])
    i = int(np.argmin(devs))  # first minimum, i.e. smallest kappa2
    j = int(np.nonzero(g == ref)[0][0])
    return KappaFit(k, float(g[i]), float(devs[i]), ref, float(devs[j]))


def fit_exponent(fits: Sequence[KappaFit]) -> float:
    """Least-squares exponent of ``kappa2_star`` against ``k``."""
    ks = np.log([f.k for f in fits])
    ys = np.log([f.kappa2_star for f in fits])
    return float(np.polyfit(ks, ys, 1)[0])
