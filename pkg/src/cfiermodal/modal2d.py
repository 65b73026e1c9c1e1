"""Circle eigenvalues of the 2D Dirichlet and Neumann combined-field operators."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .specfun import cyl_radial_products


@dataclass(frozen=True)
class CircleEig:
    m: int
    value: complex


def _check_k(k):
    k = float(k)
    if not (k > 0 and math.isfinite(k)):
        raise DomainError(f"k must be positive, got {k}")
    return k


def d_values(k: float, eta: complex, m_max: int) -> np.ndarray:
    """``d_m(k, eta)`` for m = 0..m_max."""
    k = _check_k(k)
    cp = cyl_radial_products(k, max(m_max, 1), False, half_integer=False)
    JpH, JH = cp.JpH[: m_max + 1], cp.JH[: m_max + 1]
    return 0.5j * math.pi * k * JpH + 0.5 * complex(eta) * math.pi * JH


def p_values(k: float, xi: complex, m_max: int) -> np.ndarray:
    """``p_m(k, xi)`` for m = 0..m_max; the ``ik`` bracket uses scaled I*K."""
    k = _check_k(k)
    nu = max(m_max, 1)
    cp = cyl_radial_products(k, nu, False, half_integer=False)
    ik = cyl_radial_products(k, nu, True, half_integer=False)
    sl = slice(0, m_max + 1)
    return (1.0 - 0.5j * math.pi * k * cp.JpH[sl]
            + complex(xi) * math.pi ** 2 * k * k / 4.0 * cp.JpHp[sl] * ik.iJH_ik[sl])


def d_m(k: float, eta: complex, m: int) -> complex:
    """Dirichlet eigenvalue on ``e^{i m theta}``."""
    a = abs(int(m))
    return complex(d_values(k, eta, a)[a])


def p_m(k: float, xi: complex, m: int) -> complex:
    """Neumann eigenvalue on ``e^{i m theta}``."""
    a = abs(int(m))
    return complex(p_values(k, xi, a)[a])


def imag_bracket(k: float, m_max: int) -> np.ndarray:
    """``i J_m(ik) H_m(ik) = (2/pi) I_m(k) K_m(k)`` for m = 0..m_max."""
    k = _check_k(k)
    return cyl_radial_products(k, max(m_max, 1), True, half_integer=False).iJH_ik[: m_max + 1]
