"""Bessel/Hankel products that stay finite at large order and complex argument.

Individual factors such as ``j_n(z)`` underflow and ``h_n(z)`` overflow once
``n`` exceeds ``|z|`` by a few hundred, but every quantity needed downstream
is a product of one regular and one outgoing factor.  These products are
built from two ratio chains:

* ``R_nu = F_nu / F_{nu-1}`` for the regular solution, started with a
  continued fraction at the top order and recurred downward;
* ``S_nu = G_nu / G_{nu-1}`` for the outgoing solution, recurred upward from
  a closed form at the lowest order;

and a running product ``P_nu = P_{nu-1} R_nu S_nu``.  Derivative products use
``F'_nu = F_{nu-1} - (nu/z) F_nu`` (and its modified analogue) at product
level, so no derivative factor is formed on its own.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import ConvergenceError, DomainError

CF_MAX_TERMS = 10_000
CF_TOL = 1e-15
_TINY = 1e-300


@dataclass(frozen=True)
class Wavenumber:
    """Complex wavenumber with non-negative real and imaginary parts."""

    re: float
    im: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.re) and math.isfinite(self.im)):
            raise DomainError("wavenumber must be finite")
        if self.im < 0:
            raise DomainError(f"wavenumber imaginary part must be >= 0, got {self.im}")
        if self.re < 0:
            raise DomainError(f"wavenumber real part must be >= 0, got {self.re}")

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)

    def __complex__(self):
        return self.value

    @classmethod
    def of(cls, K) -> "Wavenumber":
        if isinstance(K, Wavenumber):
            return K
        z = complex(K)
        return cls(z.real, z.imag)


def as_complex(K) -> complex:
    """Validate a wavenumber-like value and return it as a Python complex."""
    return Wavenumber.of(K).value


def lentz_ratio(nu: float, z: complex, *, modified: bool = False,
                max_terms: int = CF_MAX_TERMS, tol: float = CF_TOL) -> complex:
    """Return ``J_nu(z)/J_{nu-1}(z)`` (or ``I_nu/I_{nu-1}`` when *modified*).

    Evaluates the continued fraction
    ``1/(b_1 + a/(b_2 + a/(b_3 + ...)))`` with ``b_j = 2(nu+j-1)/z`` and
    ``a = -1`` (``+1`` for the modified case) by the modified Lentz method.
    """
    z = complex(z)
    if z == 0:
        raise DomainError("continued fraction needs z != 0")
    a = 1.0 if modified else -1.0
    inv_z = 1.0 / z
    f = _TINY
    C = f
    D = 0j
    for j in range(1, max_terms + 1):
        b = 2.0 * (nu + j - 1) * inv_z
        aj = 1.0 if j == 1 else a
        D = b + aj * D
        if D == 0:
            D = _TINY
        C = b + aj / C
        if C == 0:
            C = _TINY
        D = 1.0 / D
        delta = C * D
        f *= delta
        if abs(delta - 1.0) < tol:
            return f
    raise ConvergenceError(
        f"continued fraction for order {nu} at z={z} did not converge in {max_terms} terms")


def _ratio_chains(z: complex, nu0: float, m_max: int, modified: bool,
                  s1: complex):
    """Return lists R, S indexed by m = 0..m_max (entries at m=0 unused).

    R[m] = F_{nu0+m}/F_{nu0+m-1}; S[m] = G_{nu0+m}/G_{nu0+m-1} with S[1] = s1.
    """
    sgn = 1.0 if modified else -1.0
    R = [0j] * (m_max + 1)
    S = [0j] * (m_max + 1)
    if m_max == 0:
        return R, S
    R[m_max] = lentz_ratio(nu0 + m_max, z, modified=modified)
    for m in range(m_max - 1, 0, -1):
        R[m] = 1.0 / (2.0 * (nu0 + m) / z + sgn * R[m + 1])
    S[1] = s1
    for m in range(1, m_max):
        # G_{nu+1} = (2nu/z) G_nu -/+ G_{nu-1}
        S[m + 1] = 2.0 * (nu0 + m) / z + sgn / S[m]
    return R, S


def _product_chain(p0: complex, z: complex, nu0: float, R, S, m_max: int, modified: bool):
    """Products P, FpG, FGp, FpGp for m = 0..m_max as complex arrays."""
    P = np.empty(m_max + 1, dtype=complex)
    dP = np.empty_like(P)
    Pd = np.empty_like(P)
    dPd = np.empty_like(P)
    P[0] = p0
    for m in range(1, m_max + 1):
        P[m] = P[m - 1] * R[m] * S[m]
    # order nu0 via the upward neighbour
    if m_max >= 1:
        nz = nu0 / z
        if modified:
            a, b = R[1] + nz, nz - S[1]
        else:
            a, b = nz - R[1], nz - S[1]
        dP[0] = p0 * a
        Pd[0] = p0 * b
        dPd[0] = p0 * a * b
    else:
        dP[0] = Pd[0] = dPd[0] = complex("nan")
    for m in range(1, m_max + 1):
        nu = nu0 + m
        r, s, q = R[m], S[m], P[m - 1]
        if modified:
            u = 1.0 - nu * r / z
            w = 1.0 + nu * s / z
            dP[m] = q * s * u
            Pd[m] = -q * r * w
            dPd[m] = -q * u * w
        else:
            u = 1.0 - nu * r / z
            w = 1.0 - nu * s / z
            dP[m] = q * s * u
            Pd[m] = q * r * w
            dPd[m] = q * u * w
    return P, dP, Pd, dPd


# ---------------------------------------------------------------- spherical

@dataclass(frozen=True)
class RadialProducts:
    """Per-mode spherical Bessel/Hankel products at one wavenumber.

    Arrays are indexed by ``n = 0..n_max``.  ``jph`` is ``j_n' h_n``,
    ``jhp`` is ``j_n h_n'`` and ``riccati_jp_hp`` is ``[z j_n]'[z h_n]'``.
    """

    K: complex
    n_max: int
    jh: np.ndarray
    jph: np.ndarray
    jhp: np.ndarray
    jphp: np.ndarray
    riccati_jp_hp: np.ndarray

    @property
    def n(self) -> np.ndarray:
        return np.arange(self.n_max + 1)


def sph_radial_products(K, n_max: int) -> RadialProducts:
    """Spherical products ``j_n(K) h_n^{(1)}(K)`` and derivative variants."""
    z = as_complex(K)
    if z == 0:
        raise DomainError("K must be nonzero")
    n_max = int(n_max)
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    m_top = n_max + 1
    R, S = _ratio_chains(z, 0.5, m_top, False, 1.0 / z - 1j)
    e = cmath.exp(2j * z)
    p0 = (1.0 - e) / (2.0 * z * z)  # j_0 h_0
    jh = np.empty(m_top + 1, dtype=complex)
    jh[0] = p0
    for n in range(1, m_top + 1):
        jh[n] = jh[n - 1] * R[n] * S[n]
    jph = np.empty(n_max + 1, dtype=complex)
    jhp = np.empty_like(jph)
    jphp = np.empty_like(jph)
    ric = np.empty_like(jph)
    jph[0] = -p0 * R[1]
    jhp[0] = -p0 * S[1]
    jphp[0] = jh[1]
    ric[0] = 0.5 * (1.0 + e)  # cos z * e^{iz}
    for n in range(1, n_max + 1):
        r, s, q = R[n], S[n], jh[n - 1]
        u = 1.0 - (n + 1) * r / z
        w = 1.0 - (n + 1) * s / z
        jph[n] = q * s * u
        jhp[n] = q * r * w
        jphp[n] = q * u * w
        # [z f_n]' = z f_{n-1} - n f_n
        ric[n] = q * (z - n * r) * (z - n * s)
    jh = jh[: n_max + 1]
    for arr in (jh, jph, jhp, jphp, ric):
        arr.setflags(write=False)
    return RadialProducts(z, n_max, jh, jph, jhp, jphp, ric)


def wronskian_defects(K, n_max: int) -> np.ndarray:
    """Relative defects of ``jph - jhp = -i/K^2`` for n = 0..n_max."""
    rp = sph_radial_products(K, n_max)
    target = -1j / rp.K ** 2
    return np.abs(rp.jph - rp.jhp - target) / abs(target)


def riccati_defects(K, n_max: int) -> np.ndarray:
    """Relative defect of the Riccati-Bessel product against its expansion."""
    rp = sph_radial_products(K, n_max)
    z = rp.K
    alt = z * z * rp.jphp + z * (rp.jph + rp.jhp) + rp.jh
    return np.abs(alt - rp.riccati_jp_hp) / np.abs(rp.riccati_jp_hp)


def wronskian_audit(K, n_max: int) -> float:
    """Largest relative spherical Wronskian defect over n = 0..n_max."""
    return float(np.max(wronskian_defects(K, n_max)))


# -------------------------------------------------------------- cylindrical

@dataclass(frozen=True)
class CylRadialProducts:
    """Cylindrical products at orders ``nu0 + m``, m = 0..M.

    Real-argument columns: ``JH, JpH, JHp, JpHp``.  Imaginary-argument
    columns (argument ``ik``): ``IK, IpK, IKp, IpKp`` and the derived
    ``iJH_ik = (2/pi) I K`` and ``iJpHp_ik = -(2/pi) I' K'``.
    """

    k: float
    orders: np.ndarray
    imaginary_arg: bool
    JH: np.ndarray | None = None
    JpH: np.ndarray | None = None
    JHp: np.ndarray | None = None
    JpHp: np.ndarray | None = None
    IK: np.ndarray | None = None
    IpK: np.ndarray | None = None
    IKp: np.ndarray | None = None
    IpKp: np.ndarray | None = None

    @property
    def iJH_ik(self) -> np.ndarray:
        return (2.0 / math.pi) * self.IK

    @property
    def iJpHp_ik(self) -> np.ndarray:
        return -(2.0 / math.pi) * self.IpKp


def cyl_radial_products(k: float, nu_max: float, imaginary_arg: bool = False,
                        *, half_integer: bool = True) -> CylRadialProducts:
    """Products of cylindrical functions at real ``k`` or at ``ik``.

    Orders run over ``m + 1/2`` (or integers ``m`` when *half_integer* is
    false) up to ``nu_max``.  Integer orders take their order-0 anchor and
    the first outgoing ratio from scipy's scaled Bessel routines.
    """
    k = float(k)
    if not k > 0 or not math.isfinite(k):
        raise DomainError(f"k must be positive, got {k}")
    nu0 = 0.5 if half_integer else 0.0
    if nu_max < nu0:
        raise DomainError(f"nu_max must be >= {nu0}")
    M = int(math.floor(nu_max - nu0 + 1e-12))
    m_top = max(M, 1)
    orders = nu0 + np.arange(M + 1)
    if imaginary_arg:
        x = k
        if half_integer:
            p0 = -math.expm1(-2.0 * x) / (2.0 * x)
            s1 = 1.0 + 1.0 / x
        else:
            p0 = special.ive(0, x) * special.kve(0, x)
            s1 = special.kve(1, x) / special.kve(0, x)
        R, S = _ratio_chains(complex(x), nu0, m_top, True, complex(s1))
        P, dP, Pd, dPd = _product_chain(complex(p0), complex(x), nu0, R, S, m_top, True)
        cut = slice(0, M + 1)
        cols = [np.ascontiguousarray(a[cut].real) for a in (P, dP, Pd, dPd)]
        for a in cols:
            a.setflags(write=False)
        return CylRadialProducts(k, orders, True, IK=cols[0], IpK=cols[1],
                                 IKp=cols[2], IpKp=cols[3])
    z = complex(k)
    if half_integer:
        p0 = (1.0 - cmath.exp(2j * z)) / (math.pi * z)
        s1 = 1.0 / z - 1j
    else:
        h0 = special.hankel1e(0, k)
        p0 = special.jv(0, k) * h0 * cmath.exp(1j * k)
        s1 = special.hankel1e(1, k) / h0
    R, S = _ratio_chains(z, nu0, m_top, False, complex(s1))
    P, dP, Pd, dPd = _product_chain(complex(p0), z, nu0, R, S, m_top, False)
    cut = slice(0, M + 1)
    cols = [np.ascontiguousarray(a[cut]) for a in (P, dP, Pd, dPd)]
    for a in cols:
        a.setflags(write=False)
    return CylRadialProducts(k, orders, False, JH=cols[0], JpH=cols[1],
                             JHp=cols[2], JpHp=cols[3])


def modified_wronskian_defects(x: float, nu_max: float, *, half_integer: bool = True) -> np.ndarray:
    """Relative defects of ``I_nu K_{nu+1} + I_{nu+1} K_nu = 1/x``.

    Rewritten with products only:
    ``I_nu K_{nu+1} = IK_nu * sK_{nu+1}`` and ``I_{nu+1} K_nu = IK_nu * rI_{nu+1}``,
    where the ratios are recovered from the derivative columns.
    """
    cp = cyl_radial_products(x, nu_max + 1, True, half_integer=half_integer)
    nu = cp.orders
    # I'_nu K_nu = I_{nu+1}K_nu + (nu/x) I_nu K_nu ; I_nu K'_nu = -I_nu K_{nu+1} + (nu/x) I_nu K_nu
    i_next_k = cp.IpK - nu / x * cp.IK
    i_k_next = -(cp.IKp - nu / x * cp.IK)
    total = (i_next_k + i_k_next)[:-1]
    return np.abs(total * x - 1.0)


def cyl_wronskian_defects(k: float, nu_max: float, *, half_integer: bool = True) -> np.ndarray:
    """Relative defects of ``J H' - J' H = 2i/(pi k)``."""
    cp = cyl_radial_products(k, nu_max, False, half_integer=half_integer)
    target = 2j / (math.pi * k)
    return np.abs(cp.JHp - cp.JpH - target) / abs(target)


def sph_jh_imag_via_modified(x: float, n_max: int) -> np.ndarray:
    """``j_n(ix) h_n^{(1)}(ix) = -I_{n+1/2}(x) K_{n+1/2}(x) / x`` for n = 0..n_max."""
    cp = cyl_radial_products(x, n_max + 0.5, True)
    return -cp.IK / x
