"""Sphere eigenvalues of the electromagnetic layer operators and CFIER families.

All operators act diagonally on the pair ``(grad Y_n^m, curl Y_n^m)`` of
tangential fields on the unit sphere.  Conventions used throughout:

* ``K grad Y = -lambda grad Y`` and ``K curl Y = lambda curl Y``;
* ``T grad Y = Lambda1 curl Y`` and ``T curl Y = Lambda2 grad Y``;
* ``n x grad Y = -curl Y`` and ``n x curl Y = grad Y``.

A regularizer ``R`` swaps the two subspaces as well, so it is described by
two factors ``R grad Y = rho_g curl Y`` and ``R curl Y = rho_c grad Y``.  The
combined operator ``I/2 - K + T R`` then has eigenvalues
``1/2 + lambda + Lambda2 rho_g`` (gradient) and ``1/2 - lambda + Lambda1 rho_c``
(curl).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import BranchPointError, DegenerateError, DomainError
from .specfun import _ratio_chains, as_complex, sph_radial_products


@dataclass(frozen=True)
class ModalEig:
    grad: complex
    curl: complex


# ------------------------------------------------------------ regularizers

@dataclass(frozen=True)
class CFIE:
    """Classical combined field operator, regularizer ``n x .``."""


@dataclass(frozen=True)
class RegNxS:
    """``R = c (n x S_K)``."""

    c: complex
    K_reg: complex

    def __post_init__(self):
        object.__setattr__(self, "K_reg", as_complex(self.K_reg))
        object.__setattr__(self, "c", complex(self.c))


@dataclass(frozen=True)
class RegT:
    """``R = -gamma T_K``."""

    gamma: float
    K_reg: complex

    def __post_init__(self):
        if not self.gamma > 0:
            raise DomainError("gamma must be positive")
        object.__setattr__(self, "K_reg", as_complex(self.K_reg))


@dataclass(frozen=True)
class PSRegNxS:
    """``R = c PS(n x S_K)``, principal-symbol version of :class:`RegNxS`."""

    c: complex
    K_reg: complex

    def __post_init__(self):
        object.__setattr__(self, "K_reg", as_complex(self.K_reg))
        object.__setattr__(self, "c", complex(self.c))


@dataclass(frozen=True)
class PSRegT:
    """``R = -gamma PS(T_K)``."""

    gamma: float
    K_reg: complex

    def __post_init__(self):
        if not self.gamma > 0:
            raise DomainError("gamma must be positive")
        object.__setattr__(self, "K_reg", as_complex(self.K_reg))


@dataclass(frozen=True)
class GeneralReg:
    """``R = eta (n x S_K) + zeta T1_K div``."""

    eta: complex
    zeta: complex
    K_reg: complex

    def __post_init__(self):
        object.__setattr__(self, "K_reg", as_complex(self.K_reg))
        object.__setattr__(self, "eta", complex(self.eta))
        object.__setattr__(self, "zeta", complex(self.zeta))


Regularizer = Union[CFIE, RegNxS, RegT, PSRegNxS, PSRegT, GeneralReg]


@dataclass(frozen=True)
class OperatorSpec:
    """Operator ``I/2 - K_k + T_k R`` at exterior wavenumber ``k``."""

    k: float
    reg: Regularizer = field(default_factory=CFIE)
    label: str = ""

    def __post_init__(self):
        k = float(self.k)
        if not (k > 0 and math.isfinite(k)):
            raise DomainError(f"exterior wavenumber must be positive, got {self.k}")
        object.__setattr__(self, "k", k)

    @property
    def kind(self) -> str:
        return type(self.reg).__name__


def _kreg_complex(k: float) -> complex:
    return complex(k, 0.4 * k ** (1.0 / 3.0))


PRESETS = {
    "cfie": lambda k: OperatorSpec(k, CFIE(), "cfie"),
    "rega-ik2": lambda k: OperatorSpec(k, RegNxS(k, 0.5j * k), "rega-ik2"),
    "regb-ik": lambda k: OperatorSpec(k, RegT(1.0, 1j * k), "regb-ik"),
    "regt-complex": lambda k: OperatorSpec(k, RegT(2.0, _kreg_complex(k)), "regt-complex"),
    "ps-regt-complex": lambda k: OperatorSpec(k, PSRegT(2.0, _kreg_complex(k)), "ps-regt-complex"),
}


def preset(name: str, k: float) -> OperatorSpec:
    """Named operator at wavenumber ``k``."""
    try:
        return PRESETS[name](k)
    except KeyError:
        raise DomainError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def family_A(k: float, kappa: float, eta: float) -> OperatorSpec:
    """``I/2 - K_k + eta*kappa T_k (n x S_{i kappa})``."""
    return OperatorSpec(k, RegNxS(eta * kappa, 1j * kappa), "A")


def family_B(k: float, kappa: float, xi: float) -> OperatorSpec:
    """``I/2 - K_k - xi T_k T_{i kappa}``."""
    return OperatorSpec(k, RegT(xi, 1j * kappa), "B")


def family_PSA(k: float, kappa: float, eta: float) -> OperatorSpec:
    return OperatorSpec(k, PSRegNxS(eta * kappa, 1j * kappa), "PSA")


def family_PSB(k: float, kappa: float, xi: float) -> OperatorSpec:
    return OperatorSpec(k, PSRegT(xi, 1j * kappa), "PSB")


# -------------------------------------------------------- layer eigenvalues

@dataclass(frozen=True)
class LayerEigs:
    """Arrays over n = 0..n_max of the basic sphere eigenvalues at one K."""

    K: complex
    lam: np.ndarray
    Lam1: np.ndarray
    Lam2: np.ndarray
    jh: np.ndarray

    @property
    def n(self):
        return np.arange(len(self.lam))

    @property
    def s(self) -> np.ndarray:
        return 1j * self.K * self.jh

    @property
    def S1(self) -> np.ndarray:
        n = self.n
        return (self.Lam1 + n * (n + 1) * self.jh) / (1j * self.K)

    @property
    def nxS_curl(self) -> np.ndarray:
        return self.Lam2 / (1j * self.K)

    @property
    def T1div_grad(self) -> np.ndarray:
        return (self.K / 1j) * (self.Lam1 - 1j * self.K * self.S1)


def layer_eigs(K, n_max: int) -> LayerEigs:
    rp = sph_radial_products(K, n_max)
    z = rp.K
    lam = 0.5j * z * (2.0 * rp.jh + z * (rp.jph + rp.jhp))
    return LayerEigs(z, lam, rp.riccati_jp_hp.copy(), -z * z * rp.jh, rp.jh)


def _one(K, n: int) -> LayerEigs:
    if n < 0:
        raise DomainError("mode index must be >= 0")
    return layer_eigs(K, max(int(n), 1))


def lambda_n(K, n: int) -> complex:
    """Eigenvalue ``lambda_n(K)`` of the magnetic field operator."""
    return complex(_one(K, n).lam[n])


def Lambda1_n(K, n: int) -> complex:
    return complex(_one(K, n).Lam1[n])


def Lambda2_n(K, n: int) -> complex:
    return complex(_one(K, n).Lam2[n])


def s_scalar_eig(K, n: int) -> complex:
    """Scalar single-layer eigenvalue ``i K j_n h_n``."""
    return complex(_one(K, n).s[n])


def S1_n(K, n: int) -> complex:
    """Eigenvalue of ``n x S_K`` from the gradient to the curl subspace."""
    if n < 1:
        raise DomainError("S1_n needs n >= 1")
    return complex(_one(K, n).S1[n])


# -------------------------------------------------------------------- DtN

def dtn_log_derivative(k: float, n_max: int) -> np.ndarray:
    """``z_n = k h_n'(k)/h_n(k)`` for n = 0..n_max."""
    z = as_complex(k)
    if z == 0:
        raise DomainError("k must be nonzero")
    n_max = int(n_max)
    _, S = _ratio_chains(z, 0.5, max(n_max, 1), False, 1.0 / z - 1j)
    out = np.empty(n_max + 1, dtype=complex)
    out[0] = -z * S[1]
    for n in range(1, n_max + 1):
        out[n] = z / S[n] - (n + 1)
    return out


def dtn_eig_arrays(k: float, n_max: int):
    """``(Z1, Z2)`` arrays over n = 0..n_max."""
    zn = dtn_log_derivative(k, n_max)
    d = zn + 1.0
    if np.any(d == 0):
        raise DegenerateError("z_n(k) = -1 encountered")
    k = as_complex(k)
    return 1j * d / k, 1j * k / d


def dtn_eigs(k: float, n: int) -> ModalEig:
    """DtN eigenvalues ``(Z_n^(1), Z_n^(2))``."""
    if n < 0:
        raise DomainError("n must be >= 0")
    Z1, Z2 = dtn_eig_arrays(k, max(n, 1))
    return ModalEig(complex(Z1[n]), complex(Z2[n]))


# ---------------------------------------------------------- principal symbol

def _ps_root(K: complex, n):
    """Principal ``(n(n+1) - K^2)^{1/2}``; real K is taken as the limit Im K -> 0+."""
    n = np.asarray(n, dtype=float)
    w = n * (n + 1) - K * K
    w = np.asarray(w, dtype=complex)
    if np.any(w == 0):
        bad = np.atleast_1d(n)[np.atleast_1d(w == 0)]
        raise BranchPointError(f"n(n+1) = K^2 exactly at n={bad.astype(int).tolist()}")
    if K.imag == 0:
        w = w.real + 1j * np.where(w.real < 0, -0.0, 0.0)
    return np.sqrt(w)


def ps_T_arrays(K, n):
    K = as_complex(K)
    if K == 0:
        raise DomainError("K must be nonzero")
    r = _ps_root(K, n)
    return (0.5j / K) * r, (0.5j * K) / r


def ps_T_eigs(K, n: int) -> ModalEig:
    """Principal-symbol factors of ``T_K``: grad->curl and curl->grad."""
    if n < 1:
        raise DomainError("n must be >= 1")
    p1, p2 = ps_T_arrays(K, n)
    return ModalEig(complex(p1), complex(p2))


def ps_nxS_factor(K, n):
    """``(1/2)(n(n+1) - K^2)^{-1/2}``."""
    return 0.5 / _ps_root(as_complex(K), n)


# ----------------------------------------------------------- composition

def regularizer_factors(reg: Regularizer, n_max: int):
    """``(rho_g, rho_c)`` arrays over n = 0..n_max (n = 0 entries meaningless)."""
    n = np.arange(n_max + 1)
    if isinstance(reg, CFIE):
        return -np.ones(n_max + 1, complex), np.ones(n_max + 1, complex)
    if isinstance(reg, (PSRegNxS, PSRegT)):
        nn = n.copy()
        nn[0] = 1  # avoid the n=0 branch point for K=0 limits; entry unused
        if isinstance(reg, PSRegT):
            p1, p2 = ps_T_arrays(reg.K_reg, nn)
            return -reg.gamma * p1, -reg.gamma * p2
        f = ps_nxS_factor(reg.K_reg, nn)
        return -reg.c * f, reg.c * f
    L = layer_eigs(reg.K_reg, n_max)
    if isinstance(reg, RegNxS):
        return reg.c * L.S1, reg.c * L.nxS_curl
    if isinstance(reg, RegT):
        return -reg.gamma * L.Lam1, -reg.gamma * L.Lam2
    if isinstance(reg, GeneralReg):
        return reg.eta * L.S1 + reg.zeta * L.T1div_grad, reg.eta * L.nxS_curl
    raise DomainError(f"unsupported regularizer {reg!r}")


def eig_arrays(spec: OperatorSpec, n_max: int):
    """``(grad, curl)`` eigenvalue arrays for n = 1..n_max."""
    n_max = int(n_max)
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    L = layer_eigs(spec.k, n_max)
    rg, rc = regularizer_factors(spec.reg, n_max)
    grad = 0.5 + L.lam + L.Lam2 * rg
    curl = 0.5 - L.lam + L.Lam1 * rc
    return grad[1:], curl[1:]


def tail_pair(spec: OperatorSpec) -> ModalEig | None:
    """Accumulation values of the eigenvalues as n grows; None for CFIE."""
    k = spec.k
    reg = spec.reg
    if isinstance(reg, (RegT, PSRegT)):
        K = reg.K_reg
        return ModalEig(0.5 + reg.gamma * k / (4 * K), 0.5 + reg.gamma * K / (4 * k))
    if isinstance(reg, (RegNxS, PSRegNxS)):
        return ModalEig(0.5 + 0j, 0.5 + 1j * reg.c / (4 * k))
    if isinstance(reg, GeneralReg):
        return ModalEig(0.5 + 1j * k * reg.zeta / 4, 0.5 + 1j * reg.eta / (4 * k))
    return None


def operator_modal_eig(spec: OperatorSpec, n: int) -> ModalEig:
    """Eigenvalue pair of ``spec`` on mode ``n >= 1``."""
    if n < 1:
        raise DomainError("tangential modes start at n = 1")
    g, c = eig_arrays(spec, n)
    return ModalEig(complex(g[-1]), complex(c[-1]))


@dataclass(frozen=True)
class ModalSpectrum:
    spec: OperatorSpec
    n_max: int
    grad: np.ndarray
    curl: np.ndarray
    tail: ModalEig | None

    def __len__(self):
        return self.n_max

    @property
    def eigs(self) -> list[ModalEig]:
        return [ModalEig(complex(g), complex(c)) for g, c in zip(self.grad, self.curl)]

    def all_values(self, include_tail: bool = True) -> np.ndarray:
        vals = [self.grad, self.curl]
        if include_tail and self.tail is not None:
            vals.append(np.array([self.tail.grad, self.tail.curl]))
        return np.concatenate(vals)


def modal_spectrum(spec: OperatorSpec, n_max: int) -> ModalSpectrum:
    g, c = eig_arrays(spec, n_max)
    g.setflags(write=False)
    c.setflags(write=False)
    return ModalSpectrum(spec, int(n_max), g, c, tail_pair(spec))
