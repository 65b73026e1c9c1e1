"""Plane-wave scattering by the unit PEC sphere, solved mode by mode.

Densities live in the orthonormal tangential basis
``g_nm = grad_S Y_nm / sqrt(n(n+1))`` and ``c_nm = curl_S Y_nm / sqrt(n(n+1))``.
Scattered fields are stored as multipole amplitudes on

    M_nm = h_n(kr) curl_S Y_nm
    N_nm = curl M_nm = n(n+1) h_n(kr)/r Y_nm r_hat + [z h_n]'(kr)/r grad_S Y_nm

so that the exterior field of a density follows from radial factors
alone.  Those factors are checked against direct quadrature of the layer
potentials (:func:`trace_oracle`) before :func:`boundary_residual` uses them.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import spherical_jn, spherical_yn

from . import harmonics as hm
from .errors import DomainError, OracleFailure, SingularModeError, TruncationError
from .modal3d import OperatorSpec, eig_arrays, regularizer_factors

GMRES_TOL = 1e-4
GMRES_MAX_ITER = 500
SINGULAR_RTOL = 1e-13
TRUNC_RTOL = 1e-12
ORACLE_TOL = 1e-6


def solve_n_max(k: float) -> int:
    """Default truncation for solves."""
    return math.ceil(k + 4.0 * k ** (1.0 / 3.0)) + 30


def min_n_max(k: float) -> int:
    return max(math.ceil(k + 4.0 * k ** (1.0 / 3.0)) + 20, 40)


# ------------------------------------------------------------------ types

@dataclass(frozen=True)
class ModalField:
    """Tangential field coefficients; row ``n-1``, column ``m + n_max``.

    ``spec`` records the operator whose density this is (``None`` for data
    such as a right-hand side).
    """

    n_max: int
    grad: np.ndarray
    curl: np.ndarray
    spec: OperatorSpec | None = None

    def __post_init__(self):
        shape = (self.n_max, 2 * self.n_max + 1)
        g = np.asarray(self.grad, complex).reshape(shape)
        c = np.asarray(self.curl, complex).reshape(shape)
        if not (np.isfinite(g).all() and np.isfinite(c).all()):
            raise DomainError("non-finite modal coefficients")
        object.__setattr__(self, "grad", g)
        object.__setattr__(self, "curl", c)

    @classmethod
    def zeros(cls, n_max: int, spec=None) -> "ModalField":
        z = np.zeros((n_max, 2 * n_max + 1), complex)
        return cls(n_max, z, z.copy(), spec)

    def norm(self) -> float:
        return float(math.sqrt(np.vdot(self.grad, self.grad).real + np.vdot(self.curl, self.curl).real))

    def scaled(self, a: complex) -> "ModalField":
        return ModalField(self.n_max, a * self.grad, a * self.curl, self.spec)

    def coeff(self, n: int, m: int):
        return self.grad[n - 1, m + self.n_max], self.curl[n - 1, m + self.n_max]

    def support_m(self) -> set[int]:
        nz = (np.abs(self.grad) > 0) | (np.abs(self.curl) > 0)
        return {int(j) - self.n_max for j in np.nonzero(nz.any(axis=0))[0]}

    def flat(self) -> np.ndarray:
        return np.concatenate([self.grad.ravel(), self.curl.ravel()])

    @classmethod
    def from_flat(cls, n_max, v, spec=None) -> "ModalField":
        h = v.size // 2
        return cls(n_max, v[:h], v[h:], spec)

    def tangential(self, theta, phi):
        """``(v_theta, v_phi)`` of the represented field on the unit sphere."""
        vt = np.zeros(np.broadcast(theta, phi).shape, complex)
        vp = vt.copy()
        N = self.n_max
        for m in range(-N, N + 1):
            col = m + N
            g, c = self.grad[:, col], self.curl[:, col]
            if not (g.any() or c.any()):
                continue
            _, gt, gp = hm.sph_harm_tables(theta, phi, N, m)
            ct, cph = hm.curl_from_grad(gt, gp)
            for n in range(max(1, abs(m)), N + 1):
                s = 1.0 / math.sqrt(n * (n + 1.0))
                vt += s * (g[n - 1] * gt[n] + c[n - 1] * ct[n])
                vp += s * (g[n - 1] * gp[n] + c[n - 1] * cph[n])
        return vt, vp


@dataclass(frozen=True)
class SolveStats:
    iterations: int
    final_relative_residual: float
    converged: bool


@dataclass(frozen=True)
class ExteriorField:
    """Scattered field ``sum aM_nm M_nm + aN_nm N_nm`` (same index layout)."""

    k: float
    n_max: int
    aM: np.ndarray
    aN: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)


# ------------------------------------------------------------ radial data

def _radial(k: float, n_max: int, r: float = 1.0):
    """``j_n(k), [z j_n]'(k), h_n(kr), [z h_n]'(kr)`` for n = 1..n_max (scipy path)."""
    n = np.arange(1, n_max + 1)
    j = spherical_jn(n, k)
    zj = j + k * spherical_jn(n, k, derivative=True)
    x = k * r
    h = spherical_jn(n, x) + 1j * spherical_yn(n, x)
    hp = spherical_jn(n, x, derivative=True) + 1j * spherical_yn(n, x, derivative=True)
    return j, zj, h, h + x * hp


def _sqrt_nn(n_max):
    n = np.arange(1, n_max + 1)
    return np.sqrt(n * (n + 1.0))


# ------------------------------------------------------------- plane wave

def planewave_trace(k: float, n_max: int | None = None, *, check: bool = True) -> ModalField:
    """Coefficients of ``-n x E_inc`` for ``E_inc = x_hat exp(ikz)``.

    Only ``m = +-1`` is populated.  Raises :class:`TruncationError` when the
    last retained mode still carries more than ``1e-12`` of the peak.
    """
    k = float(k)
    if not (k > 0 and math.isfinite(k)):
        raise DomainError("k must be positive")
    n_max = solve_n_max(k) if n_max is None else int(n_max)
    if check and n_max < min_n_max(k):
        raise DomainError(f"n_max={n_max} below the minimum {min_n_max(k)} for k={k}")
    n = np.arange(1, n_max + 1)
    j, zj, _, _ = _radial(k, n_max)
    amp = 0.5 * (1j ** (n + 1)) * np.sqrt(4.0 * math.pi * (2 * n + 1))
    out = ModalField.zeros(n_max)
    for m in (-1, 1):
        out.grad[:, m + n_max] = -amp * j
        out.curl[:, m + n_max] = m * amp * zj / k
    if check:
        mag = np.maximum(np.abs(out.grad), np.abs(out.curl)).max(axis=1)
        if mag[-1] > TRUNC_RTOL * mag.max():
            raise TruncationError(f"mode n_max={n_max} carries {mag[-1] / mag.max():.3e} of the peak at k={k}")
    return out


def planewave_projection(k: float, n_max: int, n_theta: int | None = None,
                         n_phi: int | None = None) -> ModalField:
    """Quadrature projection of ``-n x E_inc`` onto the basis (oracle path)."""
    n_theta = 2 * n_max if n_theta is None else n_theta
    n_phi = 2 * n_max + 1 if n_phi is None else n_phi
    TH, PH, W = hm.sphere_quadrature(n_theta, n_phi)
    ph = np.exp(1j * k * np.cos(TH))
    # x_hat in (theta, phi) components
    ex_t, ex_p = np.cos(TH) * np.cos(PH) * ph, -np.sin(PH) * ph
    ft, fp = hm.n_cross(ex_t, ex_p)
    ft, fp = -ft, -fp
    out = ModalField.zeros(n_max)
    for m in range(-n_max, n_max + 1):
        _, gt, gp = hm.sph_harm_tables(TH, PH, n_max, m)
        ct, cp = hm.curl_from_grad(gt, gp)
        for n in range(max(1, abs(m)), n_max + 1):
            s = 1.0 / math.sqrt(n * (n + 1.0))
            out.grad[n - 1, m + n_max] = s * np.sum(W * (np.conj(gt[n]) * ft + np.conj(gp[n]) * fp))
            out.curl[n - 1, m + n_max] = s * np.sum(W * (np.conj(ct[n]) * ft + np.conj(cp[n]) * fp))
    return out


# ------------------------------------------------------------------ solves

def _eigs(spec: OperatorSpec, n_max: int):
    g, c = eig_arrays(spec, n_max)
    return g[:, None], c[:, None]


def apply(spec: OperatorSpec, x: ModalField) -> ModalField:
    """Action of ``I/2 - K_k + T_k R`` on a density."""
    g, c = _eigs(spec, x.n_max)
    return ModalField(x.n_max, g * x.grad, c * x.curl)


def solve_direct(spec: OperatorSpec, rhs: ModalField) -> ModalField:
    g, c = eig_arrays(spec, rhs.n_max)
    a = np.abs(np.concatenate([g, c]))
    bad = np.nonzero(a < SINGULAR_RTOL * a.max())[0]
    if bad.size:
        N = rhs.n_max
        modes = [("grad" if i < N else "curl", int(i % N) + 1) for i in bad]
        raise SingularModeError(f"{len(modes)} near-zero modal eigenvalues", modes)
    return ModalField(rhs.n_max, rhs.grad / g[:, None], rhs.curl / c[:, None], spec)


def gmres(matvec, b: np.ndarray, tol: float = GMRES_TOL, max_iter: int = GMRES_MAX_ITER):
    """Unrestarted GMRES from a zero initial guess.

    Arnoldi with modified Gram-Schmidt plus one reorthogonalization sweep,
    Givens rotations for the least-squares update.  The iteration stops on
    the recurrence residual and the result is confirmed with the true one.
    """
    b = np.asarray(b, complex)
    beta = float(np.linalg.norm(b))
    if beta == 0:
        raise DomainError("GMRES needs a nonzero right-hand side")
    n = b.size
    m_cap = min(max_iter, n)
    V = np.zeros((m_cap + 1, n), complex)
    H = np.zeros((m_cap + 1, m_cap), complex)
    cs = np.zeros(m_cap, complex)
    sn = np.zeros(m_cap, complex)
    g = np.zeros(m_cap + 1, complex)
    g[0] = beta
    V[0] = b / beta
    it, rel = 0, 1.0
    for j in range(m_cap):
        w = matvec(V[j])
        for _ in range(2):
            for i in range(j + 1):
                h = np.vdot(V[i], w)
                H[i, j] += h
                w = w - h * V[i]
        hn = float(np.linalg.norm(w))
        H[j + 1, j] = hn
        for i in range(j):
            t = cs[i] * H[i, j] + sn[i] * H[i + 1, j]
            H[i + 1, j] = -np.conj(sn[i]) * H[i, j] + np.conj(cs[i]) * H[i + 1, j]
            H[i, j] = t
        a, c_ = H[j, j], H[j + 1, j]
        r = math.hypot(abs(a), abs(c_))
        if r == 0:
            cs[j], sn[j] = 1.0, 0.0
        else:
            cs[j] = abs(a) / r if a != 0 else 0.0
            sn[j] = (a / abs(a)) * np.conj(c_) / r if a != 0 else 1.0
        H[j, j] = cs[j] * a + sn[j] * c_
        H[j + 1, j] = 0.0
        g[j + 1] = -np.conj(sn[j]) * g[j]
        g[j] = cs[j] * g[j]
        it = j + 1
        rel = abs(g[j + 1]) / beta
        if rel <= tol or hn <= 1e-14 * beta:
            break
        V[j + 1] = w / hn
    y = np.linalg.solve(np.triu(H[:it, :it]), g[:it]) if it else np.zeros(0)
    x = V[:it].T @ y
    true_rel = float(np.linalg.norm(b - matvec(x)) / beta)
    return x, SolveStats(it, true_rel, true_rel <= tol)


def solve_gmres(spec: OperatorSpec, rhs: ModalField, tol: float = GMRES_TOL,
                max_iter: int = GMRES_MAX_ITER) -> tuple[ModalField, SolveStats]:
    """GMRES on the diagonal modal system.

    The Krylov space of a diagonal operator never leaves the support of the
    right-hand side, so the iteration runs on those entries only; the
    iterates are identical to those of the full-length computation.
    """
    g, c = eig_arrays(spec, rhs.n_max)
    N = rhs.n_max
    diag = np.concatenate([np.repeat(g, 2 * N + 1), np.repeat(c, 2 * N + 1)])
    b = rhs.flat()
    sup = np.nonzero(b)[0]
    if sup.size == 0:
        raise DomainError("GMRES needs a nonzero right-hand side")
    d = diag[sup]
    xs, stats = gmres(lambda v: d * v, b[sup], tol, max_iter)
    x = np.zeros_like(b)
    x[sup] = xs
    return ModalField.from_flat(N, x, spec), stats


# ----------------------------------------------------- exterior fields

def density_field(sol: ModalField, k: float) -> ExteriorField:
    """Multipole amplitudes of ``curl A[a] + (i/k) curl curl A[R a]``."""
    if sol.spec is None:
        raise DomainError("density carries no operator; solve first")
    N = sol.n_max
    j, zj, _, _ = _radial(k, N)
    rg, rc = regularizer_factors(sol.spec.reg, N)
    rg, rc = rg[1:], rc[1:]
    s = _sqrt_nn(N)
    fM = (1j * k * zj - k * k * j * rg) / s
    fN = (1j * k * j - zj * rc) / s
    return ExteriorField(k, N, fM[:, None] * sol.grad, fN[:, None] * sol.curl, {"source": sol.spec.kind})


def mie_reference(k: float, n_max: int | None = None) -> ExteriorField:
    """Scattered PEC field from the standard modal reflection coefficients."""
    k = float(k)
    n_max = solve_n_max(k) if n_max is None else int(n_max)
    rhs = planewave_trace(k, n_max, check=False)
    _, _, h, zh = _radial(k, n_max)
    s = _sqrt_nn(n_max)[:, None]
    aM = rhs.grad / (s * h[:, None])
    aN = -rhs.curl / (s * zh[:, None])
    return ExteriorField(k, n_max, aM, aN, {"source": "mie"})


def _as_exterior(x, k) -> ExteriorField:
    return x if isinstance(x, ExteriorField) else density_field(x, k)


def exterior_trace(ext: ExteriorField) -> ModalField:
    """``n x E_s`` on the unit sphere from the multipole amplitudes."""
    _, _, h, zh = _radial(ext.k, ext.n_max)
    s = _sqrt_nn(ext.n_max)[:, None]
    return ModalField(ext.n_max, s * h[:, None] * ext.aM, -s * zh[:, None] * ext.aN)


def boundary_residual(solution, k: float) -> float:
    """Relative L2 size of ``n x (E_s + E_inc)`` on the sphere.

    *solution* is a solved density or an :class:`ExteriorField`.  The
    radial trace factors are used only after :func:`trace_oracle` passes.
    """
    trace_oracle()
    ext = _as_exterior(solution, float(k))
    rhs = planewave_trace(ext.k, ext.n_max, check=False)
    tr = exterior_trace(ext)
    d = ModalField(ext.n_max, tr.grad - rhs.grad, tr.curl - rhs.curl)
    nb = rhs.norm()
    return 0.0 if nb == 0 else d.norm() / nb


def far_field(solution, k: float, theta, phi) -> np.ndarray:
    """``E_inf`` (Cartesian, last axis) with ``E_s ~ exp(ikr)/r E_inf``."""
    ext = _as_exterior(solution, float(k))
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    N = ext.n_max
    n = np.arange(1, N + 1)
    cm = ((-1j) ** (n + 1) / ext.k)[:, None] * ext.aM
    cn = ((-1j) ** n)[:, None] * ext.aN
    vt = np.zeros(theta.shape, complex)
    vp = vt.copy()
    for m in range(-N, N + 1):
        col = m + N
        a, b = cm[:, col], cn[:, col]
        if not (a.any() or b.any()):
            continue
        _, gt, gp = hm.sph_harm_tables(theta, phi, N, m)
        ct, cp = hm.curl_from_grad(gt, gp)
        for nn in range(max(1, abs(m)), N + 1):
            vt += a[nn - 1] * ct[nn] + b[nn - 1] * gt[nn]
            vp += a[nn - 1] * cp[nn] + b[nn - 1] * gp[nn]
    return hm.tangential_to_cartesian(theta, phi, vt, vp)


def direction_grid(n_dirs: int):
    x, _ = np.polynomial.legendre.leggauss(n_dirs)
    theta = np.arccos(x)
    phi = math.pi * np.arange(2 * n_dirs) / n_dirs
    return np.meshgrid(theta, phi, indexing="ij")


def far_field_error(solution, k: float, n_dirs: int = 32, reference: ExteriorField | None = None) -> float:
    """``max|E_inf - E_inf_ref| / max|E_inf_ref|`` over ``n_dirs x 2 n_dirs`` directions."""
    ext = _as_exterior(solution, float(k))
    ref = mie_reference(ext.k, ext.n_max) if reference is None else reference
    TH, PH = direction_grid(int(n_dirs))
    e = far_field(ext, ext.k, TH, PH)
    r = far_field(ref, ref.k, TH, PH)
    return float(np.linalg.norm(e - r, axis=-1).max() / np.linalg.norm(r, axis=-1).max())


def optical_theorem_defect(ext: ExteriorField, n_quad: int | None = None) -> float:
    """Relative gap between extinction and scattering cross sections."""
    k = ext.k
    fwd = far_field(ext, k, np.array(0.0), np.array(0.0))
    sigma_ext = 4.0 * math.pi / k * fwd[0].imag
    nq = n_quad or ext.n_max + 10
    TH, PH, W = hm.sphere_quadrature(nq, 2 * nq + 1)
    E = far_field(ext, k, TH, PH)
    sigma_sca = float(np.sum(W * np.sum(np.abs(E) ** 2, axis=-1)))
    return abs(sigma_ext - sigma_sca) / sigma_sca


# ----------------------------------------------------------- trace oracle

def _field_formula(kind: str, n: int, m: int, k: float, x: np.ndarray) -> np.ndarray:
    """Closed form of ``curl A[b]`` and ``(i/k) curl curl A[b]`` for ``b`` = grad/curl Y_nm."""
    r = float(np.linalg.norm(x))
    th = math.acos(x[2] / r)
    ph = math.atan2(x[1], x[0])
    Y, gt, gp = hm.sph_harm_tables(np.array(th), np.array(ph), n, m)
    Y, gt, gp = Y[n], gt[n], gp[n]
    ct, cp = hm.curl_from_grad(gt, gp)
    kr = k * r
    h = spherical_jn(n, kr) + 1j * spherical_yn(n, kr)
    zh = h + kr * (spherical_jn(n, kr, True) + 1j * spherical_yn(n, kr, True))
    j = spherical_jn(n, k)
    zj = j + k * spherical_jn(n, k, True)
    Mv = hm.tangential_to_cartesian(np.array(th), np.array(ph), h * ct, h * cp)
    Nt = hm.tangential_to_cartesian(np.array(th), np.array(ph), zh / r * gt, zh / r * gp)
    rhat = x / r
    Nv = Nt + n * (n + 1) * h / r * Y * rhat
    return {
        ("M", "grad"): 1j * k * zj * Mv,
        ("M", "curl"): 1j * k * j * Nv,
        ("E", "grad"): -zj * Nv,
        ("E", "curl"): -k * k * j * Mv,
    }[kind]


def _field_quadrature(n: int, m: int, k: float, x: np.ndarray, n_theta: int = 96, n_phi: int = 192):
    TH, PH, W = hm.sphere_quadrature(n_theta, n_phi)
    _, gt, gp = hm.sph_harm_tables(TH, PH, n, m)
    ct, cp = hm.curl_from_grad(gt[n], gp[n])
    dens = {"grad": hm.tangential_to_cartesian(TH, PH, gt[n], gp[n]),
            "curl": hm.tangential_to_cartesian(TH, PH, ct, cp)}
    y = np.stack([np.sin(TH) * np.cos(PH), np.sin(TH) * np.sin(PH), np.cos(TH)], axis=-1)
    Rv = x - y
    R = np.linalg.norm(Rv, axis=-1)
    Rh = Rv / R[..., None]
    G = np.exp(1j * k * R) / (4.0 * math.pi * R)
    g1 = G * (1j * k - 1.0 / R)
    g2 = G * ((1j * k - 1.0 / R) ** 2 + 1.0 / R ** 2)
    out = {}
    for name, a in dens.items():
        grad_G = g1[..., None] * Rh
        Ma = np.sum(W[..., None] * np.cross(grad_G, a), axis=(0, 1))
        ra = np.sum(Rh * a, axis=-1)
        hess_a = g2[..., None] * ra[..., None] * Rh + (g1 / R)[..., None] * (a - ra[..., None] * Rh)
        Ea = np.sum(W[..., None] * (k * k * G[..., None] * a + hess_a), axis=(0, 1))
        out[("M", name)] = Ma
        out[("E", name)] = 1j / k * Ea
    return out


ORACLE_POINTS = (
    np.array([0.55, 0.35, 1.05]),                       # r = 1.25
    1.5 * np.array([-0.48, 0.6, -0.64]),                # r = 1.5
    2.0 * np.array([0.8, -0.36, 0.48]),                 # r = 2
)
ORACLE_MODES = ((1, 0), (1, 1), (2, 1), (2, -2), (3, 2), (3, -1))


@functools.lru_cache(maxsize=1)
def trace_oracle(k: float = 1.0) -> float:
    """Compare closed-form layer fields with quadrature off the surface.

    Returns the worst relative mismatch; raises :class:`OracleFailure`
    above ``1e-6``.  The result is cached.
    """
    worst = 0.0
    for x in ORACLE_POINTS:
        for n, m in ORACLE_MODES:
            q = _field_quadrature(n, m, k, x)
            for key, v in q.items():
                f = _field_formula(key, n, m, k, x)
                worst = max(worst, float(np.linalg.norm(v - f) / np.linalg.norm(f)))
    if not worst <= ORACLE_TOL:
        raise OracleFailure(f"layer-trace factors disagree with quadrature: {worst:.3e}")
    return worst
