import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import sph_harm_y

from cfiermodal import harmonics as hm
from cfiermodal import sphsolve as S
from cfiermodal.errors import DomainError, OracleFailure, SingularModeError, TruncationError
from cfiermodal.modal3d import OperatorSpec, RegT, preset
from floors import PLANEWAVE_ORACLE_TOL, TRACE_ORACLE_TOL


# ------------------------------------------------------------- harmonics

@pytest.mark.parametrize("m", [-4, -1, 0, 1, 3])
def test_harmonics_match_scipy(m):
    th = np.linspace(0.05, 3.1, 9)
    ph = np.linspace(0.0, 6.0, 9)
    Y, gt, gp = hm.sph_harm_tables(th, ph, 12, m)
    for n in range(abs(m), 13):
        y, d = sph_harm_y(n, m, th, ph, diff_n=1)
        assert np.allclose(Y[n], y, atol=1e-13)
        assert np.allclose(gt[n], d[:, 0], atol=1e-12)
        assert np.allclose(gp[n], d[:, 1] / np.sin(th), atol=1e-12)


def test_harmonics_pole_continuity():
    th = np.array([0.0, 1e-9])
    ph = np.array([0.7, 0.7])
    for m in (-1, 0, 1, 2):
        _, gt, gp = hm.sph_harm_tables(th, ph, 8, m)
        assert np.allclose(gt[:, 0], gt[:, 1], atol=1e-7)
        assert np.allclose(gp[:, 0], gp[:, 1], atol=1e-7)


def test_modal_field_norm_is_l2_norm():
    rng = np.random.default_rng(1)
    N = 6
    f = S.ModalField.zeros(N)
    for n in range(1, N + 1):
        for m in range(-n, n + 1):
            f.grad[n - 1, m + N], f.curl[n - 1, m + N] = rng.normal(size=2) + 1j * rng.normal(size=2)
    TH, PH, W = hm.sphere_quadrature(2 * N + 2, 2 * N + 3)
    vt, vp = f.tangential(TH, PH)
    l2 = math.sqrt(np.sum(W * (abs(vt) ** 2 + abs(vp) ** 2)))
    assert abs(l2 - f.norm()) < 1e-12 * f.norm()


# ------------------------------------------------------------ plane wave

@pytest.mark.parametrize("k", [1.0, 8.0])
def test_planewave_against_quadrature_projection(k):
    N = S.min_n_max(k)
    a = S.planewave_trace(k, N)
    b = S.planewave_projection(k, N)
    scale = max(np.abs(a.grad).max(), np.abs(a.curl).max())
    d = max(np.abs(a.grad - b.grad)[:20].max(), np.abs(a.curl - b.curl)[:20].max())
    assert d / scale <= PLANEWAVE_ORACLE_TOL
    # the oracle sees no content outside m = +-1 either
    mask = np.ones(2 * N + 1, bool)
    mask[[N - 1, N + 1]] = False
    assert np.abs(b.grad[:, mask]).max() < 1e-12 and np.abs(b.curl[:, mask]).max() < 1e-12


def test_planewave_support_and_decay():
    k = 16.0
    f = S.planewave_trace(k)
    assert f.support_m() == {-1, 1}
    mag = np.maximum(np.abs(f.grad), np.abs(f.curl)).max(axis=1)
    n0 = math.ceil(k + 4 * k ** (1 / 3))
    tail = mag[n0:]
    ratios = tail[1:] / tail[:-1]
    assert np.all(np.diff(ratios) < 0)  # super-exponential: ratios keep shrinking
    assert tail[-1] < 1e-12 * mag.max()


def test_planewave_preconditions(monkeypatch):
    with pytest.raises(DomainError):
        S.planewave_trace(8.0, 20)
    with pytest.raises(DomainError):
        S.planewave_trace(0.0)
    monkeypatch.setattr(S, "TRUNC_RTOL", 0.0)
    with pytest.raises(TruncationError):
        S.planewave_trace(8.0)


# ---------------------------------------------------------------- solves

def test_roundtrip_and_zero():
    k = 20.0
    rhs = S.planewave_trace(k)
    for name in ("cfie", "regt-complex", "rega-ik2"):
        spec = preset(name, k)
        x = S.solve_direct(spec, rhs)
        back = S.apply(spec, x)
        d = S.ModalField(rhs.n_max, back.grad - rhs.grad, back.curl - rhs.curl)
        assert d.norm() <= 1e-12 * rhs.norm()
        z = S.solve_direct(spec, S.ModalField.zeros(rhs.n_max))
        assert z.norm() == 0


def test_regt_complex_solution_decays_like_rhs():
    k = 32.0
    rhs = S.planewave_trace(k)
    x = S.solve_direct(preset("regt-complex", k), rhs)
    assert np.isfinite(x.grad).all()
    r = np.abs(x.grad[:, rhs.n_max + 1]) / np.maximum(np.abs(rhs.grad[:, rhs.n_max + 1]), 1e-300)
    assert r.max() < 5 and r.min() > 0.2


def test_singular_mode_error(monkeypatch):
    real = S.eig_arrays

    def with_zero(spec, n_max):
        g, c = real(spec, n_max)
        g = g.copy()
        g[2] = 0.0
        return g, c

    monkeypatch.setattr(S, "eig_arrays", with_zero)
    with pytest.raises(SingularModeError) as ei:
        S.solve_direct(preset("cfie", 8.0), S.planewave_trace(8.0))
    assert ("grad", 3) in ei.value.modes


@settings(max_examples=25, deadline=None)
@given(re=st.floats(-5, 5), im=st.floats(-5, 5))
def test_linearity(re, im):
    a = complex(re, im)
    if abs(a) < 1e-3:
        a = 1.0
    k = 8.0
    spec = preset("regb-ik", k)
    rhs = S.planewave_trace(k)
    x1 = S.solve_direct(spec, rhs.scaled(a))
    x2 = S.solve_direct(spec, rhs).scaled(a)
    d = S.ModalField(rhs.n_max, x1.grad - x2.grad, x1.curl - x2.curl)
    assert d.norm() <= 1e-12 * x2.norm()


# ------------------------------------------------------------------ GMRES

def test_gmres_identity_one_step():
    b = np.random.default_rng(0).normal(size=50) + 0j
    x, st_ = S.gmres(lambda v: v, b)
    assert st_.iterations == 1 and st_.converged and np.allclose(x, b)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), scale=st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3))
def test_gmres_scale_invariance(seed, scale):
    rng = np.random.default_rng(seed)
    n = 60
    d = 1 + 0.8 * (rng.normal(size=n) + 1j * rng.normal(size=n))
    b = rng.normal(size=n) + 1j * rng.normal(size=n)
    _, s1 = S.gmres(lambda v: d * v, b, 1e-6)
    _, s2 = S.gmres(lambda v: scale * d * v, scale * b, 1e-6)
    assert s1.iterations == s2.iterations


def test_gmres_matches_direct_and_stats():
    k = 24.0
    rhs = S.planewave_trace(k)
    for name in ("cfie", "regt-complex"):
        spec = preset(name, k)
        xg, st_ = S.solve_gmres(spec, rhs)
        xd = S.solve_direct(spec, rhs)
        d = S.ModalField(rhs.n_max, xg.grad - xd.grad, xg.curl - xd.curl)
        assert st_.converged and st_.final_relative_residual <= 1e-4
        assert d.norm() <= 10 * 1e-4 * xd.norm()
        assert xg.support_m() == {-1, 1}


def test_gmres_nonconvergence_flagged():
    k = 64.0
    _, st_ = S.solve_gmres(preset("cfie", k), S.planewave_trace(k), max_iter=3)
    assert st_.iterations == 3 and not st_.converged and st_.final_relative_residual > 1e-4


def test_gmres_rejects_zero_rhs():
    with pytest.raises(DomainError):
        S.solve_gmres(preset("cfie", 8.0), S.ModalField.zeros(40))


# ----------------------------------------------------- oracle and fields

def test_trace_oracle_passes():
    assert S.trace_oracle() <= TRACE_ORACLE_TOL


def test_trace_oracle_detects_wrong_factor(monkeypatch):
    real = S._field_formula

    def flipped(kind, n, m, k, x):
        v = real(kind, n, m, k, x)
        return -v if kind == ("E", "grad") else v

    monkeypatch.setattr(S, "_field_formula", flipped)
    S.trace_oracle.cache_clear()
    try:
        with pytest.raises(OracleFailure):
            S.trace_oracle()
    finally:
        S.trace_oracle.cache_clear()


def test_trace_of_density_equals_operator_action():
    # the radial trace factors reproduce the modal eigenvalues
    k = 6.0
    N = 40
    rng = np.random.default_rng(3)
    for name in ("cfie", "regt-complex", "rega-ik2", "ps-regt-complex"):
        spec = preset(name, k)
        x = S.ModalField(N, rng.normal(size=(N, 2 * N + 1)), rng.normal(size=(N, 2 * N + 1)), spec)
        tr = S.exterior_trace(S.density_field(x, k))
        ax = S.apply(spec, x)
        d = S.ModalField(N, tr.grad - ax.grad, tr.curl - ax.curl)
        assert d.norm() <= 1e-12 * ax.norm()


def test_boundary_residuals():
    k = 8.0
    ref = S.mie_reference(k)
    assert S.boundary_residual(ref, k) <= 1e-10
    for name in sorted(("cfie", "regt-complex", "rega-ik2", "regb-ik", "ps-regt-complex")):
        x = S.solve_direct(preset(name, k), S.planewave_trace(k))
        assert S.boundary_residual(x, k) <= 1e-6
        xg, st_ = S.solve_gmres(preset(name, k), S.planewave_trace(k))
        assert S.boundary_residual(xg, k) <= 10 * 1e-4


def test_zero_incident_residual():
    k = 8.0
    z = S.ModalField.zeros(S.solve_n_max(k), preset("cfie", k))
    ext = S.density_field(z, k)
    assert S.exterior_trace(ext).norm() == 0


def test_far_field_errors():
    k = 8.0
    rhs = S.planewave_trace(k)
    ref = S.mie_reference(k)
    assert S.far_field_error(ref, k, 24) == 0.0
    x = S.solve_direct(preset("regt-complex", k), rhs)
    assert S.far_field_error(x, k, 24) <= 1e-8
    xg, _ = S.solve_gmres(preset("regt-complex", k), rhs)
    assert S.far_field_error(xg, k, 24) <= 1e-3


def test_far_field_transverse_and_optical_theorem():
    k = 8.0
    ref = S.mie_reference(k)
    TH, PH = S.direction_grid(10)
    E = S.far_field(ref, k, TH, PH)
    rhat = np.stack([np.sin(TH) * np.cos(PH), np.sin(TH) * np.sin(PH), np.cos(TH)], -1)
    assert np.abs(np.sum(E * rhat, -1)).max() < 1e-12 * np.abs(E).max()
    assert S.optical_theorem_defect(ref) <= 1e-6


def test_far_field_matches_large_radius_field():
    # E_s(r) r e^{-ikr} approaches E_inf at large r
    k = 3.0
    ref = S.mie_reference(k, 40)
    th, ph = 1.1, 0.4
    Einf = S.far_field(ref, k, np.array(th), np.array(ph))
    r = 4000.0
    from scipy.special import spherical_jn, spherical_yn

    vt = vp = 0j
    N = ref.n_max
    for m in (-1, 1):
        _, gt, gp = hm.sph_harm_tables(np.array(th), np.array(ph), N, m)
        ct, cp = hm.curl_from_grad(gt, gp)
        for n in range(1, N + 1):
            x = k * r
            h = spherical_jn(n, x) + 1j * spherical_yn(n, x)
            zh = h + x * (spherical_jn(n, x, True) + 1j * spherical_yn(n, x, True))
            aM, aN = ref.aM[n - 1, m + N], ref.aN[n - 1, m + N]
            vt += aM * h * ct[n] + aN * zh / r * gt[n]
            vp += aM * h * cp[n] + aN * zh / r * gp[n]
    near = hm.tangential_to_cartesian(np.array(th), np.array(ph), np.array(vt), np.array(vp))
    near = near * r * np.exp(-1j * k * r)
    assert np.linalg.norm(near - Einf) < 1e-3 * np.linalg.norm(Einf)


def test_density_needs_operator():
    with pytest.raises(DomainError):
        S.density_field(S.planewave_trace(8.0), 8.0)


def test_iteration_trend_small():
    its = {}
    for name in ("cfie", "rega-ik2", "regt-complex"):
        its[name] = [S.solve_gmres(preset(name, k), S.planewave_trace(k))[1].iterations for k in (16.0, 32.0)]
    for i in range(2):
        assert its["regt-complex"][i] < min(its["cfie"][i], its["rega-ik2"][i])


def test_custom_spec_roundtrip():
    spec = OperatorSpec(10.0, RegT(0.5, 3 + 2j))
    rhs = S.planewave_trace(10.0)
    x, st_ = S.solve_gmres(spec, rhs, tol=1e-10)
    assert st_.converged and S.boundary_residual(x, 10.0) < 1e-9
