"""Orthonormal spherical harmonics and their surface gradients, pole-safe.

``Y_n^m(theta, phi) = Pbar_n^m(cos theta) e^{i m phi}`` with the Condon-Shortley
phase and unit L2 norm on the sphere.  Tangential fields are returned as
``(theta, phi)`` component pairs.
"""

from __future__ import annotations

import math

import numpy as np


def _legendre_tables(theta: np.ndarray, n_max: int, m: int):
    """Pbar_n^m, dPbar_n^m/dtheta and (for m>=1) Pbar_n^m/sin(theta), n = 0..n_max.

    Rows with n < m are zero.  Only the divided table enters the azimuthal
    derivative, so evaluation at the poles is exact.
    """
    am = abs(m)
    x = np.cos(theta)
    s = np.sin(theta)
    shape = (n_max + 1,) + theta.shape
    P = np.zeros(shape)
    Q = np.zeros(shape)  # Pbar / sin(theta), meaningful for am >= 1
    if am > n_max:
        return P, np.zeros(shape), Q
    # sectoral seed, divided by sin(theta) once
    q = np.full(theta.shape, 1.0 / math.sqrt(4.0 * math.pi))
    if am == 0:
        p = q
    else:
        for j in range(1, am):
            q = -math.sqrt((2.0 * j + 1.0) / (2.0 * j)) * s * q
        q = -math.sqrt((2.0 * am + 1.0) / (2.0 * am)) * q
        p = q * s
    P[am], Q[am] = p, q
    if am + 1 <= n_max:
        f = math.sqrt(2.0 * am + 3.0)
        P[am + 1] = f * x * P[am]
        Q[am + 1] = f * x * Q[am]
    for n in range(am + 2, n_max + 1):
        a = math.sqrt((4.0 * n * n - 1.0) / (n * n - am * am))
        b = math.sqrt(((n - 1.0) ** 2 - am * am) / (4.0 * (n - 1.0) ** 2 - 1.0))
        P[n] = a * (x * P[n - 1] - b * P[n - 2])
        Q[n] = a * (x * Q[n - 1] - b * Q[n - 2])
    dP = np.zeros(shape)
    if am == 0:
        # dPbar_n^0/dtheta = sqrt(n(n+1)) Pbar_n^1
        P1, _, _ = _legendre_tables(theta, n_max, 1)
        for n in range(1, n_max + 1):
            dP[n] = math.sqrt(n * (n + 1.0)) * P1[n]
    else:
        for n in range(am, n_max + 1):
            c = math.sqrt((n * n - am * am) * (2.0 * n + 1.0) / (2.0 * n - 1.0)) if n > am else 0.0
            prev = Q[n - 1] if n - 1 >= am else 0.0
            dP[n] = n * x * Q[n] - c * prev
    if m < 0:
        sign = (-1.0) ** am
        P, dP, Q = sign * P, sign * dP, sign * Q
    return P, dP, Q


def sph_harm_tables(theta, phi, n_max: int, m: int):
    """Return ``Y, gY_theta, gY_phi`` for n = 0..n_max at fixed order ``m``.

    ``gY`` is the surface gradient ``grad_S Y_n^m``.  Arrays have shape
    ``(n_max+1,) + broadcast(theta, phi).shape``.
    """
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    P, dP, Q = _legendre_tables(theta, n_max, m)
    e = np.exp(1j * m * phi)
    Y = P * e
    gth = dP * e
    gph = (1j * m) * Q * e if m != 0 else np.zeros_like(Y)
    return Y, gth, gph


def curl_from_grad(gth, gph):
    """``curl_S Y = grad_S Y x n`` in (theta, phi) components."""
    return gph, -gth


def n_cross(vth, vph):
    """``n x v`` for a tangential field ``v``."""
    return -vph, vth


def tangential_to_cartesian(theta, phi, vth, vph):
    """Cartesian components ``(..., 3)`` of ``v_theta e_theta + v_phi e_phi``."""
    ct, st, cp, sp = np.cos(theta), np.sin(theta), np.cos(phi), np.sin(phi)
    e_th = np.stack([ct * cp, ct * sp, -st], axis=-1)
    e_ph = np.stack([-sp, cp, np.zeros_like(cp)], axis=-1)
    return vth[..., None] * e_th + vph[..., None] * e_ph


def sphere_quadrature(n_theta: int, n_phi: int):
    """Gauss-Legendre in ``cos(theta)`` times uniform azimuth: theta, phi, weights."""
    x, w = np.polynomial.legendre.leggauss(n_theta)
    theta = np.arccos(x)
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    TH, PH = np.meshgrid(theta, phi, indexing="ij")
    W = np.outer(w, np.full(n_phi, 2.0 * math.pi / n_phi))
    return TH, PH, W
