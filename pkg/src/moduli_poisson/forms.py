"""Invariant differential forms on G, g and on adjoint orbits.

Tangent vectors at a group element g are handled right-trivialised: a tangent
xi in T_g G is represented by u = xi g^-1 in g, given by its coordinates in
the orthonormal basis of the algebra.
"""
from __future__ import annotations

import numpy as np
from scipy.integrate import quad_vec

from . import conventions as cv
from .errors import QuadratureFailure
from .lie_core import LieGroup


def right_triv(G: LieGroup, g, xi) -> np.ndarray:
    """Coordinates of xi g^-1 for an ambient tangent matrix xi at g."""
    return G.vec(np.asarray(xi) @ np.asarray(g).conj().T)


def mc_two_form_vec(G, Ad_a_inv, t1, t2, scale=None) -> float:
    """Omega on G x G in right-trivialised coordinates.

    ``t1 = (u1, v1)`` and ``t2 = (u2, v2)``; ``Ad_a_inv`` is the matrix of
    Ad(a^-1) at the base point (a, b).
    """
    k = cv.MC_SCALE if scale is None else scale
    (u1, v1), (u2, v2) = t1, t2
    return float(k * ((Ad_a_inv @ u1) @ v2 - (Ad_a_inv @ u2) @ v1))


def mc_two_form(G: LieGroup, a, b, t1, t2, scale=None) -> float:
    """Omega at (a, b): the left Maurer-Cartan form on the first factor paired
    with the right Maurer-Cartan form on the second, antisymmetrised.

    ``t1 = (xi1, eta1)`` and ``t2 = (xi2, eta2)`` are ambient tangent matrices
    at a and b respectively.
    """
    a, b = np.asarray(a), np.asarray(b)
    ainv, binv = a.conj().T, b.conj().T
    k = cv.MC_SCALE if scale is None else scale
    (x1, e1), (x2, e2) = t1, t2
    return k * (G.pair(ainv @ x1, e2 @ binv) - G.pair(ainv @ x2, e1 @ binv))


def mc_gram(G, Ad_a_inv, scale=None) -> np.ndarray:
    """Gram matrix of Omega on (u, v) coordinates stacked as [u; v]."""
    k = cv.MC_SCALE if scale is None else scale
    d = G.dim
    W = np.zeros((2 * d, 2 * d))
    W[:d, d:] = k * Ad_a_inv.T
    W[d:, :d] = -k * Ad_a_inv
    return W


def lambda_vec(G, u1, u2, u3, scale=None) -> float:
    k = cv.LAMBDA_SCALE if scale is None else scale
    return float(k * u1 @ (G.ad_matrix_vec(u2) @ u3))


def lambda_form(G: LieGroup, g, xi, eta, zeta, scale=None) -> float:
    """The bi-invariant 3-form at g on ambient tangent matrices."""
    gi = np.asarray(g).conj().T
    a, b, c = gi @ xi, gi @ eta, gi @ zeta
    k = cv.LAMBDA_SCALE if scale is None else scale
    return k * G.pair(a, G.ad_bracket(b, c))


def beta_matrix(G: LieGroup, x, scale=None, epsabs=1e-10) -> np.ndarray:
    """Matrix B with beta_X(Y, Z) = vec(Y) . B . vec(Z).

    beta is the image of exp^* lambda under the radial homotopy operator of
    the star-shaped set O, so d beta = exp^* lambda there.
    """
    k = cv.LAMBDA_SCALE if scale is None else scale
    xv = G.vec(x)
    adx = G.ad_matrix_vec(xv)

    def integrand(t):
        R = G.dexp_right(t * G.mat(xv))
        # lambda(X, RY, RZ) = k <X, [RY, RZ]> = -k (RY) . adX . (RZ)
        return t * t * (-k) * (R.T @ adx @ R)

    val, err = quad_vec(integrand, 0.0, 1.0, epsabs=epsabs, epsrel=1e-12)
    if err > 1e-9:
        raise QuadratureFailure(f"beta quadrature error estimate {err:.3g}")
    return val


def beta_form(G: LieGroup, x, y, z, scale=None) -> float:
    return float(G.vec(y) @ beta_matrix(G, x, scale) @ G.vec(z))


def beta_matrix_closed(G: LieGroup, x, scale=None) -> np.ndarray:
    """Closed form -k * ad_X * h(ad_X) with h(s) = 2 (sinh s - s) / s^3.

    Used as an independent oracle for the quadrature.
    """
    k = cv.LAMBDA_SCALE if scale is None else scale

    def h(z):
        z = np.asarray(z, dtype=complex)
        small = np.abs(z) < 1e-3
        safe = np.where(small, 1.0, z)
        series = 1.0 / 3.0 + z * z / 60.0
        return np.where(small, series, 2 * (np.sinh(safe) - safe) / safe ** 3)

    adx = G.ad_matrix(x)
    return -k * adx @ G._ad_function(x, h)


# -- adjoint orbits ---------------------------------------------------------


def orbit_preimage(G: LieGroup, x, u) -> np.ndarray:
    """Some a with [a, X] = u (coordinates), u tangent to the orbit of X."""
    adx = G.ad_matrix(x)
    return -np.linalg.pinv(adx, rcond=1e-10) @ u


def kirillov_form(G: LieGroup, x, u, v, sign=None) -> float:
    """Kirillov form at X on orbit tangents u = [a, X], v = [b, X] (coordinates)."""
    s = cv.KIRILLOV_SIGN if sign is None else sign
    a = orbit_preimage(G, x, u)
    b = orbit_preimage(G, x, v)
    xv = G.vec(x)
    return float(s * xv @ (G.ad_matrix_vec(a) @ b))


def kirillov_matrix(G: LieGroup, x, sign=None) -> np.ndarray:
    """Gram matrix of the Kirillov form on orbit tangent coordinates."""
    s = cv.KIRILLOV_SIGN if sign is None else sign
    adx = G.ad_matrix(x)
    P = -np.linalg.pinv(adx, rcond=1e-10)
    # <X, [a, b]> = -a . adX . b
    return s * P.T @ (-adx) @ P


def tau_matrix(G: LieGroup, z, scale=None, rcond=1e-10) -> np.ndarray:
    """Gram matrix of the 2-form tau on the conjugacy class of z.

    A tangent at z is right-trivialised as u = a - Ad(z) a; the value is
    tau(u_a, u_b) = -k (<Ad(z) a, b> - <Ad(z) b, a>).
    """
    k = cv.MC_SCALE if scale is None else scale
    A = G.Ad_matrix(z)
    P = np.linalg.pinv(np.eye(G.dim) - A, rcond=rcond)
    return k * P.T @ (A - A.T) @ P


def tau_form(G: LieGroup, z, u, v, scale=None) -> float:
    return float(u @ tau_matrix(G, z, scale) @ v)
