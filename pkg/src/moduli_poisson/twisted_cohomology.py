"""Twisted cochain complexes of a surface group at a homomorphism phi.

Cochains are stored in the orthonormal coordinates of the Lie algebra.  The
middle term of the absolute and relative complexes is g^(2l+n), ordered by
generator index (x_1, y_1, ..., x_l, y_l, z_1, ..., z_n).  The parabolic
middle term replaces the z_k block by coordinates in an orthonormal basis of
h_k = im(Ad(phi(z_k)) - Id).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np
from scipy import linalg

from . import conventions as cv
from .errors import DimensionMismatch, IllConditioned, NotACocycle
from .forms import tau_matrix
from .lie_core import LieGroup
from .surface_words import (BarChain2, SurfaceData, build_chain_c, fox_jacobian,
                            relator, z)

SVD_TOL = 1e-8
H_TOL = 1e-8
VARIANTS = ("absolute", "parabolic", "relative")


def _sign_fix(U):
    """Make the first entry of largest magnitude in each column positive."""
    U = U.copy()
    for j in range(U.shape[1]):
        i = np.argmax(np.abs(U[:, j]))
        if U[i, j] < 0:
            U[:, j] = -U[:, j]
    return U


@dataclass(frozen=True)
class BoundaryDecomposition:
    """Per boundary generator: bases of h_k = im(Ad(z_k) - Id) and of its kernel s_k."""

    h_bases: tuple
    s_bases: tuple

    @property
    def h_dims(self):
        return tuple(b.shape[1] for b in self.h_bases)

    @property
    def s_dims(self):
        return tuple(b.shape[1] for b in self.s_bases)


def boundary_decomposition(G: LieGroup, phi: Mapping[int, np.ndarray], s: SurfaceData,
                           tol: float = H_TOL) -> BoundaryDecomposition:
    hs, ss = [], []
    for k in range(1, s.boundaries + 1):
        M = G.Ad_matrix(phi[z(s, k)]) - np.eye(G.dim)
        U, sv, Vt = np.linalg.svd(M)
        r = int(np.sum(sv > tol))
        hs.append(_sign_fix(U[:, :r]))
        # M is normal, so ker M = (im M)^perp
        ss.append(_sign_fix(U[:, r:]))
    return BoundaryDecomposition(tuple(hs), tuple(ss))


@dataclass(frozen=True)
class TwistedComplex:
    group: LieGroup
    surface: SurfaceData
    phi: dict
    variant: str
    d0: np.ndarray
    d1: np.ndarray
    boundary: Optional[BoundaryDecomposition]
    incl: np.ndarray
    relator_value: np.ndarray

    @property
    def middle_dim(self) -> int:
        return self.d0.shape[0]

    @property
    def is_central(self) -> bool:
        """Whether phi(r) is central (Ad(phi(r)) = Id)."""
        A = self.group.Ad_matrix(self.relator_value)
        return bool(np.abs(A - np.eye(self.group.dim)).max() < 1e-9)

    def chain_residual(self) -> float:
        return float(np.abs(self.d1 @ self.d0).max(initial=0.0))

    def to_full(self, u) -> np.ndarray:
        """Middle-term coordinates -> cocycle values in g^(2l+n)."""
        return self.incl @ np.asarray(u)


def _generators(s):
    return list(range(1, s.n_group_generators + 1))


def build_complex(G: LieGroup, phi: Mapping[int, np.ndarray], s: SurfaceData,
                  variant: str = "absolute", tol: float = H_TOL) -> TwistedComplex:
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    gens = _generators(s)
    d = G.dim
    N = len(gens)
    d0 = np.vstack([np.eye(d) - G.Ad_matrix(phi[g]) for g in gens])
    d1 = fox_jacobian(G, relator(s), phi, gens)
    r_val = np.eye(G.size, dtype=complex)
    for g in relator(s).letters:
        r_val = r_val @ (phi[abs(g)] if g > 0 else phi[abs(g)].conj().T)
    incl = np.eye(N * d)
    bd = None
    if variant == "parabolic":
        bd = boundary_decomposition(G, phi, s, tol)
        incl = linalg.block_diag(np.eye(2 * s.genus * d), *bd.h_bases) if N else incl
        d0 = incl.T @ d0
        d1 = d1 @ incl
    elif variant == "relative":
        Phi = linalg.block_diag(np.eye(2 * s.genus * d),
                                *[G.Ad_matrix(phi[z(s, k)]) - np.eye(d) for k in range(1, s.boundaries + 1)])
        zb = slice(2 * s.genus * d, N * d)
        d0 = d0.copy()
        d0[zb] = np.tile(-np.eye(d), (s.boundaries, 1))
        d1 = d1 @ Phi
        incl = Phi
    return TwistedComplex(G, s, dict(phi), variant, d0, d1, bd, incl, r_val)


def comparison_maps(K_par: TwistedComplex):
    """(proj, incl) between the relative and parabolic middle terms, z-blocks only."""
    G, s, bd = K_par.group, K_par.surface, K_par.boundary
    projs = [H.T @ (G.Ad_matrix(K_par.phi[z(s, k)]) - np.eye(G.dim))
             for k, H in enumerate(bd.h_bases, start=1)]
    proj = linalg.block_diag(*projs) if projs else np.zeros((0, 0))
    incl = linalg.block_diag(*bd.h_bases) if projs else np.zeros((0, 0))
    return proj, incl


def _rank(M, tol, s_max=None):
    if M.size == 0:
        return 0
    sv = np.linalg.svd(M, compute_uv=False)
    # blocks are built from orthogonal Ad matrices, so the natural scale is 1
    top = max(sv.max(initial=0.0), 1.0) if s_max is None else s_max
    band = (sv > 1e-10 * top) & (sv < 1e-6 * top)
    if np.any(band):
        raise IllConditioned(f"singular values {sv[band]} near the rank threshold")
    return int(np.sum(sv > tol * top))


def cohomology_dims(K: TwistedComplex, tol: float = SVD_TOL):
    """(h0, h1, h2) by SVD ranks; raises IllConditioned on clustered spectra."""
    d = K.group.dim
    r0 = _rank(K.d0, tol)
    r1 = _rank(K.d1, tol)
    h0 = d - r0
    h1 = (K.middle_dim - r1) - r0
    h2 = d - r1
    assert h0 - h1 + h2 == 2 * d - K.middle_dim
    return h0, h1, h2


def _null_space(M, tol=SVD_TOL):
    if M.shape[0] == 0:
        return np.eye(M.shape[1])
    u, sv, vt = np.linalg.svd(M)
    r = int(np.sum(sv > tol * max(sv.max(initial=0.0), 1.0)))
    return vt[r:].T


def h0_basis(K: TwistedComplex, tol=SVD_TOL) -> np.ndarray:
    return _null_space(K.d0, tol)


def h2_basis(K: TwistedComplex, tol=SVD_TOL) -> np.ndarray:
    """Orthonormal basis of (im d1)^perp, representing H^2."""
    return _null_space(K.d1.T, tol)


def harmonic_h1_basis(K: TwistedComplex, tol=SVD_TOL) -> np.ndarray:
    """Cocycles orthogonal to the coboundaries: ker d1 intersected with (im d0)^perp."""
    return _null_space(np.vstack([K.d1, K.d0.T]), tol)


def duality_matrix(K: TwistedComplex, tol=SVD_TOL) -> np.ndarray:
    """Pairing matrix between H^0 and H^2 bases through the invariant form."""
    return h0_basis(K, tol).T @ h2_basis(K, tol)


def duality_pairing(K: TwistedComplex, u, v, tol=1e-8) -> float:
    """Pairing of an H^0 class u (in g) with an H^2 class represented by v (in g).

    The value is the invariant form <u, v>; it only depends on the class of v
    because H^0 invariants are orthogonal to im d1 in the parabolic complex.
    """
    d = K.group.dim
    u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
    if u.shape != (d,) or v.shape != (d,):
        raise DimensionMismatch(f"expected vectors of length {d}, got {u.shape} and {v.shape}")
    if np.linalg.norm(K.d0 @ u) > tol * max(1.0, np.linalg.norm(u)):
        raise ValueError("u is not invariant (not an H^0 class)")
    return float(u @ v)


# -- the symplectic form on H^1_par ---------------------------------------------


def chain_gram(G: LieGroup, phi: Mapping[int, np.ndarray], c: BarChain2, generators) -> np.ndarray:
    """Gram matrix of the cup-product term on full cocycle coordinates.

    omega_c(u, v) = k sum_cells m (<u(a), Ad(phi(a)) v(b)> - <v(a), Ad(phi(a)) u(b)>)
    with u(w) = J_w u the value of the cocycle on the word w.
    """
    N = len(generators) * G.dim
    W = np.zeros((N, N))
    for m, a, b in c.cells():
        Ja = fox_jacobian(G, a, phi, generators)
        Jb = fox_jacobian(G, b, phi, generators)
        A = G.Ad_matrix(_eval(a, phi, G))
        P = Ja.T @ A @ Jb
        W += m * (P - P.T)
    return cv.MC_SCALE * W


def _eval(w, phi, G):
    out = np.eye(G.size, dtype=complex)
    for c in w.letters:
        out = out @ (phi[abs(c)] if c > 0 else phi[abs(c)].conj().T)
    return out


def boundary_gram(G: LieGroup, phi, s: SurfaceData) -> np.ndarray:
    """Sum of the tau_k forms on the z_k blocks, as a Gram matrix on g^(2l+n)."""
    d = G.dim
    N = s.n_group_generators * d
    W = np.zeros((N, N))
    for k in range(1, s.boundaries + 1):
        blk = slice((z(s, k) - 1) * d, z(s, k) * d)
        W[blk, blk] = tau_matrix(G, phi[z(s, k)])
    return W


def parabolic_form_gram(K: TwistedComplex, c: Optional[BarChain2] = None) -> np.ndarray:
    """Gram matrix of the H^1_par form on full cocycle coordinates g^(2l+n)."""
    c = build_chain_c(K.surface) if c is None else c
    gens = _generators(K.surface)
    return chain_gram(K.group, K.phi, c, gens) + boundary_gram(K.group, K.phi, K.surface)


def check_cocycle(K: TwistedComplex, u, tol=1e-8):
    u = np.asarray(u, dtype=float)
    if u.shape != (K.middle_dim,):
        raise DimensionMismatch(f"expected {K.middle_dim} coordinates, got {u.shape}")
    res = np.linalg.norm(K.d1 @ u)
    if res > tol * max(1.0, np.linalg.norm(u)):
        raise NotACocycle(f"|d1 u| = {res:.3g}")
    return u


def parabolic_symplectic_form(K: TwistedComplex, u, v, c: Optional[BarChain2] = None,
                              tol=1e-8) -> float:
    """The symplectic form on parabolic 1-cocycles (coordinates of the complex K)."""
    if K.variant != "parabolic":
        raise ValueError("parabolic complex required")
    u, v = check_cocycle(K, u, tol), check_cocycle(K, v, tol)
    W = parabolic_form_gram(K, c)
    return float(K.to_full(u) @ W @ K.to_full(v))


def parabolic_form_matrix(K: TwistedComplex, basis=None, c: Optional[BarChain2] = None) -> np.ndarray:
    """Matrix of the form on the columns of ``basis`` (default: harmonic H^1_par basis)."""
    basis = harmonic_h1_basis(K) if basis is None else basis
    F = K.incl @ basis
    return F.T @ parabolic_form_gram(K, c) @ F
