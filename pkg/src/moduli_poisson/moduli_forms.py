"""The extended moduli space built from the groupoid presentation.

A point is an assignment of the groupoid generators (x_j, y_j, a_k, gamma_k)
together with the logarithms X_0 of the relator value and X_k of the a_k
images.  Tangent vectors are right-trivialised generator tangents u_g; the
lift tangents follow from the linearised constraints
R(X_0) dX_0 = J_r u and R(X_k) dX_k = u_{a_k}, where R is the right
trivialised derivative of exp and J_r the Fox jacobian of the relator.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import conventions as cv
from .errors import IllConditioned, NotInB, OrbitMismatch
from .forms import beta_matrix, kirillov_matrix, lambda_vec, tau_matrix
from .lie_core import LieGroup
from .surface_words import (SurfaceData, Word, a, act, build_chain_c, build_chain_c_tilde,
                            evaluate, fox_jacobian, gamma, groupoid_presentation,
                            group_presentation, restrict, z)
from .twisted_cohomology import build_complex, chain_gram, cohomology_dims


@dataclass(frozen=True)
class ExtendedPoint:
    phi: dict
    lifts: tuple

    @property
    def X0(self):
        return self.lifts[0]


@dataclass(frozen=True)
class TangentVector:
    gens: np.ndarray
    lifts: np.ndarray

    def __add__(self, other):
        return TangentVector(self.gens + other.gens, self.lifts + other.lifts)

    def __rmul__(self, t):
        return TangentVector(t * self.gens, t * self.lifts)


@dataclass(frozen=True)
class OrbitTuple:
    """Representatives X_1, ..., X_n (algebra elements) of adjoint orbits."""

    reps: tuple


@dataclass(frozen=True)
class PresymplecticReport:
    dim_B: int
    dim_Z: int
    dim_H: int
    rank_H: int
    isotropic_residual: float
    annihilator_match: bool
    coisotropic_residual: float
    momentum_residual: float
    image_annihilator_match: bool

    @property
    def passed(self) -> bool:
        return (self.isotropic_residual < 1e-8 and self.annihilator_match
                and self.coisotropic_residual < 1e-8 and self.rank_H == self.dim_H
                and self.image_annihilator_match and self.momentum_residual < 1e-8)


def _central(f, h):
    """Five-point centred difference f'(0), error O(h^4)."""
    return float((-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h))


def _null(M, tol=1e-9):
    if M.shape[0] == 0:
        return np.eye(M.shape[1])
    u, s, vt = np.linalg.svd(M)
    top = s.max(initial=0.0)
    r = int(np.sum(s > tol * max(top, 1.0)))
    return vt[r:].T


def _rank(M, tol=1e-9):
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > tol * max(s.max(initial=0.0), 1.0)))


def presymplectic_check(W, O, D, tol=1e-9) -> PresymplecticReport:
    """Check the presymplectic reduction conditions at a zero of the momentum map.

    W is the Gram matrix of the 2-form on a basis of T_pM, O has the
    fundamental vector fields X_M (one column per basis element of k) and D
    is the matrix of d mu_p.
    """
    k = O.shape[1]
    Zb = _null(D, tol)
    dim_B = _rank(O, tol)
    dim_Z = Zb.shape[1]
    iso = float(np.abs(D @ O).max(initial=0.0))
    Bw = _null(O.T @ W, tol)
    ann_match = Bw.shape[1] == dim_Z and float(np.abs(D @ Bw).max(initial=0.0)) < 1e-8
    Zw = _null(Zb.T @ W, tol)
    coiso = float(np.abs(D @ Zw).max(initial=0.0))
    rank_H = _rank(Zb.T @ W @ Zb, tol)
    dim_H = dim_Z - dim_B
    mom = float(np.abs(-O.T @ W - D).max(initial=0.0))
    kp = _null(O, tol)
    im_match = (_rank(D, tol) == k - kp.shape[1]
                and float(np.abs(kp.T @ D).max(initial=0.0)) < 1e-8)
    return PresymplecticReport(dim_B, dim_Z, dim_H, rank_H, iso, ann_match, coiso, mom, im_match)


class ExtendedModuli:
    """The extended moduli space for a group and surface, with its 2-form."""

    def __init__(self, group: LieGroup, surface: SurfaceData, chain_order: str = "left",
                 beta_sign: Optional[int] = None):
        self.G = group
        self.s = surface
        self.pres = groupoid_presentation(surface)
        self.gpres = group_presentation(surface)
        self.gens = list(self.pres.generators)
        self.ggens = list(self.gpres.generators)
        self.c = build_chain_c(surface, chain_order)
        self.c_tilde = build_chain_c_tilde(self.c, surface)
        self.rt = self.pres.relator
        self.beta_sign = cv.BETA_SIGN if beta_sign is None else beta_sign
        self.n = surface.boundaries
        self.d = group.dim

    @property
    def dim(self) -> int:
        """Dimension of the extended space (generator tangents only)."""
        return len(self.gens) * self.d

    # -- points ---------------------------------------------------------------

    def point(self, phi) -> ExtendedPoint:
        G = self.G
        lifts = [G.log_in_O(evaluate(self.rt, phi))]
        lifts += [G.log_in_O(phi[a(self.s, k)]) for k in range(1, self.n + 1)]
        return ExtendedPoint(dict(phi), tuple(lifts))

    def random_point(self, rng, zero_locus=False, margin=0.1, max_tries=200) -> ExtendedPoint:
        """Random point with lifts at least ``margin`` inside the boundary of O.

        With ``zero_locus`` the last a_n is solved so that the relator value
        is the identity (needs n >= 1).
        """
        rng = np.random.default_rng(rng)
        G = self.G
        limit = (0.5 if G.family == "SO" else 1.0) - margin
        for _ in range(max_tries):
            phi = {g: G.random_element(rng) for g in self.gens}
            if zero_locus:
                if self.n == 0:
                    raise ValueError("zero locus sampling needs a boundary generator")
                an, gn = a(self.s, self.n), gamma(self.s, self.n)
                phi[an] = G.identity()
                prefix = evaluate(self.rt, phi)  # with a_n = Id this is P gamma_n gamma_n^-1 = P
                gm = phi[gn]
                phi[an] = gm.conj().T @ prefix.conj().T @ gm
            try:
                p = self.point(phi)
            except NotInB:
                continue
            if all(np.abs(G.ad_nu(X)).max() < limit for X in p.lifts):
                return p
        raise RuntimeError("could not sample a point with lifts inside O")

    def group_point(self, p: ExtendedPoint) -> dict:
        """The group assignment i^*(phi)."""
        return restrict(p.phi, self.s)

    # -- tangents -------------------------------------------------------------

    def _a_block(self, k):
        g = a(self.s, k)
        return slice((g - 1) * self.d, g * self.d)

    def relator_jacobian(self, p: ExtendedPoint) -> np.ndarray:
        return fox_jacobian(self.G, self.rt, p.phi, self.gens)

    def lift_maps(self, p: ExtendedPoint) -> list:
        """Matrices L_j with dX_j = L_j u for generator tangents u."""
        G, d = self.G, self.d
        maps = [np.linalg.solve(G.dexp_right(p.lifts[0]), self.relator_jacobian(p))]
        for k in range(1, self.n + 1):
            E = np.zeros((d, self.dim))
            E[:, self._a_block(k)] = np.eye(d)
            maps.append(np.linalg.solve(G.dexp_right(p.lifts[k]), E))
        return maps

    def tangent(self, p: ExtendedPoint, u, maps=None) -> TangentVector:
        u = np.asarray(u, dtype=float)
        maps = self.lift_maps(p) if maps is None else maps
        return TangentVector(u, np.concatenate([L @ u for L in maps]))

    def constraint_matrix(self, p: ExtendedPoint) -> np.ndarray:
        """Linearised constraints on (generator tangents, lift tangents)."""
        G, d, n = self.G, self.d, self.n
        rows = (n + 1) * d
        C = np.zeros((rows, self.dim + rows))
        C[:d, :self.dim] = self.relator_jacobian(p)
        C[:d, self.dim:self.dim + d] = -G.dexp_right(p.lifts[0])
        for k in range(1, n + 1):
            r = slice(k * d, (k + 1) * d)
            C[r, self._a_block(k)] = np.eye(d)
            C[r, self.dim + k * d:self.dim + (k + 1) * d] = -G.dexp_right(p.lifts[k])
        return C

    def tangent_basis(self, p: ExtendedPoint) -> np.ndarray:
        """Orthonormal basis (columns) of the kernel of the constraint matrix."""
        return _null(self.constraint_matrix(p), 1e-12)

    def split(self, col) -> TangentVector:
        return TangentVector(col[:self.dim], col[self.dim:])

    def constraint_residual(self, p: ExtendedPoint, v: TangentVector) -> float:
        return float(np.abs(self.constraint_matrix(p) @ np.concatenate([v.gens, v.lifts])).max())

    # -- forms ----------------------------------------------------------------

    def omega_c_gram(self, p: ExtendedPoint) -> np.ndarray:
        return chain_gram(self.G, p.phi, self.c_tilde, self.gens)

    def beta_matrices(self, p: ExtendedPoint) -> list:
        return [beta_matrix(self.G, X) for X in p.lifts]

    def lift_gram(self, p: ExtendedPoint, betas=None) -> np.ndarray:
        """Block-diagonal Gram matrix of the beta terms on lift coordinates."""
        betas = self.beta_matrices(p) if betas is None else betas
        d = self.d
        W = np.zeros(((self.n + 1) * d,) * 2)
        for j, B in enumerate(betas):
            sign = -self.beta_sign if j == 0 else 1
            W[j * d:(j + 1) * d, j * d:(j + 1) * d] = sign * B
        return W

    def omega_c_tilde(self, p: ExtendedPoint, v: TangentVector, w: TangentVector) -> float:
        return float(v.gens @ self.omega_c_gram(p) @ w.gens)

    def omega_total(self, p: ExtendedPoint, v: TangentVector, w: TangentVector) -> float:
        """omega_c~ minus beta at the relator lift plus beta at each a_k lift."""
        val = self.omega_c_tilde(p, v, w)
        return float(val + v.lifts @ self.lift_gram(p) @ w.lifts)

    def omega_gram(self, p: ExtendedPoint) -> np.ndarray:
        """Gram matrix of the total form in generator-tangent coordinates."""
        maps = self.lift_maps(p)
        L = np.vstack(maps)
        return self.omega_c_gram(p) + L.T @ self.lift_gram(p) @ L

    def rank_omega(self, p: ExtendedPoint, tol=1e-9) -> int:
        W = self.omega_gram(p)
        s = np.linalg.svd(W, compute_uv=False)
        top = s.max(initial=0.0)
        band = (s > 1e-12 * top) & (s < 1e-7 * top)
        if np.any(band):
            raise IllConditioned(f"singular values {s[band]} near the rank threshold")
        return int(np.sum(s > tol * top))

    # -- group action and momentum ---------------------------------------------

    def momentum(self, p: ExtendedPoint) -> list:
        """mu_0 = -X_0 and mu_k = X_k, identifying g with its dual by the form.

        The sign on the relator copy is fixed by the momentum property, see
        conventions.RELATOR_MOMENTUM_SIGN.
        """
        return [cv.RELATOR_MOMENTUM_SIGN * p.lifts[0]] + list(p.lifts[1:])

    def momentum_map_matrices(self, p: ExtendedPoint, maps=None) -> list:
        """Matrices of d mu_j on generator tangents."""
        maps = self.lift_maps(p) if maps is None else maps
        return [cv.RELATOR_MOMENTUM_SIGN * maps[0]] + maps[1:]

    def act(self, thetas: Sequence[np.ndarray], p: ExtendedPoint) -> ExtendedPoint:
        phi = act(thetas, p.phi, self.pres)
        lifts = tuple(self.G.adjoint(thetas[j], X) for j, X in enumerate(p.lifts))
        return ExtendedPoint(phi, lifts)

    def push_tangent(self, thetas, p: ExtendedPoint, v: TangentVector) -> TangentVector:
        """Differential of the action on right-trivialised tangents."""
        G, d = self.G, self.d
        gens = np.concatenate([G.Ad_matrix(thetas[self.pres.sources[g - 1]]) @ v.gens[(g - 1) * d:g * d]
                               for g in self.gens])
        lifts = np.concatenate([G.Ad_matrix(thetas[j]) @ v.lifts[j * d:(j + 1) * d]
                                for j in range(self.n + 1)])
        return TangentVector(gens, lifts)

    def fundamental_field(self, p: ExtendedPoint, j: int, X) -> TangentVector:
        """Vector field of X in the j-th copy of G at p."""
        G, d = self.G, self.d
        eps = cv.FUNDAMENTAL_FIELD_SIGN
        xv = G.vec(X)
        gens = np.zeros(self.dim)
        for g in self.gens:
            blk = slice((g - 1) * d, g * d)
            if self.pres.sources[g - 1] == j:
                gens[blk] += eps * xv
            if self.pres.targets[g - 1] == j:
                gens[blk] -= eps * G.Ad_matrix(p.phi[g]) @ xv
        lifts = np.zeros((self.n + 1) * d)
        lifts[j * d:(j + 1) * d] = eps * G.ad_matrix(X) @ G.vec(p.lifts[j])
        return TangentVector(gens, lifts)

    def orbit_matrix(self, p: ExtendedPoint, copies) -> np.ndarray:
        """Generator tangents of the fundamental fields of basis elements."""
        cols = [self.fundamental_field(p, j, e).gens for j in copies for e in self.G.basis]
        return np.array(cols).T

    # -- charts for finite differences ----------------------------------------

    def chart_point(self, p: ExtendedPoint, xi) -> ExtendedPoint:
        """phi(g) -> exp(xi_g) phi(g), lifts recomputed by log."""
        G, d = self.G, self.d
        phi = {g: G.exp_vec(xi[(g - 1) * d:g * d]) @ p.phi[g] for g in self.gens}
        return self.point(phi)

    def chart_frame(self, xi) -> np.ndarray:
        """Block matrix sending chart directions to right-trivialised tangents."""
        G, d = self.G, self.d
        T = np.zeros((self.dim, self.dim))
        for g in self.gens:
            blk = slice((g - 1) * d, g * d)
            T[blk, blk] = G.dexp_right(G.mat(xi[blk]))
        return T

    def chart_form(self, p: ExtendedPoint, xi, gram=None) -> np.ndarray:
        q = self.chart_point(p, xi)
        T = self.chart_frame(xi)
        W = self.omega_gram(q) if gram is None else gram(q)
        return T.T @ W @ T

    def exterior_derivative_fd(self, p, dirs, h=1e-4, gram=None) -> float:
        """d(omega)(a, b, c) by centred differences in the chart at p."""
        a_, b_, c_ = dirs
        zero = np.zeros(self.dim)

        def D(e, x_, y_):
            return _central(lambda t: x_ @ self.chart_form(p, zero + t * e, gram) @ y_, h)

        return D(a_, b_, c_) - D(b_, a_, c_) + D(c_, a_, b_)

    def lambda_boundary(self, p: ExtendedPoint, dirs) -> float:
        """<d c~, E^* lambda>: lambda at the relator minus lambda at each a_k."""
        J = self.relator_jacobian(p)
        val = lambda_vec(self.G, *(J @ e for e in dirs))
        for k in range(1, self.n + 1):
            blk = self._a_block(k)
            val -= lambda_vec(self.G, *(e[blk] for e in dirs))
        return float(val)

    def momentum_fd(self, p: ExtendedPoint, j: int, X, u, h=1e-5) -> float:
        """d <X, mu_j> (u) by centred differences along exp(t u) phi."""
        xv = self.G.vec(X)

        def f(t):
            return xv @ self.G.vec(self.momentum(self.chart_point(p, t * u))[j])

        return _central(f, h)

    # -- constrained space and covering -----------------------------------------

    def constrained_data(self, p: ExtendedPoint):
        """Gram, orbit and d mu matrices of the constrained space at i^*(p).

        Tangents of the constrained space are parabolic cochains
        (g^(2l) x h_1 x ... x h_n); the form is the cup-product term plus the
        tau_k terms minus beta at the relator lift.
        """
        G = self.G
        phi = self.group_point(p)
        K = build_complex(G, phi, self.s, "parabolic")
        I = K.incl
        W = chain_gram(G, phi, self.c, self.ggens)
        d = self.d
        for k in range(1, self.n + 1):
            blk = slice((z(self.s, k) - 1) * d, z(self.s, k) * d)
            W[blk, blk] += tau_matrix(G, phi[z(self.s, k)])
        X0 = p.lifts[0]
        L0 = np.linalg.solve(G.dexp_right(X0), K.d1)
        Wp = I.T @ W @ I - self.beta_sign * L0.T @ beta_matrix(G, X0) @ L0
        O = cv.FUNDAMENTAL_FIELD_SIGN * K.d0
        return Wp, O, cv.RELATOR_MOMENTUM_SIGN * L0, K

    def presymplectic_check(self, p: ExtendedPoint, space: str = "constrained") -> PresymplecticReport:
        """Presymplectic reduction conditions at p.

        ``space='constrained'``: the constrained space at i^*(p) with its G
        action.  ``space='extended'``: the extended space with the action of
        the copy G_0 and momentum mu_0.
        """
        if space == "constrained":
            W, O, D, _ = self.constrained_data(p)
        elif space == "extended":
            W = self.omega_gram(p)
            O = self.orbit_matrix(p, [0])
            D = self.momentum_map_matrices(p)[0]
        else:
            raise ValueError(space)
        return presymplectic_check(W, O, D)

    def reduce_and_cover(self, p: ExtendedPoint, orbits: OrbitTuple, n_pairs=50, rng=0,
                         tol=1e-7):
        """Compare the reduced form with the pullback of the constrained form.

        Returns (group assignment i^*(phi), max residual over random tangent
        pairs of the orbit-constrained space).
        """
        G, d, s = self.G, self.d, self.s
        from .cartan_alcove import chamber_representative
        for k, rep in enumerate(orbits.reps, start=1):
            t1 = np.array(chamber_representative(G, p.lifts[k]).nu)
            t2 = np.array(chamber_representative(G, rep).nu)
            if t1.shape != t2.shape or np.abs(t1 - t2).max() > tol:
                raise OrbitMismatch(f"mu_{k} is not on the requested orbit")
        rng = np.random.default_rng(rng)
        maps = self.lift_maps(p)
        # constraint: u_{a_k} in h_k, i.e. orthogonal to the stabiliser s_k
        rows = []
        for k in range(1, self.n + 1):
            M = G.Ad_matrix(p.phi[a(s, k)]) - np.eye(d)
            U, sv, _ = np.linalg.svd(M)
            S = U[:, int(np.sum(sv > 1e-8)):]
            R = np.zeros((S.shape[1], self.dim))
            R[:, self._a_block(k)] = S.T
            rows.append(R)
        V = _null(np.vstack(rows), 1e-12) if rows else np.eye(self.dim)
        # push forward to group generator tangents
        phi_g = self.group_point(p)
        P = np.zeros((len(self.ggens) * d, self.dim))
        P[:2 * s.genus * d, :2 * s.genus * d] = np.eye(2 * s.genus * d)
        for k in range(1, self.n + 1):
            w = Word((gamma(s, k), a(s, k), -gamma(s, k)))
            zb = slice((z(s, k) - 1) * d, z(s, k) * d)
            P[zb] = fox_jacobian(G, w, p.phi, self.gens)
        Wc = chain_gram(G, phi_g, self.c, self.ggens)
        taus = [tau_matrix(G, phi_g[z(s, k)]) for k in range(1, self.n + 1)]
        betas = self.beta_matrices(p)
        kir = [kirillov_matrix(G, p.lifts[k]) for k in range(1, self.n + 1)]
        Wt = self.omega_c_gram(p)
        LW = self.lift_gram(p, betas)
        worst = 0.0
        for _ in range(n_pairs):
            u1, u2 = V @ rng.standard_normal(V.shape[1]), V @ rng.standard_normal(V.shape[1])
            t1, t2 = self.tangent(p, u1, maps), self.tangent(p, u2, maps)
            lhs = t1.gens @ Wt @ t2.gens + t1.lifts @ LW @ t2.lifts
            for k in range(1, self.n + 1):
                # orbit tangent dX_k = [., X_k] in coordinates
                x1, x2 = t1.lifts[k * d:(k + 1) * d], t2.lifts[k * d:(k + 1) * d]
                lhs -= x1 @ kir[k - 1] @ x2
            g1, g2 = P @ u1, P @ u2
            rhs = g1 @ Wc @ g2 - self.beta_sign * t1.lifts[:d] @ betas[0] @ t2.lifts[:d]
            for k in range(1, self.n + 1):
                zb = slice((z(s, k) - 1) * d, z(s, k) * d)
                rhs += g1[zb] @ taus[k - 1] @ g2[zb]
            scale = max(1.0, np.linalg.norm(u1) * np.linalg.norm(u2))
            worst = max(worst, abs(lhs - rhs) / scale)
        return phi_g, worst
