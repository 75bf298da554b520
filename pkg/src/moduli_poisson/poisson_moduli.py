"""Representation spaces of surface groups and their Poisson bracket.

A representation is stored by its generator images in the group
presentation (A_1, B_1, ..., A_l, B_l, C_1, ..., C_n).  The bracket of two
conjugation invariant functions is computed on the symplectic leaf through
the point (boundary classes fixed): the tangent space is H^1_par, the form
is the cup product plus boundary terms, and {f, g} = dg(X_f) with
omega(X_f, .) = df.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import linalg

from .cartan_alcove import TorusPoint, chamber_representative
from .errors import (BoundaryAmbiguous, NewtonDiverged, NotInB, NotSmoothPoint,
                     RejectionExhausted, SingularOmega)
from .lie_core import LieGroup, TWO_PI
from .surface_words import SurfaceData, Word, evaluate, fox_jacobian, relator, x, y, z
from .twisted_cohomology import (build_complex, cohomology_dims, harmonic_h1_basis,
                                 parabolic_form_matrix)

EPS_REL = 1e-10
H_FIRST = 1e-5
H_NESTED = 1e-3


@dataclass
class RepPoint:
    group: LieGroup
    surface: SurfaceData
    images: dict

    @property
    def relation_residual(self) -> float:
        r = evaluate(relator(self.surface), self.images)
        return float(np.abs(r - np.eye(self.group.size)).max())

    @cached_property
    def lifts(self) -> tuple:
        """X_k = log C_k inside O (raises NotInB if some C_k is outside B)."""
        return tuple(self.group.log_in_O(self.images[z(self.surface, k)])
                     for k in range(1, self.surface.boundaries + 1))

    @cached_property
    def complex(self):
        return build_complex(self.group, self.images, self.surface, "parabolic")

    @cached_property
    def dims(self):
        return cohomology_dims(self.complex)

    @cached_property
    def _basis_and_form(self):
        B = harmonic_h1_basis(self.complex)
        return B, parabolic_form_matrix(self.complex, B)

    @property
    def omega_rank(self) -> int:
        B, W = self._basis_and_form
        if W.size == 0:
            return 0
        return int(np.linalg.matrix_rank(W, tol=1e-8 * max(1.0, np.abs(W).max())))

    @property
    def is_smooth(self) -> bool:
        h0, h1, _ = self.dims
        return h0 == 0 and self.omega_rank == h1

    def conjugate(self, g) -> "RepPoint":
        gi = np.asarray(g).conj().T
        return RepPoint(self.group, self.surface, {k: g @ m @ gi for k, m in self.images.items()})


# -- invariant functions -----------------------------------------------------------


class InvariantFunction:
    """A conjugation invariant function of the generator images.

    ``grad`` (optional) returns the right-trivialised gradient on
    g^(2l+n): the covector u -> d/dt f(exp(t u_g) rho(g)) at t = 0.
    Functions without it are differentiated numerically.
    """

    def __init__(self, kind: str, fn: Callable[[dict], float], label: str,
                 grad: Optional[Callable] = None):
        self.kind = kind
        self.fn = fn
        self.label = label
        self.grad = grad

    def __call__(self, rho) -> float:
        images = rho.images if isinstance(rho, RepPoint) else rho
        return float(self.fn(images))

    def __repr__(self):
        return f"InvariantFunction({self.label})"

    @classmethod
    def wilson(cls, word: Word, label: Optional[str] = None) -> "InvariantFunction":
        """Re tr rho(word)."""
        def grad(G, images, gens):
            W = evaluate(word, images)
            c = np.real(np.einsum("iab,ba->i", G.basis, W))
            return fox_jacobian(G, word, images, gens).T @ c

        return cls("wilson", lambda im: np.real(np.trace(evaluate(word, im))),
                   label or f"W{list(word.letters)}", grad)

    @classmethod
    def boundary_class(cls, s: SurfaceData, k: int, index: int = 1) -> "InvariantFunction":
        """Re tr(C_k^index): a class function of the k-th boundary value."""
        if index == 0:
            return cls.constant(0.0)
        g = z(s, k) if index > 0 else -z(s, k)
        f = cls.wilson(Word((g,) * abs(index)), f"tr C{k}^{index}")
        f.kind = "boundary_class"
        return f

    @classmethod
    def constant(cls, c: float) -> "InvariantFunction":
        return cls("constant", lambda im: c, f"{c}",
                   lambda G, im, gens: np.zeros(len(gens) * G.dim))

    def __mul__(self, other):
        if isinstance(other, InvariantFunction):
            grad = None
            if self.grad and other.grad:
                def grad(G, im, gens):
                    return self.fn(im) * other.grad(G, im, gens) + other.fn(im) * self.grad(G, im, gens)
            return InvariantFunction("product", lambda im: self.fn(im) * other.fn(im),
                                     f"({self.label})*({other.label})", grad)
        grad = (lambda G, im, gens: other * self.grad(G, im, gens)) if self.grad else None
        return InvariantFunction("scaled", lambda im: other * self.fn(im),
                                 f"{other}*({self.label})", grad)

    __rmul__ = __mul__

    def __add__(self, other):
        grad = None
        if self.grad and other.grad:
            def grad(G, im, gens):
                return self.grad(G, im, gens) + other.grad(G, im, gens)
        return InvariantFunction("sum", lambda im: self.fn(im) + other.fn(im),
                                 f"({self.label})+({other.label})", grad)


def default_wilson_menu(s: SurfaceData) -> list:
    """Simple loops x_1, y_1, x_1 y_1, boundary words and one genus-crossing word."""
    words = []
    if s.genus >= 1:
        words += [Word((x(1),)), Word((y(1),)), Word((x(1), y(1)))]
    if s.genus >= 2:
        words.append(Word((x(1), x(2))))
    n = s.boundaries
    if n >= 2:
        words.append(Word((z(s, 1), z(s, 2))))
    if s.genus >= 1 and n >= 1:
        words.append(Word((x(1), z(s, 1))))
    if s.genus == 0:
        words.append(Word((z(s, 1), z(s, 2), z(s, 2))))
    return [InvariantFunction.wilson(w) for w in words]


# -- sampling ----------------------------------------------------------------------


def _solve_last(G, s, images):
    """Set C_n so that the relator evaluates to the identity."""
    zn = z(s, s.boundaries)
    images = dict(images)
    images[zn] = np.eye(G.size, dtype=complex) if not G.is_real else np.eye(G.size)
    images[zn] = evaluate(relator(s), images).conj().T
    return images


def leaf_coordinates(rho: RepPoint) -> tuple:
    """Sorted eigenvalue parameters of log C_k for every boundary k."""
    return tuple(chamber_representative(rho.group, X).nu for X in rho.lifts)


def _class_nu(G, c):
    return np.array(chamber_representative(G, G.log_in_O(c)).nu)


def _target_nu(t):
    return np.array(t.nu if isinstance(t, TorusPoint) else t, dtype=float)


def _rotation_about(G, theta):
    """theta times the first basis element, normalised to rotation angle theta."""
    b = G.basis[0]
    return b * (theta / np.linalg.eigvalsh(-1j * b).max())


def _class_element(G, target, g):
    """g exp(2 pi i diag(nu)) g^-1, or the SO(3) rotation with that SU(2) parameter."""
    nu = _target_nu(target)
    if G.family == "SO":
        return g @ G.exp(_rotation_about(G, 4 * np.pi * nu[0])) @ g.T
    return g @ np.diag(np.exp(TWO_PI * 1j * nu)) @ g.conj().T


def _snap_to_class(G, c, target):
    """The element of the target class sharing the eigenvectors of c."""
    nu = _target_nu(target)
    X = G.log_in_O(c)
    if G.family == "SO":
        theta = np.linalg.eigvalsh(-1j * X).max()
        return G.exp(X * (4 * np.pi * nu[0] / theta))
    w, v = np.linalg.eigh(-1j * X)
    newv = np.empty_like(w)
    newv[np.argsort(-w)] = nu
    return (v * np.exp(TWO_PI * 1j * newv)) @ v.conj().T


def project_to_leaf(rho: RepPoint, targets: Sequence, tol=1e-13, max_iter=40) -> RepPoint:
    """Move rho onto the leaf with boundary classes ``targets``.

    C_1, ..., C_{n-1} are snapped to their classes and C_n is solved from the
    relation.  The class of C_n is then corrected by Newton's method inside
    a fixed affine slice start + span(N), N the row space of the constraint
    jacobian at the start; this makes the result a smooth function of rho.
    """
    G, s = rho.group, rho.surface
    n = s.boundaries
    if len(targets) != n:
        raise ValueError("one target per boundary circle is needed")
    images = dict(rho.images)
    for k in range(1, n):
        images[z(s, k)] = _snap_to_class(G, images[z(s, k)], targets[k - 1])
    images = _solve_last(G, s, images)
    goal = _target_nu(targets[-1])[:-1]
    free = [g for g in range(1, 2 * s.genus + 1)] + [z(s, k) for k in range(1, n)]
    d = G.dim
    nfree = len(free) * d

    def moved(xi):
        out = dict(images)
        for i, g in enumerate(free):
            e = G.exp_vec(xi[i * d:(i + 1) * d])
            out[g] = e @ images[g] @ e.conj().T if g > 2 * s.genus else e @ images[g]
        return _solve_last(G, s, out)

    def resid(xi):
        return _class_nu(G, moved(xi)[z(s, n)])[:-1] - goal

    def jac(f, x0, m, h=1e-7):
        J = np.empty((len(goal), m))
        for i in range(m):
            e = np.zeros(m)
            e[i] = h
            J[:, i] = (f(x0 + e) - f(x0 - e)) / (2 * h)
        return J

    try:
        r = resid(np.zeros(nfree))
        if np.abs(r).max() < tol:
            return RepPoint(G, s, images)
        N = jac(resid, np.zeros(nfree), nfree).T
        if np.linalg.matrix_rank(N, tol=1e-8) < N.shape[1]:
            raise NewtonDiverged("class of the last boundary value cannot be moved here")

        def fc(c):
            return resid(N @ c)

        c = np.zeros(N.shape[1])
        for _ in range(max_iter):
            if np.abs(r).max() < tol:
                return RepPoint(G, s, moved(N @ c))
            step = -np.linalg.solve(jac(fc, c, len(c)), r)
            t = 1.0
            while True:
                try:
                    rc = fc(c + t * step)
                    if np.linalg.norm(rc) < np.linalg.norm(r):
                        break
                except (NotInB, BoundaryAmbiguous):
                    pass
                t /= 2
                if t < 1e-6:
                    raise NewtonDiverged("line search failed")
            c, r = c + t * step, rc
    except (NotInB, BoundaryAmbiguous) as exc:
        raise NewtonDiverged("boundary value left B") from exc
    if np.abs(r).max() < 1e-9:
        return RepPoint(G, s, moved(N @ c))
    raise NewtonDiverged(f"class residual {np.abs(r).max():.3g} after {max_iter} iterations")


def sample_rep(G: LieGroup, s: SurfaceData, rng, mode: str = "free", targets=None,
               max_tries: int = 1000) -> RepPoint:
    """Sample a representation with every C_k in B.

    ``mode='free'``: Haar random generators, C_n solved, rejection on B.
    ``mode='constrained'``: start in the target classes and project onto the
    leaf with project_to_leaf.
    """
    if s.boundaries == 0:
        raise ValueError("sampling needs at least one boundary circle")
    rng = np.random.default_rng(rng)
    n = s.boundaries
    for _ in range(max_tries):
        images = {g: G.random_element(rng) for g in range(1, s.n_group_generators)}
        if mode == "constrained":
            if targets is None or len(targets) != n:
                raise ValueError("constrained mode needs one target class per boundary")
            for k in range(1, n):
                images[z(s, k)] = _class_element(G, targets[k - 1], G.random_element(rng))
        elif mode != "free":
            raise ValueError(f"unknown mode {mode!r}")
        images = _solve_last(G, s, images)
        rho = RepPoint(G, s, images)
        try:
            rho.lifts
        except NotInB:
            continue
        if mode == "constrained":
            try:
                rho = project_to_leaf(rho, targets)
                rho.lifts
            except (NewtonDiverged, NotInB):
                continue
        return rho
    raise RejectionExhausted(f"no acceptable sample in {max_tries} tries")


# -- tangent space, differentials and the bracket --------------------------------------


def _require_smooth(rho: RepPoint):
    h0, h1, _ = rho.dims
    if h0 != 0:
        raise NotSmoothPoint(f"nontrivial stabiliser (h0 = {h0})")
    if rho.omega_rank != h1:
        raise SingularOmega(f"form rank {rho.omega_rank} below h1 = {h1}")


def tangent_basis(rho: RepPoint) -> np.ndarray:
    """Harmonic H^1_par representatives as full cocycles in g^(2l+n) (columns)."""
    _require_smooth(rho)
    B, _ = rho._basis_and_form
    return rho.complex.incl @ B


def omega_matrix(rho: RepPoint) -> np.ndarray:
    _require_smooth(rho)
    return rho._basis_and_form[1]


def perturb(rho: RepPoint, u, t: float) -> dict:
    """Images exp(t u_g) rho(g) for a cochain u in g^(2l+n)."""
    G = rho.group
    d = G.dim
    return {g: G.exp_vec(t * u[(g - 1) * d:g * d]) @ m for g, m in rho.images.items()}


def differential(f: InvariantFunction, rho: RepPoint, basis=None, h: Optional[float] = None) -> np.ndarray:
    """Covector (df(u_i))_i along the basis cocycles (columns in g^(2l+n)).

    Uses the analytic gradient when available and ``h`` is None, otherwise
    centred differences with step ``h`` (default H_FIRST).
    """
    basis = tangent_basis(rho) if basis is None else basis
    if h is None and f.grad is not None:
        gens = list(range(1, rho.surface.n_group_generators + 1))
        return basis.T @ f.grad(rho.group, rho.images, gens)
    h = H_FIRST if h is None else h
    out = np.empty(basis.shape[1])
    for i in range(basis.shape[1]):
        u = basis[:, i]
        out[i] = (f(perturb(rho, u, h)) - f(perturb(rho, u, -h))) / (2 * h)
    return out


def hamiltonian_vector(f: InvariantFunction, rho: RepPoint, h: Optional[float] = None) -> np.ndarray:
    """Coefficients of X_f in the tangent basis, from omega(X_f, .) = df."""
    W = omega_matrix(rho)
    return np.linalg.solve(W.T, differential(f, rho, h=h))


def poisson_bracket(f: InvariantFunction, g: InvariantFunction, rho: RepPoint,
                    h: Optional[float] = None) -> float:
    if f is g:
        return 0.0
    W = omega_matrix(rho)
    B = tangent_basis(rho)
    df = differential(f, rho, B, h)
    dg = differential(g, rho, B, h)
    if np.array_equal(df, dg):
        return 0.0
    return float(dg @ np.linalg.solve(W.T, df))


def flow_bracket(f: InvariantFunction, g: InvariantFunction, rho: RepPoint, t: float = 1e-4,
                 rng=0, project: bool = False) -> float:
    """Independent evaluation of {f, g}: move along X_f and difference g.

    X_f is computed in a randomly mixed basis of H^1_par with coboundaries
    added to the representatives.  The displaced points satisfy the relation
    (C_n is re-solved); with ``project`` they are also pulled back onto the
    leaf, which adds Newton noise but is not needed for a first derivative.
    """
    _require_smooth(rho)
    rng = np.random.default_rng(rng)
    K = rho.complex
    B = harmonic_h1_basis(K)
    k = B.shape[1]
    M = rng.standard_normal((k, k)) + 3 * np.eye(k)
    B2 = B @ M + K.d0 @ rng.standard_normal((K.group.dim, k))
    W2 = parabolic_form_matrix(K, B2)
    F2 = K.incl @ B2
    df = differential(f, rho, F2, h=H_FIRST)
    v = F2 @ np.linalg.solve(W2.T, df)
    leaf = leaf_coordinates(rho)

    def g_at(tt):
        moved = RepPoint(rho.group, rho.surface, _solve_last(rho.group, rho.surface, perturb(rho, v, tt)))
        return g(project_to_leaf(moved, leaf) if project else moved)

    return float((g_at(t) - g_at(-t)) / (2 * t))


def goldman_ratio(rho: RepPoint) -> float:
    """{tr A, tr B} / (tr AB - tr A tr B / 2) for SU(2) and genus 1."""
    s = rho.surface
    fa = InvariantFunction.wilson(Word((x(1),)))
    fb = InvariantFunction.wilson(Word((y(1),)))
    A, B = rho.images[x(1)], rho.images[y(1)]
    ta, tb, tab = (np.real(np.trace(m)) for m in (A, B, A @ B))
    return poisson_bracket(fa, fb, rho) / (tab - ta * tb / 2)


def casimir_check(k: int, rho: RepPoint, tests: Sequence[InvariantFunction], index: int = 1) -> float:
    c = InvariantFunction.boundary_class(rho.surface, k, index)
    return max((abs(poisson_bracket(c, g, rho)) for g in tests), default=0.0)


def _bracket_differential(g, h, rho, basis, step):
    """d{g, h} along the basis cocycles, with leaf projection of the displaced points."""
    leaf = leaf_coordinates(rho)
    out = np.empty(basis.shape[1])
    for i in range(basis.shape[1]):
        vals = []
        for t in (step, -step):
            moved = RepPoint(rho.group, rho.surface,
                             _solve_last(rho.group, rho.surface, perturb(rho, basis[:, i], t)))
            vals.append(poisson_bracket(g, h, project_to_leaf(moved, leaf)))
        out[i] = (vals[0] - vals[1]) / (2 * step)
    return out


def jacobi_check(f, g, h, rho: RepPoint, step: float = H_NESTED) -> float:
    """|{f,{g,h}} + {g,{h,f}} + {h,{f,g}}| with nested differences of size ``step``."""
    if f is g or g is h or f is h:
        return 0.0
    W = omega_matrix(rho)
    B = tangent_basis(rho)
    d = {fn: differential(fn, rho, B) for fn in (f, g, h)}
    total = 0.0
    for a_, b_, c_ in ((f, g, h), (g, h, f), (h, f, g)):
        dbc = _bracket_differential(b_, c_, rho, B, step)
        total += dbc @ np.linalg.solve(W.T, d[a_])
    return float(abs(total))


def bracket_path(G: LieGroup, s: SurfaceData, f, g, path_targets, rng=0, casimir_tests=None):
    """Brackets along a path of boundary classes, continuing the point between steps.

    Returns a list of row dicts; singular points are flagged instead of raising.
    """
    rows = []
    rho = None
    for i, targets in enumerate(path_targets):
        row = {"index": i, "targets": [[float(v) for v in _target_nu(t)] for t in targets]}
        try:
            if rho is None:
                rho = sample_rep(G, s, rng, "constrained", targets)
            else:
                rho = project_to_leaf(rho, targets)
            row["bracket"] = poisson_bracket(f, g, rho)
            row["self_bracket"] = poisson_bracket(f, f, rho)
            tests = casimir_tests or [f, g]
            row["casimir"] = max(casimir_check(k, rho, tests) for k in range(1, s.boundaries + 1))
            row["smooth"] = True
        except (NotSmoothPoint, SingularOmega, NewtonDiverged, RejectionExhausted) as exc:
            row.update(bracket=None, self_bracket=None, casimir=None, smooth=False, error=type(exc).__name__)
        rows.append(row)
    return rows
