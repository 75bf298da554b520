"""Compact matrix groups SU(n) (2 <= n <= 4) and SO(3).

Algebra elements are stored as matrices (skew-hermitian traceless, or real
skew-symmetric).  Internally most linear algebra is done in an orthonormal
basis of the Lie algebra for the invariant form, so Ad(g) and ad(X) become
real orthogonal / skew matrices of size dim_g.
"""
from __future__ import annotations

import numpy as np
from scipy import linalg
from scipy.stats import special_ortho_group, unitary_group

from .errors import BoundaryAmbiguous, NotInB

EPS_U = 1e-10
EPS_REG = 1e-9
# A regularity test whose distance to the wall is below EPS_WALL is treated as
# lying exactly on the wall; between EPS_WALL and EPS_REG it is ambiguous.
EPS_WALL = 1e-12

TWO_PI = 2.0 * np.pi


def _su_basis(n):
    out = []
    for j in range(n):
        for k in range(j + 1, n):
            a = np.zeros((n, n), dtype=complex)
            a[j, k], a[k, j] = 1.0, -1.0
            out.append(a / np.sqrt(2))
            s = np.zeros((n, n), dtype=complex)
            s[j, k] = s[k, j] = 1j
            out.append(s / np.sqrt(2))
    for m in range(1, n):
        d = np.zeros(n)
        d[:m] = 1.0
        d[m] = -m
        out.append(1j * np.diag(d) / np.sqrt(m * (m + 1)))
    return np.array(out)


def _so3_basis():
    lx = np.array([[0, 0, 0], [0, 0, -1], [0, 1, 0]], dtype=float)
    ly = np.array([[0, 0, 1], [0, 0, 0], [-1, 0, 0]], dtype=float)
    lz = np.array([[0, -1, 0], [1, 0, 0], [0, 0, 0]], dtype=float)
    return np.array([lx, ly, lz]) / np.sqrt(2)


def _phi1(z):
    """(e^z - 1)/z, holomorphic, with the series near 0."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1e-5
    safe = np.where(small, 1.0, z)
    return np.where(small, 1 + z / 2 + z * z / 6, np.expm1(safe) / safe)


class LieGroup:
    """A compact matrix group together with its Lie algebra.

    ``form_scale`` multiplies the invariant form ``pair(X, Y) = -Re tr(XY)``.
    """

    def __init__(self, family: str, n: int, form_scale: float = 1.0):
        family = family.upper()
        if family == "SU":
            if not 2 <= n <= 4:
                raise ValueError(f"SU(n) supported for 2 <= n <= 4, got n={n}")
            self.size = n
            raw = _su_basis(n)
        elif family == "SO":
            if n != 3:
                raise ValueError("only SO(3) is supported")
            self.size = 3
            raw = _so3_basis()
        else:
            raise ValueError(f"unknown group family {family!r}")
        if form_scale <= 0:
            raise ValueError("form_scale must be positive")
        self.family = family
        self.n = n
        self.form_scale = float(form_scale)
        self.basis = raw / np.sqrt(self.form_scale)
        self.dim = len(self.basis)
        self.is_real = family == "SO"
        # structure tensor: ad(e_k) as dim x dim matrices
        self._ad_basis = np.array([self._ad_direct(e) for e in self.basis])

    @classmethod
    def su(cls, n: int, form_scale: float = 1.0) -> "LieGroup":
        return cls("SU", n, form_scale)

    @classmethod
    def so3(cls, form_scale: float = 1.0) -> "LieGroup":
        return cls("SO", 3, form_scale)

    @classmethod
    def from_name(cls, name: str, form_scale: float = 1.0) -> "LieGroup":
        """Parse names like ``SU2``, ``SU(3)``, ``so3``."""
        s = name.strip().upper().replace("(", "").replace(")", "").replace("_", "")
        if s.startswith("SU") and s[2:].isdigit():
            return cls.su(int(s[2:]), form_scale)
        if s == "SO3":
            return cls.so3(form_scale)
        raise ValueError(f"unsupported group {name!r}")

    @property
    def name(self) -> str:
        return f"{self.family}({self.n})"

    def __repr__(self):
        return f"LieGroup({self.name}, form_scale={self.form_scale})"

    def __eq__(self, other):
        return (isinstance(other, LieGroup) and self.family == other.family
                and self.n == other.n and self.form_scale == other.form_scale)

    def __hash__(self):
        return hash((self.family, self.n, self.form_scale))

    def __getstate__(self):
        return (self.family, self.n, self.form_scale)

    def __setstate__(self, state):
        self.__init__(*state)

    # -- element checks ---------------------------------------------------

    def identity(self):
        return np.eye(self.size, dtype=float if self.is_real else complex)

    def zero(self):
        return np.zeros((self.size, self.size), dtype=float if self.is_real else complex)

    def is_group_element(self, g, tol=EPS_U) -> bool:
        g = np.asarray(g)
        if g.shape != (self.size, self.size):
            return False
        if np.linalg.norm(g.conj().T @ g - np.eye(self.size)) >= tol:
            return False
        if self.is_real and np.abs(np.imag(g)).max() >= tol:
            return False
        return abs(np.linalg.det(g) - 1) < tol

    def is_algebra_element(self, x, tol=EPS_U) -> bool:
        x = np.asarray(x)
        if x.shape != (self.size, self.size):
            return False
        if np.linalg.norm(x + x.conj().T) >= tol or abs(np.trace(x)) >= tol:
            return False
        return not (self.is_real and np.abs(np.imag(x)).max() >= tol)

    def check_group(self, g, tol=EPS_U):
        if not self.is_group_element(g, tol):
            raise ValueError(f"matrix is not an element of {self.name}")
        return np.asarray(g)

    def check_algebra(self, x, tol=EPS_U):
        if not self.is_algebra_element(x, tol):
            raise ValueError(f"matrix is not an element of the Lie algebra of {self.name}")
        return np.asarray(x)

    def _clean(self, m):
        return m.real.copy() if self.is_real else m

    # -- coordinates --------------------------------------------------------

    def vec(self, x) -> np.ndarray:
        """Coordinates of an algebra element in the orthonormal basis.

        Since the basis is orthonormal these are also the coordinates of
        psi(X) = pair(X, .) in the dual basis.
        """
        x = np.asarray(x)
        return -self.form_scale * np.real(np.einsum("iab,...ba->...i", self.basis, x))

    def mat(self, v) -> np.ndarray:
        m = np.tensordot(np.asarray(v, dtype=float), self.basis, axes=(-1, 0))
        return self._clean(m)

    psi = vec

    # -- brackets and forms -------------------------------------------------

    def pair(self, x, y) -> float:
        return float(-self.form_scale * np.real(np.trace(np.asarray(x) @ np.asarray(y))))

    def ad_bracket(self, x, y):
        x, y = np.asarray(x), np.asarray(y)
        return x @ y - y @ x

    def adjoint(self, g, x):
        g = np.asarray(g)
        return self._clean(g @ np.asarray(x) @ g.conj().T)

    def _ad_direct(self, x):
        brs = np.array([x @ e - e @ x for e in self.basis])
        return self.vec(brs).T

    def ad_matrix(self, x) -> np.ndarray:
        """Real skew matrix of Y -> [X, Y] in basis coordinates."""
        return np.tensordot(self.vec(x), self._ad_basis, axes=(0, 0))

    def ad_matrix_vec(self, v) -> np.ndarray:
        return np.tensordot(np.asarray(v, dtype=float), self._ad_basis, axes=(0, 0))

    def Ad_matrix(self, g) -> np.ndarray:
        """Real orthogonal matrix of Ad(g) in basis coordinates."""
        g = np.asarray(g)
        conj = g @ self.basis @ g.conj().T
        return self.vec(conj).T

    # -- exponential and logarithm -------------------------------------------

    def exp(self, x):
        x = np.asarray(x)
        w, v = np.linalg.eigh(1j * x)
        return self._clean((v * np.exp(-1j * w)) @ v.conj().T)

    def exp_vec(self, v):
        return self.exp(self.mat(v))

    def _phases(self, g):
        t, q = linalg.schur(np.asarray(g, dtype=complex), output="complex")
        return np.angle(np.diag(t)) / TWO_PI, q

    def log_in_O(self, g):
        """The unique logarithm of ``g`` inside O.

        Raises NotInB when ``g`` is not in B = exp(O) (for SO(3): when the
        rotation angle is pi).
        """
        nu, q = self._phases(g)
        if self.family == "SU":
            m = int(np.rint(nu.sum()))
            order = np.argsort(-nu, kind="stable")
            if m > 0:
                nu[order[:m]] -= 1.0
            elif m < 0:
                nu[order[len(nu) + m:]] += 1.0
            spread = nu.max() - nu.min()
            if spread > 1.0 - EPS_REG:
                raise NotInB(f"eigenphase spread {spread:.12g} is not below 1")
        else:
            if np.abs(nu).max() > 0.5 - EPS_REG:
                raise NotInB("rotation angle pi is outside the domain")
        x = (q * (TWO_PI * 1j * nu)) @ q.conj().T
        x = 0.5 * (x - x.conj().T)
        x = x - np.trace(x) / self.size * np.eye(self.size)
        return self._clean(x)

    # -- spectra and regularity ----------------------------------------------

    def ad_spectrum(self, x) -> np.ndarray:
        """Eigenvalues 2 pi i nu of ad(X), sorted by imaginary part."""
        w = np.linalg.eigvalsh(1j * self.ad_matrix(x))
        return -1j * np.sort(w)[::-1]

    def ad_nu(self, x) -> np.ndarray:
        return np.imag(self.ad_spectrum(x)) / TWO_PI

    def is_exp_regular(self, x) -> bool:
        """False iff ad(X) has an eigenvalue 2 pi i k with k a nonzero integer."""
        regular = True
        for nu in self.ad_nu(x):
            k = np.rint(nu)
            if k == 0:
                continue
            d = abs(nu - k)
            if d < EPS_WALL:
                regular = False
            elif d < EPS_REG:
                raise BoundaryAmbiguous(f"ad-eigenvalue parameter {nu!r} is within {EPS_REG} of {int(k)}")
        return regular

    def in_O(self, x) -> bool:
        """True iff every ad-eigenvalue 2 pi i nu has |nu| < 1."""
        top = np.abs(self.ad_nu(x)).max()
        d = top - 1.0
        if abs(d) < EPS_WALL:
            return False
        if abs(d) < EPS_REG:
            raise BoundaryAmbiguous(f"largest |nu| = {top!r} is within {EPS_REG} of 1")
        return bool(d < 0)

    # -- derivative of exp ---------------------------------------------------

    def _ad_function(self, x, func):
        h = 1j * self.ad_matrix(x)
        w, v = np.linalg.eigh(h)
        return np.real((v * func(-1j * w)) @ v.conj().T)

    def dexp_right(self, x) -> np.ndarray:
        """Matrix of Y -> (d/dt exp(X + tY)) exp(-X), i.e. (e^ad - 1)/ad."""
        return self._ad_function(x, _phi1)

    def dexp_left(self, x) -> np.ndarray:
        """Matrix of Y -> exp(-X) d/dt exp(X + tY), i.e. (1 - e^-ad)/ad."""
        return self._ad_function(x, lambda z: _phi1(-z))

    def dexp(self, x, y):
        """Tangent vector at exp(X) of the curve t -> exp(X + tY), as a matrix."""
        u = self.mat(self.dexp_left(x) @ self.vec(y))
        return self.exp(x) @ u

    # -- random elements -----------------------------------------------------

    def random_element(self, rng) -> np.ndarray:
        rng = np.random.default_rng(rng)
        if self.family == "SO":
            return special_ortho_group.rvs(3, random_state=rng)
        u = unitary_group.rvs(self.size, random_state=rng)
        det = np.linalg.det(u)
        return u / det ** (1.0 / self.size)

    def random_algebra(self, rng, scale=1.0) -> np.ndarray:
        rng = np.random.default_rng(rng)
        return self.mat(scale * rng.standard_normal(self.dim))

    def random_in_O(self, rng, margin=0.05) -> np.ndarray:
        """A random element of O with max |nu| at most 1 - margin."""
        rng = np.random.default_rng(rng)
        x = self.random_algebra(rng)
        top = np.abs(self.ad_nu(x)).max()
        if self.family == "SO":
            # the domain for SO(3) is the smaller set theta < pi, i.e. |nu| < 1/2
            limit = 0.5 - margin / 2
        else:
            limit = 1.0 - margin
        return x * (rng.uniform(0.0, limit) / top)

    def rotation_angle(self, r) -> float:
        """SO(3) only: angle in [0, pi] of a rotation matrix."""
        c = (np.trace(np.real(r)) - 1.0) / 2.0
        return float(np.arccos(np.clip(c, -1.0, 1.0)))
