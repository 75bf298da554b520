"""Torus, Weyl chamber and alcove geometry for SU(n) and SO(3).

A torus point is the vector nu of eigenvalues of X / (2 pi i), sorted
descending.  SO(3) is handled through its double cover SU(2): an so(3)
element rotating by theta corresponds to nu = (theta / 4 pi, -theta / 4 pi).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BoundaryAmbiguous
from .lie_core import EPS_REG, EPS_U, EPS_WALL, LieGroup, TWO_PI

EPS_MULT = 1e-7


@dataclass(frozen=True)
class TorusPoint:
    nu: tuple
    family: str = "SU"

    def __post_init__(self):
        nu = tuple(float(v) for v in self.nu)
        object.__setattr__(self, "nu", nu)
        if abs(sum(nu)) > EPS_U * max(1, len(nu)):
            raise ValueError(f"torus point {nu} is not trace free")

    @classmethod
    def of(cls, *nu, family="SU"):
        return cls(tuple(sorted(nu, reverse=True)), family)

    @property
    def n(self):
        return len(self.nu)

    def lift(self) -> np.ndarray:
        """The diagonal algebra element 2 pi i diag(nu) (in the SU(n) picture)."""
        return TWO_PI * 1j * np.diag(self.nu)


@dataclass(frozen=True)
class StabilizerType:
    partition: tuple
    dim_stab: int
    orbit_dim: int


@dataclass(frozen=True)
class OrbitFiber:
    orbit_dim: int
    class_dim: int
    fiber_dim: int


def chamber_representative(G: LieGroup, x) -> TorusPoint:
    w = np.linalg.eigvalsh(-1j * np.asarray(x)) / TWO_PI
    if G.family == "SO":
        nu = w.max() / 2.0
        return TorusPoint((nu, -nu), "SO")
    return TorusPoint(tuple(np.sort(w)[::-1]), "SU")


def _wall_decision(d):
    """Classify a signed distance d to a wall: True if strictly inside."""
    if abs(d) < EPS_WALL:
        return False
    if abs(d) < EPS_REG:
        raise BoundaryAmbiguous(f"distance {d!r} to the wall is inside the tolerance band")
    return bool(d > 0)


def in_P_tilde(t: TorusPoint) -> bool:
    """nu_1 >= ... >= nu_n and nu_1 - nu_n < 1."""
    nu = np.array(t.nu)
    if np.any(np.diff(nu) > EPS_MULT):
        raise ValueError("torus point is not sorted (not a chamber representative)")
    return _wall_decision(1.0 - (nu[0] - nu[-1]))


def _group_sorted(vals, circular=False):
    """Multiplicities of a sorted (descending) sequence with tolerance EPS_MULT."""
    vals = list(vals)
    gaps = [vals[i] - vals[i + 1] for i in range(len(vals) - 1)]
    if circular:
        gaps.append(vals[-1] + 1.0 - vals[0])
    for g in gaps:
        if EPS_MULT <= g < 10 * EPS_MULT:
            raise BoundaryAmbiguous(f"eigenvalue gap {g:.3g} is too close to the grouping tolerance")
    breaks = [g >= EPS_MULT for g in gaps]
    if not circular:
        parts, size = [], 1
        for b in breaks:
            if b:
                parts.append(size)
                size = 1
            else:
                size += 1
        parts.append(size)
        return tuple(sorted(parts, reverse=True))
    if not any(breaks):
        return (len(vals),)
    # rotate so that a break sits at the end, then group linearly
    start = breaks.index(True) + 1
    order = breaks[start:] + breaks[:start]
    parts, size = [], 1
    for b in order[:-1]:
        if b:
            parts.append(size)
            size = 1
        else:
            size += 1
    parts.append(size)
    return tuple(sorted(parts, reverse=True))


def _dims_from_partition(parts, family):
    if family == "SO":
        # stabiliser in SO(3) of a nonzero element is a circle
        dim_stab = 3 if parts == (2,) else 1
        return dim_stab, 3 - dim_stab
    n = sum(parts)
    dim_stab = sum(p * p for p in parts) - 1
    return dim_stab, n * n - 1 - dim_stab


def stabilizer_type(t: TorusPoint) -> StabilizerType:
    parts = _group_sorted(t.nu)
    dim_stab, orbit_dim = _dims_from_partition(parts, t.family)
    return StabilizerType(parts, dim_stab, orbit_dim)


def class_dim(t: TorusPoint) -> int:
    """Dimension of the conjugacy class of exp(2 pi i diag(nu)) in the group."""
    if t.family == "SO":
        # rotation angle 4 pi nu; the class is a point iff the rotation is trivial
        frac = (2.0 * t.nu[0]) % 1.0
        d = min(frac, 1.0 - frac)
        if EPS_MULT <= d < 10 * EPS_MULT:
            raise BoundaryAmbiguous("rotation angle too close to a multiple of 2 pi")
        return 0 if d < EPS_MULT else 2
    mod = np.sort(np.mod(np.array(t.nu), 1.0))[::-1]
    parts = _group_sorted(mod, circular=True)
    dim_stab, orbit_dim = _dims_from_partition(parts, t.family)
    return orbit_dim


def exp_orbit_fiber(t: TorusPoint) -> OrbitFiber:
    o = stabilizer_type(t).orbit_dim
    c = class_dim(t)
    return OrbitFiber(o, c, o - c)


def so3_domain_membership(G: LieGroup, x) -> bool:
    """True iff the rotation angle of X (in so(3)) lies in [0, pi)."""
    if G.family != "SO":
        raise ValueError("so(3) element required")
    theta = np.linalg.eigvalsh(-1j * np.asarray(x)).max()
    return _wall_decision(np.pi - theta)


def su3_edge_point(nu: float) -> TorusPoint:
    """The point (nu, 1 - 2 nu, nu - 1) on the edge nu_1 - nu_3 = 1 of the alcove."""
    return TorusPoint.of(nu, 1 - 2 * nu, nu - 1)


def alcove_table(G: LieGroup, grid) -> list:
    """Rows describing torus points of the standard families over a grid.

    SU(3): regular (nu, 0, -nu) for nu < 1/2, wall (nu, nu, -2 nu) for
    nu < 1/3 and edge (nu, 1 - 2 nu, nu - 1) for 1/3 < nu < 2/3, plus the
    two vertices.  SU(2): (nu, -nu).
    SO(3): rotation angle theta = 4 pi nu.
    """
    rows = []

    def add(family, t, param):
        st = stabilizer_type(t)
        of = exp_orbit_fiber(t)
        try:
            inside = in_P_tilde(t) if t.family == "SU" else _wall_decision(0.25 - t.nu[0])
        except BoundaryAmbiguous:
            inside = None
        rows.append({
            "family": family, "param": float(param), "nu": [float(v) for v in t.nu],
            "partition": list(st.partition), "orbit_dim": st.orbit_dim,
            "class_dim": of.class_dim, "fiber_dim": of.fiber_dim, "in_domain": inside,
        })

    if G.family == "SO":
        for nu in grid:
            add("rotation", TorusPoint((nu, -nu), "SO"), 4 * np.pi * nu)
    elif G.n == 2:
        for nu in grid:
            add("diag", TorusPoint.of(nu, -nu), nu)
    elif G.n == 3:
        for nu in grid:
            if nu < 0.5:
                add("regular", TorusPoint.of(nu, 0.0, -nu), nu)
            if nu < 1 / 3:
                add("wall", TorusPoint.of(nu, nu, -2 * nu), nu)
            if 1 / 3 < nu < 2 / 3:
                add("edge", su3_edge_point(nu), nu)
        add("vertex_M1", TorusPoint.of(1 / 3, 1 / 3, -2 / 3), 1 / 3)
        add("vertex_M2", TorusPoint.of(2 / 3, -1 / 3, -1 / 3), 2 / 3)
    else:
        for nu in grid:
            v = [nu] + [0.0] * (G.n - 2) + [-nu]
            add("regular", TorusPoint.of(*v), nu)
    return rows
