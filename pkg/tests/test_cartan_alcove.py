import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from moduli_poisson.cartan_alcove import (EPS_MULT, TorusPoint, alcove_table, chamber_representative,
                                          class_dim, exp_orbit_fiber, in_P_tilde, so3_domain_membership,
                                          stabilizer_type, su3_edge_point)
from moduli_poisson.errors import BoundaryAmbiguous
from moduli_poisson.lie_core import LieGroup


def rank_oracle(M, tol=1e-8):
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > tol))


def orbit_dim_oracle(G, t):
    return rank_oracle(G.ad_matrix(t.lift()))


def class_dim_oracle(G, t):
    # dimension of the conjugacy class of g = rank of Ad(g) - Id
    g = G.exp(t.lift())
    return rank_oracle(G.Ad_matrix(g) - np.eye(G.dim))


def test_torus_point_requires_trace_zero():
    with pytest.raises(ValueError):
        TorusPoint((0.3, 0.1))
    assert TorusPoint.of(-0.2, 0.2).nu == (0.2, -0.2)


def test_example_table_su3():
    # regular: flag manifold (6, 6); wall: CP^2 (4, 4); edge: fibre of dim 2 over CP^2;
    # vertices: orbits of dim 4 collapse to central points
    rows = alcove_table(LieGroup.su(3), [0.1, 0.2, 0.25, 0.4, 0.45, 0.5, 0.6])
    by = {}
    for r in rows:
        by.setdefault(r["family"], set()).add((r["orbit_dim"], r["class_dim"], r["fiber_dim"]))
    assert by["regular"] == {(6, 6, 0)}
    assert by["wall"] == {(4, 4, 0)}
    assert by["edge"] == {(6, 4, 2)}
    assert by["vertex_M1"] == {(4, 0, 4)}
    assert by["vertex_M2"] == {(4, 0, 4)}


def test_table_against_rank_oracle():
    G = LieGroup.su(3)
    for r in alcove_table(G, np.linspace(0.05, 0.65, 13)):
        t = TorusPoint(tuple(r["nu"]))
        assert r["orbit_dim"] == orbit_dim_oracle(G, t)
        assert r["class_dim"] == class_dim_oracle(G, t)


def test_su2_singular_set_is_half():
    rows = alcove_table(LieGroup.su(2), [0.1, 0.25, 0.49, 0.5])
    inside = {r["param"]: r["in_domain"] for r in rows}
    assert inside == {0.1: True, 0.25: True, 0.49: True, 0.5: False}
    assert [r["class_dim"] for r in rows] == [2, 2, 2, 0]


def test_so3_wall_at_half_turn():
    G = LieGroup.so3()
    rows = alcove_table(G, [0.1, 0.2, 0.25])
    assert [r["in_domain"] for r in rows] == [True, True, False]
    assert rows[-1]["param"] == pytest.approx(np.pi)
    assert rows[-1]["class_dim"] == 2
    x = G.basis[0] * np.pi / np.linalg.eigvalsh(-1j * G.basis[0]).max()
    assert so3_domain_membership(G, x) is False
    assert so3_domain_membership(G, 0.9 * x) is True


@pytest.mark.parametrize("nu,partition,dim_stab,orbit", [
    ((0.3, 0.0, -0.3), (1, 1, 1), 2, 6),
    ((0.2, 0.2, -0.4), (2, 1), 4, 4),
    ((0.0, 0.0, 0.0), (3,), 8, 0),
])
def test_stabilizer_types(nu, partition, dim_stab, orbit):
    st_ = stabilizer_type(TorusPoint(nu))
    assert (st_.partition, st_.dim_stab, st_.orbit_dim) == (partition, dim_stab, orbit)


def test_multiplicity_tolerance_band():
    with pytest.raises(BoundaryAmbiguous):
        stabilizer_type(TorusPoint((0.2 + 3 * EPS_MULT, 0.2, -0.4 - 3 * EPS_MULT)))
    assert stabilizer_type(TorusPoint((0.2 + 1e-9, 0.2, -0.4 - 1e-9))).partition == (2, 1)


def test_in_P_tilde():
    assert in_P_tilde(TorusPoint.of(0.3, 0.0, -0.3))
    assert not in_P_tilde(su3_edge_point(0.45))
    assert not in_P_tilde(TorusPoint.of(0.5, -0.5))
    with pytest.raises(ValueError):
        in_P_tilde(TorusPoint((-0.1, 0.1)))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31), name=st.sampled_from(["SU(2)", "SU(3)"]))
def test_chamber_representative_is_conjugation_invariant(seed, name):
    G = LieGroup.from_name(name)
    rng = np.random.default_rng(seed)
    x, g = G.random_algebra(rng), G.random_element(rng)
    a = chamber_representative(G, x).nu
    b = chamber_representative(G, g @ x @ g.conj().T).nu
    np.testing.assert_allclose(a, b, atol=1e-10)
    assert list(a) == sorted(a, reverse=True)


@settings(max_examples=30, deadline=None)
@given(nu=st.floats(0.02, 0.48))
def test_regular_classes_have_zero_fibre(nu):
    # exp is a diffeomorphism orbit -> class inside P~
    t = TorusPoint.of(nu, 0.0, -nu)
    if abs(nu - 1 / 3) < 1e-3:
        return
    of = exp_orbit_fiber(t)
    assert of.fiber_dim == 0
    assert of.class_dim == class_dim_oracle(LieGroup.su(3), t)


def test_so3_class_dims():
    assert class_dim(TorusPoint((0.1, -0.1), "SO")) == 2
    assert class_dim(TorusPoint((0.5, -0.5), "SO")) == 0
