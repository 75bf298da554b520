import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from moduli_poisson import poisson_moduli as pm
from moduli_poisson.errors import NotInB, NotSmoothPoint, RejectionExhausted
from moduli_poisson.lie_core import LieGroup
from moduli_poisson.poisson_moduli import InvariantFunction, RepPoint
from moduli_poisson.surface_words import SurfaceData, Word, evaluate, relator, x, y, z


def test_free_sampling_solves_relation(group):
    s = SurfaceData(1, 2) if group.family == "SU" else SurfaceData(0, 3)
    rho = pm.sample_rep(group, s, 0)
    assert rho.relation_residual < 1e-10
    for X in rho.lifts:
        assert group.in_O(X)


def test_free_sampling_acceptance_su2():
    # B is dense in SU(2): essentially every Haar sample is accepted
    G, s = LieGroup.su(2), SurfaceData(1, 1)
    rng = np.random.default_rng(0)
    for _ in range(20):
        pm.sample_rep(G, s, rng, max_tries=1)


def test_sampling_errors(su2, monkeypatch):
    with pytest.raises(ValueError):
        pm.sample_rep(su2, SurfaceData(1, 0), 0)
    with pytest.raises(ValueError):
        pm.sample_rep(su2, SurfaceData(1, 1), 0, mode="constrained")

    def refuse(self, g):
        raise NotInB("refused")

    monkeypatch.setattr(LieGroup, "log_in_O", refuse)
    with pytest.raises(RejectionExhausted):
        pm.sample_rep(su2, SurfaceData(1, 1), 0, max_tries=5)


@pytest.mark.parametrize("name,shape,targets", [
    ("SU(2)", (1, 2), [(0.2, -0.2), (0.35, -0.35)]),
    ("SU(3)", (1, 1), [(0.3, 0.05, -0.35)]),
    ("SU(2)", (0, 4), [(0.1, -0.1), (0.15, -0.15), (0.2, -0.2), (0.3, -0.3)]),
    ("SO(3)", (1, 1), [(0.12, -0.12)]),
])
def test_constrained_sampling_hits_targets(name, shape, targets):
    G = LieGroup.from_name(name)
    rho = pm.sample_rep(G, SurfaceData(*shape), 3, "constrained", targets)
    assert rho.relation_residual < 1e-10
    np.testing.assert_allclose(np.array(pm.leaf_coordinates(rho)), np.array(targets), atol=1e-8)


def test_projection_is_idempotent_and_smooth(su2):
    s = SurfaceData(1, 2)
    rho = pm.sample_rep(su2, s, 1)
    leaf = pm.leaf_coordinates(rho)
    again = pm.project_to_leaf(rho, leaf)
    for g in rho.images:
        np.testing.assert_allclose(again.images[g], rho.images[g], atol=1e-12)
    # second differences of a Wilson function along a projected curve are O(t^2)
    u = pm.tangent_basis(rho)[:, 0]
    f = InvariantFunction.wilson(Word((x(1),)))
    ts = np.linspace(-1e-3, 1e-3, 7)
    vals = [f(pm.project_to_leaf(RepPoint(su2, s, pm._solve_last(su2, s, pm.perturb(rho, u, t))), leaf))
            for t in ts]
    second = np.diff(vals, 2)
    assert np.ptp(second) < 1e-9


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**31), word=st.lists(st.sampled_from([1, -1, 2, -2, 3, -3, 4]), min_size=1, max_size=6))
def test_wilson_gradient_matches_finite_differences(seed, word):
    G, s = LieGroup.su(2), SurfaceData(1, 2)
    rho = pm.sample_rep(G, s, seed)
    f = InvariantFunction.wilson(Word(tuple(word))) * InvariantFunction.wilson(Word((1, 2))) \
        + 2.0 * InvariantFunction.boundary_class(s, 1, 2)
    B = np.random.default_rng(seed).standard_normal((G.dim * 4, 3))
    np.testing.assert_allclose(pm.differential(f, rho, B), pm.differential(f, rho, B, h=1e-5), atol=1e-8)


def _menu(s):
    return pm.default_wilson_menu(s)


@pytest.mark.parametrize("shape", [(1, 1), (1, 2), (2, 1)])
def test_bracket_algebra(su2, shape):
    s = SurfaceData(*shape)
    rho = pm.sample_rep(su2, s, 4)
    f, g, h = _menu(s)[:3]
    fg = pm.poisson_bracket(f, g, rho)
    assert pm.poisson_bracket(f, f, rho) == 0.0
    assert pm.poisson_bracket(g, f, rho) == pytest.approx(-fg, abs=1e-12)
    # Leibniz rule
    lhs = pm.poisson_bracket(f, g * h, rho)
    rhs = fg * h(rho) + g(rho) * pm.poisson_bracket(f, h, rho)
    assert lhs == pytest.approx(rhs, abs=1e-10)
    assert pm.poisson_bracket(f, InvariantFunction.constant(3.0), rho) == pytest.approx(0.0, abs=1e-14)


def test_bracket_is_conjugation_invariant(su3):
    s = SurfaceData(1, 1)
    rho = pm.sample_rep(su3, s, 2)
    f, g = _menu(s)[:2]
    moved = rho.conjugate(su3.random_element(7))
    assert pm.poisson_bracket(f, g, moved) == pytest.approx(pm.poisson_bracket(f, g, rho), abs=1e-10)


def test_goldman_product_formula_genus_one(su2):
    # {tr A, tr B} is proportional to tr AB - tr A tr B / 2 with a universal constant
    s = SurfaceData(1, 1)
    ratios = [pm.goldman_ratio(pm.sample_rep(su2, s, seed)) for seed in range(8)]
    np.testing.assert_allclose(ratios, -1.0, atol=1e-9)


@pytest.mark.parametrize("name,shape", [("SU(2)", (1, 2)), ("SU(2)", (2, 1)), ("SU(3)", (1, 1)),
                                        ("SU(2)", (0, 4))])
def test_casimirs_and_flow_oracle(name, shape):
    G, s = LieGroup.from_name(name), SurfaceData(*shape)
    menu = _menu(s)
    for seed in range(3):
        rho = pm.sample_rep(G, s, seed)
        for k in range(1, s.boundaries + 1):
            assert pm.casimir_check(k, rho, menu) < 1e-6
            assert pm.casimir_check(k, rho, menu, index=2) < 1e-6
        f, g = menu[0], menu[1]
        assert abs(pm.poisson_bracket(f, g, rho) - pm.flow_bracket(f, g, rho, rng=seed)) < 1e-4
        projected = pm.flow_bracket(f, g, rho, t=1e-3, rng=seed, project=True)
        assert abs(pm.poisson_bracket(f, g, rho) - projected) < 1e-4


def test_jacobi_converges(su2):
    s = SurfaceData(1, 2)
    rho = pm.sample_rep(su2, s, 0)
    f, g, h = _menu(s)[:3]
    coarse = pm.jacobi_check(f, g, h, rho, step=1e-2)
    fine = pm.jacobi_check(f, g, h, rho, step=1e-3)
    assert fine < 1e-3
    assert fine < coarse / 10  # at least first order


def test_reducible_point_is_not_smooth(su2):
    s = SurfaceData(1, 1)
    d = lambda t: su2.exp(2j * np.pi * np.diag([t, -t]))
    images = {x(1): d(0.1), y(1): d(0.2)}
    images[z(s, 1)] = su2.identity()
    images[z(s, 1)] = evaluate(relator(s), images).conj().T
    rho = RepPoint(su2, s, images)
    assert not rho.is_smooth
    f, g = _menu(s)[:2]
    with pytest.raises(NotSmoothPoint):
        pm.poisson_bracket(f, g, rho)


def test_bracket_path_continuity(su2):
    s = SurfaceData(1, 1)
    f, g = _menu(s)[:2]
    path = [[(v, -v)] for v in np.linspace(0.1, 0.4, 13)]
    rows = pm.bracket_path(su2, s, f, g, path)
    vals = np.array([r["bracket"] for r in rows])
    assert all(r["smooth"] for r in rows)
    assert all(r["self_bracket"] == 0.0 for r in rows)
    assert max(r["casimir"] for r in rows) < 1e-6
    # continuity: second differences are much smaller than first differences
    assert np.abs(np.diff(vals, 2)).max() < 0.2 * np.abs(np.diff(vals)).max()


def test_bracket_path_flags_singular_points(su2):
    s = SurfaceData(1, 1)
    f, g = _menu(s)[:2]
    rows = pm.bracket_path(su2, s, f, g, [[(0.2, -0.2)], [(0.0, 0.0)]])
    assert rows[0]["smooth"]
    assert rows[1]["smooth"] is False and rows[1]["bracket"] is None
