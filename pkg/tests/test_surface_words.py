import itertools
import time
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from moduli_poisson.errors import MissingGenerator
from moduli_poisson.lie_core import LieGroup
from moduli_poisson.surface_words import (BarChain2, SurfaceData, Word, a, act, build_chain_c,
                                          build_chain_c_tilde, corestrict, evaluate, fox_jacobian,
                                          fox_matrix, gamma, group_presentation, groupoid_presentation,
                                          random_assignment, relator, relator_tilde, restrict,
                                          restrict_corestrict, x, y, z)

SURFACES = [SurfaceData(l, n) for l in range(4) for n in range(5) if l > 0 or n >= 3]

letters = st.lists(st.integers(1, 4).flatmap(lambda g: st.sampled_from([g, -g])), max_size=12)


def reduce_oracle(seq):
    # repeated scanning until no adjacent inverse pair remains
    seq = list(seq)
    changed = True
    while changed:
        changed = False
        for i in range(len(seq) - 1):
            if seq[i] == -seq[i + 1]:
                del seq[i:i + 2]
                changed = True
                break
    return tuple(seq)


def bar_boundary_oracle(chain):
    out = Counter()
    for m, u, v in chain.cells():
        uv = reduce_oracle(u.letters + v.letters)
        for w, sgn in ((v.letters, 1), (uv, -1), (u.letters, 1)):
            if w:
                out[w] += sgn * m
    return {k: v for k, v in out.items() if v}


@given(letters, letters)
def test_word_product_and_inverse(u, v):
    U, V = Word(tuple(u)), Word(tuple(v))
    assert (U * V).letters == reduce_oracle(u + v)
    assert not (U * U.inverse())
    assert (U * V).inverse() == V.inverse() * U.inverse()


@given(letters, letters, letters)
def test_word_product_associative(u, v, w):
    U, V, W = (Word(tuple(t)) for t in (u, v, w))
    assert (U * V) * W == U * (V * W)


def test_word_json_roundtrip():
    w = Word((1, -2, 3))
    assert Word.from_json(w.to_json()) == w
    with pytest.raises(ValueError):
        Word((0,))


def test_surface_validation():
    with pytest.raises(ValueError):
        SurfaceData(0, 2)
    with pytest.raises(ValueError):
        SurfaceData(-1, 3)
    s = SurfaceData(2, 3)
    assert s.n_group_generators == 7 and s.n_groupoid_generators == 10


def test_relator_shape():
    s = SurfaceData(1, 2)
    assert relator(s).letters == (x(1), y(1), -x(1), -y(1), z(s, 1), z(s, 2))
    assert relator_tilde(s).letters == (1, 2, -1, -2, gamma(s, 1), a(s, 1), -gamma(s, 1),
                                        gamma(s, 2), a(s, 2), -gamma(s, 2))


@pytest.mark.parametrize("s", SURFACES, ids=str)
def test_relator_tilde_is_composable_loop_at_base(s):
    pres = groupoid_presentation(s)
    w = pres.relator
    assert pres.is_composable(w)
    assert pres.word_source(w) == 0 and pres.word_target(w) == 0


@pytest.mark.parametrize("order", ["left", "right"])
@pytest.mark.parametrize("s", SURFACES, ids=str)
def test_chain_boundaries_exact(s, order):
    c = build_chain_c(s, order)
    expect = Counter({relator(s).letters: 1})
    for k in range(1, s.boundaries + 1):
        expect[(z(s, k),)] -= 1
    assert bar_boundary_oracle(c) == {k: v for k, v in expect.items() if v}
    ct = build_chain_c_tilde(c, s)
    expect_t = Counter({relator_tilde(s).letters: 1})
    for k in range(1, s.boundaries + 1):
        expect_t[(a(s, k),)] -= 1
    assert bar_boundary_oracle(ct) == {k: v for k, v in expect_t.items() if v}
    for m, u, v in ct.cells():
        assert isinstance(m, int)


def test_chain_construction_is_fast():
    t0 = time.perf_counter()
    for s in SURFACES:
        for order in ("left", "right"):
            c = build_chain_c(s, order)
            c.boundary()
            build_chain_c_tilde(c, s).boundary()
    assert time.perf_counter() - t0 < 1.0


def test_chain_json_roundtrip():
    c = build_chain_c_tilde(build_chain_c(SurfaceData(2, 2)), SurfaceData(2, 2))
    assert BarChain2.from_json(c.to_json()) == c
    assert c.dumps() == BarChain2.from_json(c.to_json()).dumps()
    assert (c - c) == BarChain2()


def test_evaluate_and_missing_generator(su2, rng):
    s = SurfaceData(1, 1)
    phi = random_assignment(su2, group_presentation(s), rng)
    w = Word((1, -2, 3))
    np.testing.assert_allclose(evaluate(w, phi), phi[1] @ phi[2].conj().T @ phi[3])
    with pytest.raises(MissingGenerator):
        evaluate(Word((4,)), phi)
    with pytest.raises(MissingGenerator):
        fox_matrix(su2, w, 4, phi)


def test_restrict_of_groupoid_relator(su3, rng):
    s = SurfaceData(1, 2)
    phi_t = random_assignment(su3, groupoid_presentation(s), rng)
    phi = restrict(phi_t, s)
    np.testing.assert_allclose(evaluate(relator(s), phi), evaluate(relator_tilde(s), phi_t), atol=1e-12)
    back = restrict_corestrict(restrict_corestrict(phi, s, "group"), s, "groupoid")
    for g in phi:
        np.testing.assert_allclose(back[g], phi[g], atol=1e-14)


def test_action_conjugates_relator_by_theta0(su2, rng):
    s = SurfaceData(1, 2)
    pres = groupoid_presentation(s)
    phi_t = random_assignment(su2, pres, rng)
    thetas = [su2.random_element(rng) for _ in range(3)]
    moved = act(thetas, phi_t, pres)
    r0 = evaluate(pres.relator, phi_t)
    np.testing.assert_allclose(evaluate(pres.relator, moved), thetas[0] @ r0 @ thetas[0].conj().T,
                               atol=1e-12)
    for k in (1, 2):
        np.testing.assert_allclose(moved[a(s, k)], thetas[k] @ phi_t[a(s, k)] @ thetas[k].conj().T,
                                   atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31), w=letters.filter(bool), name=st.sampled_from(["SU(2)", "SU(3)", "SO(3)"]))
def test_fox_jacobian_against_finite_differences(seed, w, name):
    G = LieGroup.from_name(name)
    rng = np.random.default_rng(seed)
    gens = [1, 2, 3, 4]
    phi = {g: G.random_element(rng) for g in gens}
    word = Word(tuple(w))
    if not word:
        return
    J = fox_jacobian(G, word, phi, gens)
    u = rng.standard_normal(len(gens) * G.dim)
    d, h = G.dim, 1e-6

    def val(t):
        return evaluate(word, {g: G.exp_vec(t * u[(g - 1) * d:g * d]) @ phi[g] for g in gens})

    fd = G.vec((val(h) - val(-h)) @ val(0).conj().T / (2 * h))
    np.testing.assert_allclose(J @ u, fd, atol=1e-7)


def test_fundamental_formula_of_fox_calculus(su2, rng):
    # sum_g (dw/dg)(1 - g) = 1 - w, evaluated through Ad
    gens = [1, 2, 3]
    phi = {g: su2.random_element(rng) for g in gens}
    w = Word((1, 2, -1, 3, -2, 3))
    J = fox_jacobian(su2, w, phi, gens)
    d0 = np.vstack([np.eye(3) - su2.Ad_matrix(phi[g]) for g in gens])
    np.testing.assert_allclose(J @ d0, np.eye(3) - su2.Ad_matrix(evaluate(w, phi)), atol=1e-12)
