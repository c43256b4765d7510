from __future__ import annotations

import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st

from soergelkit.coxeter import CoxeterMatrix, default_system
from soergelkit.hecke import (
    ONE,
    QUAD,
    V,
    VINV,
    ZERO,
    HeckeAlgebra,
    LaurentPoly,
    MuBlock,
    decompose_quantum,
    quantum_integer,
)

from oracles import Dihedral, to_laurent
from support import elem, hecke, system




def P(d: dict[int, int]) -> LaurentPoly:
    return LaurentPoly(d)



@pytest.mark.parametrize("m", [2, 3, 4, 5, 6])
def test_kl_basis_matches_bar_invariance_solve(m):
    W = default_system(CoxeterMatrix.from_rows([[1, m], [m, 1]]))
    H = HeckeAlgebra(W)
    D = Dihedral(m)
    for w in D.elements:
        oracle = {W.from_word(D.word(y)): to_laurent(p) for y, p in D.kl_by_linear_solve(w).items()}
        assert H.kl(W.from_word(D.word(w))).terms == oracle


@pytest.mark.parametrize("m", [3, 4, 6])
def test_dihedral_model_agrees_on_standard_products(m):
    W = default_system(CoxeterMatrix.from_rows([[1, m], [m, 1]]))
    H = HeckeAlgebra(W)
    D = Dihedral(m)
    for w in D.elements:
        for s in (0, 1):
            ours = H.times_generator(H.basis(W.from_word(D.word(w))), s)
            theirs = D.mult_s({w: sympy.Integer(1)}, s)
            assert ours.terms == {W.from_word(D.word(u)): to_laurent(p) for u, p in theirs.items()}


# -- standard basis and bar ----------------------------------------------------------------


def test_quadratic_relation(A2):
    H = hecke("A2")
    s = A2.gen(0)
    sq = H.std_mult(H.basis(s), H.basis(s))
    assert sq.terms == {A2.identity: ONE, s: QUAD}


def test_identity_is_neutral_and_length_additive_product(A2):
    H = hecke("A2")
    for w in A2.enumerate():
        assert H.std_mult(H.basis(A2.identity), H.basis(w)) == H.basis(w)
    assert H.std_mult(H.basis(A2.gen(0)), H.basis(A2.gen(1))) == H.basis(elem(A2, "st"))


def test_bar_examples(A2):
    H = hecke("A2")
    assert H.bar(H.basis(A2.identity)) == H.basis(A2.identity)
    s = A2.gen(0)
    assert H.bar(H.basis(s)).terms == {s: ONE, A2.identity: V - VINV}


@pytest.mark.parametrize("name", ["A3", "I2(5)"])
def test_standard_basis_independent_of_reduced_word(name):
    W = system(name)
    H = hecke(name)
    for w in W.enumerate():
        for rw in W.reduced_words(w)[:6]:
            assert H.from_word(rw) == H.basis(w)


laurent = st.dictionaries(st.integers(-3, 3), st.integers(-4, 4)).map(LaurentPoly)


@st.composite
def b2_elements(draw):
    W = system("B2")
    els = W.enumerate()
    terms = draw(st.dictionaries(st.sampled_from(range(len(els))), laurent, max_size=4))
    return hecke("B2").element({els[i]: p for i, p in terms.items() if p})


@given(b2_elements(), b2_elements())
def test_bar_is_an_involutive_ring_homomorphism(a, b):
    H = hecke("B2")
    assert H.bar(H.bar(a)) == a
    assert H.bar(a + b) == H.bar(a) + H.bar(b)
    assert H.bar(H.std_mult(a, b)) == H.std_mult(H.bar(a), H.bar(b))


@given(laurent, laurent)
def test_laurent_bar_and_arithmetic(p, q):
    assert p.bar().bar() == p
    assert (p * q).bar() == p.bar() * q.bar()
    assert (p + q) - q == p
    assert all(c for _, c in (p * q).items())


# -- Kazhdan-Lusztig basis ------------------------------------------------------------------


def test_kl_examples(A2):
    H = hecke("A2")
    s = A2.gen(0)
    assert H.kl(s).terms == {s: ONE, A2.identity: V}
    assert H.kl(A2.identity) == H.basis(A2.identity)
    top = elem(A2, "sts")
    assert H.kl(top).terms == {y: LaurentPoly.monomial(3 - A2.length(y)) for y in A2.enumerate()}


@pytest.mark.parametrize("name", ["A3", "B3", "H3", "Atilde2"])
def test_kl_unitriangular_positive_bar_invariant(name):
    W = system(name)
    H = hecke(name)
    els = W.enumerate(None if W.is_finite() else 5)
    for w in els:
        C = H.kl(w)
        assert C.coefficient(w) == ONE
        for y, p in C.terms.items():
            if y != w:
                assert p.min_degree() >= 1 and p.is_nonnegative()
                assert W.bruhat_leq(y, w)
        if W.length(w) <= 6:
            assert H.bar(C) == C


def test_kl_zero_off_the_bruhat_ideal(A2):
    H = hecke("A3")
    W = system("A3")
    for w in W.enumerate():
        for y in W.enumerate():
            if not W.bruhat_leq(y, w):
                assert H.kl_poly(y, w) == ZERO


# -- structure constants ---------------------------------------------------------------------


def test_mu_examples(A2):
    H = hecke("A2")
    s = A2.gen(0)
    m = H.mu(s, s)
    assert m == {s: V + VINV}
    assert A2.identity not in m
    for y in A2.enumerate():
        assert H.mu(A2.identity, y) == {y: ONE}


def test_mu_with_ascent_generator_is_integral():
    W = system("A3")
    H = hecke("A3")
    for x in W.enumerate():
        for s in range(W.rank):
            if W.length(W.rmul(x, s)) > W.length(x):
                for z, p in H.mu(x, W.gen(s)).items():
                    assert p.degrees() == [0] and p.coeff(0) > 0


@pytest.mark.parametrize("name", ["A2", "B2", "I2(5)", "A3"])
def test_bulk_structure_constants_match_back_substitution(name):
    H = hecke(name)
    for block in H.structure_constants():
        slow = H.mu_row(block.x, block.ys)
        for yi, y in enumerate(block.ys):
            assert block.row(yi) == slow[y]


def test_bulk_structure_constants_on_affine_truncation():
    W = system("Atilde1")
    H = hecke("Atilde1")
    els = W.enumerate(6)
    for block in H.structure_constants(els, els):
        slow = H.mu_row(block.x, block.ys)
        for yi, y in enumerate(block.ys):
            assert block.row(yi) == slow[y]
    with pytest.raises(ValueError):
        next(H.structure_constants())


def test_bulk_unimodality_flags_agree_with_greedy_decomposition():
    H = hecke("B2")
    for block in H.structure_constants():
        flagged = set(block.not_unimodal())
        for yi, zi in block.nonzero():
            assert ((yi, zi) in flagged) == (decompose_quantum(block.poly(yi, zi)) is None)


@pytest.mark.parametrize(
    "poly,unimodal",
    [
        ({-1: 1, 1: 1}, True),
        ({-2: 1, 0: 2, 2: 1}, True),
        ({-2: 1, 2: 1}, False),
        ({-2: -1, 2: -1}, False),
        ({0: -1}, False),
        ({-1: 1, 0: 1}, False),
    ],
)
def test_bulk_unimodality_on_handmade_polynomials(poly, unimodal):
    width = 5
    coeffs = np.zeros((1, 1, width), dtype=np.int64)
    for e, c in poly.items():
        coeffs[0, 0, e + 2] = c
    block = MuBlock(None, [None], [None], coeffs, 2)
    assert (block.not_unimodal() == []) == unimodal
    assert (decompose_quantum(P(poly)) is not None) == unimodal


# -- inverse KL, pairing, characters ---------------------------------------------------------


def test_inverse_kl_examples(A2):
    H = hecke("A2")
    s = A2.gen(0)
    g = H.inverse_kl(s)
    assert g == {s: ONE, A2.identity: -V}
    for w in A2.enumerate():
        assert H.inverse_kl(w)[w] == ONE


def test_inverse_kl_inverts_the_kl_matrix():
    W = system("B2")
    H = hecke("B2")
    for w in W.enumerate():
        back = H.element({})
        for y, g in H.inverse_kl(w).items():
            back = back + H.kl(y).scale(g)
        assert back == H.basis(w)


def test_pairing_and_hom_formula(A2):
    H = hecke("A2")
    s = A2.gen(0)
    assert H.pairing(H.basis(s), H.basis(s)) == ONE
    els = A2.enumerate()
    for x in els:
        for y in els:
            p = H.hom_formula(x, y)
            if x == y:
                assert p.coeff(0) == 1
            else:
                assert p.coeff(0) == 0
            assert p.is_nonnegative() and (not p or p.min_degree() >= 0)


def test_characters_and_predicted_multiplicities(A2):
    H = hecke("A2")
    s = A2.gen(0)
    assert H.bs_character([0]).terms == {s: ONE, A2.identity: V}
    assert H.predicted_multiplicities([0]) == {s: ONE}
    assert H.bs_character([]) == H.basis(A2.identity)
    assert H.predicted_multiplicities([0, 0]) == {s: V + VINV}


def test_unimodality_examples(A2):
    H = hecke("A2")
    s = A2.gen(0)
    rep = H.unimodality_check(s, s)
    assert rep.passed and rep.decompositions == {"s1": {2: 1}}
    assert decompose_quantum(ZERO) == {}
    assert decompose_quantum(quantum_integer(4) + quantum_integer(2)) == {4: 1, 2: 1}


@given(st.dictionaries(st.integers(1, 6), st.integers(1, 3)))
def test_quantum_decomposition_roundtrip(mults):
    p = ZERO
    for m, c in mults.items():
        p = p + quantum_integer(m) * c
    assert decompose_quantum(p) == mults
