from __future__ import annotations

import random
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from soergelkit.fmat import FMat
from soergelkit.graded import GradedMap
from soergelkit.hecke import ONE
from soergelkit.polyalg import PolynomialRing
from soergelkit.soergel import (
    InfiniteGroupError,
    SoergelCategory,
    bs_direct,
    poly_action,
)

from oracles import c_s, normal_form, times_left, times_right
from support import category, elem, hecke, system, word


@pytest.mark.parametrize("name", ["A2", "B2", "I2(5)", "H3"])
def test_forcing_rules_hold_in_the_bimodule(name):
    W = system(name)
    R = PolynomialRing(W)
    rng = random.Random(2024)
    for s in range(W.rank):
        for _ in range(50):
            f = R.random(rng, 3)
            # f . c_e = c_e . s(f) + c_s . d_s(f)
            lhs = normal_form(R, s, [(f, R.one())])
            rhs = normal_form(R, s, [(R.one(), R.act_gen(s, f))] + times_right(c_s(R, s), R.demazure(s, f)))
            assert lhs == rhs
            # f . c_s = c_s . f
            assert normal_form(R, s, times_left(f, c_s(R, s))) == normal_form(R, s, times_right(c_s(R, s), f))


def test_normal_form_detects_a_wrong_rule():
    W = system("A2")
    R = PolynomialRing(W)
    f = R.rho()
    lhs = normal_form(R, 0, [(f, R.one())])
    wrong = normal_form(R, 0, [(R.one(), f)])
    assert lhs != wrong


def base_form(R, s, x, y):
    """<l (x) r, l' (x) r'> = d_s(l l') r r', extended bilinearly."""
    out = R.zero()
    for l1, r1 in x:
        for l2, r2 in y:
            out = out + R.demazure(s, l1 * l2) * r1 * r2
    return out


def test_intersection_form_base_case_symbolically(A2):
    R = PolynomialRing(A2)
    s = 0
    ce = [(R.one(), R.one())]
    cs = c_s(R, s)
    assert base_form(R, s, ce, ce) == R.zero()
    assert base_form(R, s, ce, cs) == R.one()
    assert base_form(R, s, cs, cs) == R.root(s)


def test_module_form_matches_base_case(A2):
    M = category("A2").bs((0,))
    # degrees -1 (c_e) and +1 (c_s); <c_e, c_s> = 1 survives augmentation
    assert M.form_block(-1).to_rows() == [[1]]
    assert M.form_block(1).to_rows() == [[1]]
    assert category("A2").bs(()).form_block(0).to_rows() == [[1]]


# -- Bott-Samelson modules -------------------------------------------------------------------


def test_bs_single_letter_rho_action(A2):
    M = category("A2").bs((0,))
    real = A2.realization
    L = M.linear_op(real.rho, -1)
    assert L.to_rows() == [[real.pairing(real.rho, real.coroots[0])]]
    assert M.linear_op(real.rho, 1).rows == 0


def test_bs_empty_and_doubled_words(A2):
    cat = category("A2")
    E = cat.bs(())
    assert E.graded_dims() == {0: 1}
    assert all(E.op(i, 0).is_zero() for i in range(E.nops))
    assert cat.bs((0, 0)).graded_dims() == {-2: 1, 0: 2, 2: 1}


@pytest.mark.parametrize("name,length", [("A2", 4), ("B2", 4), ("H3", 3)])
def test_recursive_construction_matches_closed_formula(name, length):
    W = system(name)
    cat = category(name)
    for n in range(length + 1):
        for wd in product(range(W.rank), repeat=n):
            M, D = cat.bs(wd), bs_direct(W, wd)
            assert M.labels == D.labels
            for i in range(M.nops):
                for k in M.dims:
                    assert M.op(i, k) == D.op(i, k), (wd, i, k)


def _commuting(M) -> bool:
    for i in range(M.nops):
        for j in range(i):
            for k in M.dims:
                if M.op(i, k + 2) @ M.op(j, k) != M.op(j, k + 2) @ M.op(i, k):
                    return False
    return True


def _self_adjoint(M, xi) -> bool:
    for k in M.dims:
        if -k - 2 in M.dims and k + 2 in M.dims:
            lhs = M.linear_op(xi, k).T() @ M.form_block(k + 2)
            rhs = M.form_block(k) @ M.linear_op(xi, -k - 2)
            if lhs != rhs:
                return False
    return True


def _invariant_of_degree_four(R: PolynomialRing):
    W = R.W
    f = R.rho() * R.rho()
    out = R.zero()
    for w in W.enumerate():
        out = out + R.act(w, f)
    return out


@pytest.mark.parametrize("name", ["A2", "B2", "I2(5)"])
def test_bs_module_invariants(name):
    W = system(name)
    cat = category(name)
    inv = _invariant_of_degree_four(cat.R)
    assert inv and all(cat.R.act_gen(s, inv) == inv for s in range(W.rank))
    rng = random.Random(5)
    for n in range(1, 5):
        wd = tuple(rng.randrange(W.rank) for _ in range(n))
        M = cat.bs(wd)
        assert M.dim == 2**n
        assert _commuting(M)
        for k in M.dims:
            assert poly_action(M, inv, k).is_zero()
            if -k in M.dims:
                assert M.form_block(k).T() == M.form_block(-k)
        assert _self_adjoint(M, W.realization.rho)
        assert _self_adjoint(M, W.realization.roots[0])


def test_form_nondegenerate_on_reduced_words_of_A2(A2):
    cat = category("A2")
    for w in A2.enumerate():
        for rw in A2.reduced_words(w):
            M = cat.bs(rw)
            for k, n in M.dims.items():
                assert M.form_block(k).rank() == n


# -- indecomposable modules ------------------------------------------------------------------


def test_extract_examples(A2):
    cat = category("A2")
    assert cat.extract(A2.identity).module.graded_dims() == {0: 1}
    assert cat.extract(A2.gen(0)).module.graded_dims() == {-1: 1, 1: 1}
    assert cat.extract(elem(A2, "sts")).module.graded_dims() == {-3: 1, -1: 2, 1: 2, 3: 1}


@pytest.mark.parametrize("name", ["A2", "B2", "I2(5)", "A3"])
def test_extracted_modules_satisfy_the_invariants(name):
    W = system(name)
    cat = category(name)
    for w in W.enumerate():
        B = cat.extract(w).module
        lw = W.length(w)
        dims = B.graded_dims()
        assert dims == cat.predicted_dims(w)
        assert all(dims.get(-k) == n for k, n in dims.items())
        assert B.lowest_degree() == -lw and dims[-lw] == 1
        assert _commuting(B)
        for k, n in dims.items():
            assert B.form_block(k).rank() == n


@pytest.mark.parametrize("name", ["A2", "B2"])
def test_extracted_summand_is_an_idempotent_image(name):
    W = system(name)
    cat = category(name)
    for w in W.enumerate():
        S = cat.extract_Bw(w)
        e = S.idempotent
        assert e @ e == e
        assert e.commutes()
        assert S.projection @ S.inclusion == GradedMap.identity(S.module)


def _sum(maps):
    out = maps[0]
    for m in maps[1:]:
        out = out + m
    return out


def test_split_indecomposables_examples(A2):
    cat = category("A2")
    one = cat.split_indecomposables(cat.bs((0,)))
    assert [(p.label, p.shift) for p in one] == [(A2.gen(0), 0)]
    two = cat.split_indecomposables(cat.bs((0, 0)))
    assert sorted((A2.word_label(p.label), p.shift) for p in two) == [("s1", -1), ("s1", 1)]
    # kl(s) kl(t) kl(s) = kl(sts) + kl(s), so B_s splits off next to B_sts
    top = cat.split_indecomposables(cat.bs(word("sts")))
    assert [(p.label, p.shift) for p in top] == [(A2.gen(0), 0), (elem(A2, "sts"), 0)]
    assert hecke("A2").predicted_multiplicities(word("sts")) == {elem(A2, "sts"): ONE, A2.gen(0): ONE}


@pytest.mark.parametrize("wd", ["ss", "sts", "stst", "tsst"])
def test_split_idempotents_are_complete_and_orthogonal(wd):
    cat = category("B2")
    M = cat.bs(word(wd))
    pieces = cat.split_indecomposables(M)
    idems = [p.idempotent for p in pieces]
    assert _sum(idems) == GradedMap.identity(M)
    for i, a in enumerate(idems):
        for j, b in enumerate(idems):
            assert (a @ b == a) if i == j else (a @ b).is_zero()


@pytest.mark.parametrize("name", ["A2", "B2"])
def test_generic_splitter_agrees_with_recursive_decomposition(name):
    W = system(name)
    cat = category(name)
    for w in W.enumerate():
        wd = W.reduced_word(w)
        found = {}
        for p in cat.split_indecomposables(cat.bs(wd)):
            found[(p.label, p.shift)] = found.get((p.label, p.shift), 0) + 1
        assert found == cat.decompose_word(wd)


# -- decomposition reports and Hom spaces ----------------------------------------------------


def test_decomposition_report_examples(A2, B2):
    assert category("A2").decomposition_report((0,)).match
    rep = category("A2").decomposition_report(word("st"))
    assert rep.match and [s["label"] for s in rep.summands] == ["s1s2"]
    rep = category("B2").decomposition_report(word("stst"))
    assert rep.match and rep.summands[-1]["label"] == B2.word_label(elem(B2, "stst"))


@settings(max_examples=15, deadline=None)
@given(st.sampled_from(["A2", "B2", "I2(5)"]), st.lists(st.integers(0, 1), max_size=6))
def test_every_word_decomposes_as_predicted(name, letters):
    rep = category(name).decomposition_report(letters)
    assert rep.match, rep.witness


def test_hom_space_examples(A2):
    cat = category("A2")
    Bs = cat.extract(A2.gen(0)).module
    assert len(cat.hom_space(Bs, Bs, 0)) == 1
    M = cat.bs(word("sts"))
    basis = cat.hom_space(M, M, 0)
    ident = GradedMap.identity(M)
    span = FMat.hstack([f.flatten() for f in basis], None, M.d)
    assert FMat.hstack([span, ident.flatten()], None, M.d).rank() == span.cols
    for f in basis:
        assert f.commutes()


def test_hom_dimensions_match_hecke_formula_on_B2(B2):
    cat = category("B2")
    H = hecke("B2")
    els = B2.enumerate()
    for x in els:
        for y in els:
            p = H.hom_formula(x, y)
            Bx, By = cat.extract(x).module, cat.extract(y).module
            for dgr in range(0, 2 * B2.length(elem(B2, "stst")) + 1):
                assert len(cat.hom_space(Bx, By, dgr)) == p.coeff(dgr)


def test_infinite_groups_are_rejected():
    with pytest.raises(InfiniteGroupError):
        SoergelCategory(system("Atilde1"))
