from __future__ import annotations

import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import formulas
from ltl_oracle import lasso_holds
from tslsat import formula as fm
from tslsat.ltl import (
    FINITARY,
    GENERAL,
    L_TRUE,
    LAnd,
    LAtom,
    LNext,
    LNot,
    LUntil,
    PredAP,
    UpdateAP,
    all_letters,
    approximate,
    atoms_of,
    finitarize,
    legal_letters,
    ltl_lasso_check,
    strip_finitary,
    to_ltl,
)
from tslsat.parser import parse_formula
from tslsat.terms import SignatureError, app, cell, pred, star

x = cell("x")
P = PredAP(pred("p", x))
Q = PredAP(pred("q", x))
a, b = LAtom(P), LAtom(Q)


def small_ltl():
    atom = st.sampled_from([L_TRUE, a, b])
    return st.recursive(
        atom,
        lambda sub: st.one_of(
            st.builds(LNot, sub),
            st.builds(LNext, sub),
            st.builds(LAnd, sub, sub),
            st.builds(LUntil, sub, sub),
        ),
        max_leaves=7,
    )


def letters_over(aps):
    return st.fixed_dictionaries({ap: st.booleans() for ap in aps})


class TestTranslation:
    def test_atoms(self):
        phi, _ = parse_formula("[x <- f(x)] U p(x)")
        assert to_ltl(phi) == LUntil(LAtom(UpdateAP(x, app("f", x))), LAtom(P))

    def test_atoms_of(self):
        assert atoms_of(LAnd(a, LNext(LNot(b)))) == {P, Q}

    def test_update_ap_flags(self):
        assert UpdateAP(x, x).is_self
        assert UpdateAP(x, star()).is_star
        assert str(UpdateAP(x, app("f", x))) == "[x <- f(x)]"


class TestApproximation:
    def test_finitary_adds_self_update(self):
        phi, sig = parse_formula("G [x <- f(x)] && p(x)")
        ap = approximate(phi, sig, FINITARY)
        assert ap.updates_by_cell == ((x, (UpdateAP(x, app("f", x)), UpdateAP(x, x))),)
        assert ap.predicates == (P,)
        assert ap.aps == (P, UpdateAP(x, app("f", x)), UpdateAP(x, x))

    def test_general_adds_star(self):
        phi, sig = parse_formula("p(x)")
        ap = approximate(phi, sig, GENERAL)
        assert ap.updates_by_cell == ((x, (UpdateAP(x, star()),)),)

    def test_unused_cell_still_updates(self):
        phi, sig = parse_formula("p(x) && [y <- y]")
        ap = approximate(phi, sig)
        assert [c.head for c in ap.cells] == ["x", "y"]

    def test_bad_mode(self):
        phi, sig = parse_formula("p(x)")
        with pytest.raises(ValueError):
            approximate(phi, sig, "eventual")

    @given(formulas(5))
    def test_legal_letters_choose_one_update_per_cell(self, phi):
        sig = fm.signature_of(phi)
        ap = approximate(phi, sig)
        constraint = LAnd(ap.least, ap.most)
        letters = legal_letters(ap)
        assert len(letters) == 2 ** len(ap.predicates) * _prod(len(u) for _, u in ap.updates_by_cell)
        for letter in letters:
            assert ltl_lasso_check([], [letter], constraint)
        if len(ap.aps) <= 6:
            legal = {tuple(sorted(l.items(), key=lambda kv: str(kv[0]))) for l in letters}
            for letter in all_letters(ap.aps):
                key = tuple(sorted(letter.items(), key=lambda kv: str(kv[0])))
                assert ltl_lasso_check([], [letter], constraint) == (key in legal)


def _prod(xs):
    out = 1
    for v in xs:
        out *= v
    return out


class TestFinitarize:
    def test_shape(self):
        phi, sig = parse_formula("G [x <- f(x)]")
        fin, fsig = finitarize(phi, sig)
        assert "n" in fsig.cells and fsig.functions["new"] == 1 and fsig.functions["pick_x"] == 1
        assert strip_finitary(fin) == phi
        assert "n" not in sig.cells

    def test_reserved_clash(self):
        phi, sig = parse_formula("[n <- n]")
        with pytest.raises(SignatureError):
            finitarize(phi, sig)

    def test_strip_rejects_other(self):
        with pytest.raises(ValueError):
            strip_finitary(fm.TRUE)


class TestLassoCheck:
    @pytest.mark.parametrize(
        "phi, stem, loop, expected",
        [
            (a, [], [{P: True}], True),
            (LNext(a), [{P: True}], [{P: False}], False),
            (LUntil(L_TRUE, a), [{P: False}] * 3, [{P: False}, {P: True}], True),
            (LNot(LUntil(L_TRUE, LNot(a))), [{P: True}], [{P: True}, {P: False}], False),
            (LUntil(a, b), [{P: True, Q: False}], [{P: True, Q: False}], False),
        ],
    )
    def test_examples(self, phi, stem, loop, expected):
        full = lambda w: [{P: l.get(P, False), Q: l.get(Q, False)} for l in w]
        assert ltl_lasso_check(full(stem), full(loop), phi) is expected

    def test_empty_loop(self):
        with pytest.raises(ValueError):
            ltl_lasso_check([], [], a)

    def test_missing_ap(self):
        with pytest.raises(ValueError):
            ltl_lasso_check([], [{}], a)

    @given(
        small_ltl(),
        st.lists(letters_over([P, Q]), max_size=4),
        st.lists(letters_over([P, Q]), min_size=1, max_size=4),
    )
    def test_matches_reference(self, phi, stem, loop):
        assert ltl_lasso_check(stem, loop, phi) == lasso_holds(stem, loop, phi)

    @given(small_ltl(), st.lists(letters_over([P, Q]), min_size=1, max_size=3), st.integers(2, 3))
    def test_loop_unrolling_invariant(self, phi, loop, k):
        assert ltl_lasso_check([], loop, phi) == ltl_lasso_check(loop, loop * k, phi)

    def test_exhaustive_small(self):
        letters = all_letters([P, Q])
        phi = LUntil(LNot(b), LAnd(a, LNext(b)))
        for s in range(3):
            for l in range(1, 3):
                for stem in itertools.product(letters, repeat=s):
                    for loop in itertools.product(letters, repeat=l):
                        assert ltl_lasso_check(stem, loop, phi) == lasso_holds(stem, loop, phi)
