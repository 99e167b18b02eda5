"""Terms, state, static semantics, renaming, and substitution."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cgl import syntax as S
from cgl.rational import DivisionByZero, rat_quot, rat_rem
from conftest import rand_formula, rand_game, rand_state, rand_term

L = S.lit
x, y, z, c = S.Var("x"), S.Var("y"), S.Var("z"), S.Var("c")


def test_literal_arithmetic():
    st_ = S.State()
    assert S.eval_term(S.Plus(L(2), L(3)), st_) == 5


def test_product_of_vars():
    st_ = S.State({"x": 2, "y": 3})
    assert S.eval_term(S.Times(x, y), st_) == 6


def test_quotient_and_remainder_example():
    st_ = S.State()
    assert S.eval_term(S.Div(L("7/2"), L(1)), st_) == 3
    assert S.eval_term(S.Mod(L("7/2"), L(1)), st_) == Fraction(1, 2)


def test_division_identity_grid():
    # brute-force oracle: f = g*(f div g) + (f mod g), 0 <= f mod g < |g|
    for num in range(-20, 21):
        for den in range(1, 7):
            f = Fraction(num, den)
            for gnum in (-7, -3, -1, 1, 2, 5, 9):
                for gden in (1, 2, 3):
                    g = Fraction(gnum, gden)
                    q, r = rat_quot(f, g), rat_rem(f, g)
                    assert q.denominator == 1
                    assert f == g * q + r
                    assert 0 <= r < abs(g)


def test_division_by_zero():
    with pytest.raises(DivisionByZero):
        S.eval_term(S.Div(x, S.Minus(y, y)), S.State())


def test_state_default_zero_and_update():
    st_ = S.State()
    assert st_.get("fresh") == 0
    st2 = st_.set("fresh", Fraction(1, 3))
    assert st_.get("fresh") == 0 and st2.get("fresh") == Fraction(1, 3)


# -- static semantics ---------------------------------------------------------


def test_mbv_choice():
    both = S.Choice(S.Assign("x", L(1)), S.Assign("x", L(2)))
    differ = S.Choice(S.Assign("x", L(1)), S.Assign("y", L(2)))
    assert S.must_bound_vars(both) == {"x"}
    assert S.must_bound_vars(differ) == frozenset()


def test_bv_mbv_repeat():
    a = S.Repeat(S.Assign("x", L(1)))
    assert S.bound_vars(a) == S.bound_vars(a.body)
    assert S.must_bound_vars(a) == frozenset()


def test_fv_must_bound_shadows():
    phi = S.Diamond(S.Assign("x", L(1)), S.Cmp(x, ">", y))
    assert S.free_vars(phi) == {"y"}


def test_mbv_subset_bv(rng):
    for _ in range(300):
        g = rand_game(rng, 3)
        assert S.must_bound_vars(g) <= S.bound_vars(g)


# -- renaming -----------------------------------------------------------------


def test_rename_simple():
    assert S.rename(S.Cmp(x, ">", y), "x", "y") == S.Cmp(y, ">", x)


def test_rename_under_binder():
    e = S.Diamond(S.Assign("x", S.Plus(x, L(1))), S.Cmp(x, ">", L(0)))
    r = S.rename(e, "x", "z")
    assert r == S.Diamond(S.Assign("z", S.Plus(z, L(1))), S.Cmp(z, ">", L(0)))


def test_rename_self_dual_random(rng):
    for _ in range(400):
        e = rand_formula(rng, 3)
        assert S.rename(S.rename(e, "x", "y"), "x", "y") == e


def test_rename_commutes_with_eval(rng):
    for _ in range(300):
        f = rand_term(rng, 3)
        st_ = rand_state(rng)
        try:
            lhs = S.eval_term(S.rename(f, "x", "y"), st_)
            rhs = S.eval_term(f, S.rename_state(st_, "x", "y"))
        except DivisionByZero:
            continue
        assert lhs == rhs


def test_coincidence_terms(rng):
    for _ in range(300):
        f = rand_term(rng, 3)
        fv = S.free_vars(f)
        st1 = rand_state(rng)
        st2 = rand_state(rng)
        for v in fv:
            st2 = st2.set(v, st1.get(v))
        try:
            assert S.eval_term(f, st1) == S.eval_term(f, st2)
        except DivisionByZero:
            pass


# -- substitution ---------------------------------------------------------------


def test_subst_basic():
    assert S.subst_term(S.Cmp(x, ">", L(0)), "x", S.Plus(y, L(1))) == S.Cmp(
        S.Plus(y, L(1)), ">", L(0)
    )


def test_subst_capture_rejected():
    phi = S.Diamond(S.AssignAny("x"), S.Cmp(x, "=", y))
    with pytest.raises(S.InadmissibleSubstitution):
        S.subst_term(phi, "y", x)


def test_subst_under_unrelated_binder():
    phi = S.Diamond(S.Assign("y", S.Plus(y, L(1))), S.Cmp(y, ">", x))
    got = S.subst_term(phi, "x", L(3))
    assert got == S.Diamond(S.Assign("y", S.Plus(y, L(1))), S.Cmp(y, ">", L(3)))


def test_subst_evaluation_lemma(rng):
    # eval(f[x->g], w) = eval(f, w[x -> eval(g, w)]) when admissible
    for _ in range(300):
        f = rand_term(rng, 3)
        g = rand_term(rng, 2)
        st_ = rand_state(rng)
        try:
            sub = S.subst_term(f, "x", g)
            lhs = S.eval_term(sub, st_)
            rhs = S.eval_term(f, st_.set("x", S.eval_term(g, st_)))
        except (S.InadmissibleSubstitution, DivisionByZero):
            continue
        assert lhs == rhs


@settings(max_examples=200, deadline=None)
@given(st.integers(-50, 50), st.integers(1, 20), st.integers(-9, 9), st.integers(1, 6))
def test_quotient_remainder_hypothesis(a, b, cn, cd):
    f = Fraction(a, b)
    g = Fraction(cn if cn != 0 else 1, cd)
    assert f == g * rat_quot(f, g) + rat_rem(f, g)
    assert 0 <= rat_rem(f, g) < abs(g)


def test_fo_evaluation_of_derived_connectives():
    st_ = S.State({"x": 1})
    assert S.eval_fo(S.And(S.Cmp(x, ">", L(0)), S.Cmp(x, "<", L(2))), st_)
    assert S.eval_fo(S.Or(S.Cmp(x, "<", L(0)), S.Cmp(x, ">", L(0))), st_)
    assert S.eval_fo(S.Implies(S.Cmp(x, ">", L(5)), S.FALSE), st_)
    assert not S.eval_fo(S.Not(S.Cmp(x, "=", L(1))), st_)
    with pytest.raises(TypeError):
        S.eval_fo(S.Diamond(S.Repeat(S.Assign("x", L(1))), S.TRUE), st_)
