"""Proof-term renaming, substitution, and alpha-equivalence."""

import random

from cgl import proofterms as P
from cgl import syntax as S

L = S.lit
x, y = S.Var("x"), S.Var("y")


def _rand_proof(rng, depth=3) -> P.ProofTerm:
    if depth == 0 or rng.random() < 0.3:
        k = rng.randrange(3)
        if k == 0:
            return P.PVar(rng.choice(["p", "q", "r"]))
        if k == 1:
            return P.Split(S.Var(rng.choice(["x", "y", "c"])), L(rng.randint(-3, 3)))
        return P.QE(S.Cmp(S.Var(rng.choice(["x", "y"])), ">", L(0)), None)
    k = rng.randrange(10)
    a = _rand_proof(rng, depth - 1)
    b = _rand_proof(rng, depth - 1)
    if k == 0:
        return P.Lam("p", S.Cmp(x, ">", L(0)), a)
    if k == 1:
        return P.App(a, b)
    if k == 2:
        return P.DPair(a, b)
    if k == 3:
        return P.InjL(a)
    if k == 4:
        return P.Case(a, "l", b, "r", _rand_proof(rng, depth - 1))
    if k == 5:
        return P.Asgn("x", "xg", "h", a, P.DIA)
    if k == 6:
        return P.TCons("y", "yg", "h", S.Plus(x, L(1)), a)
    if k == 7:
        return P.Mon(a, "m", b)
    if k == 8:
        return P.NumLam("x", "x0", a)
    return P.Ghost("g", S.Plus(x, L(2)), "h", a)


def test_rename_self_dual_random():
    rng = random.Random(7)
    for _ in range(400):
        m = _rand_proof(rng, 3)
        assert P.rename_pt(P.rename_pt(m, "x", "y"), "x", "y") == m


def test_rename_split():
    assert P.rename_pt(P.Split(x, L(0)), "x", "z") == P.Split(S.Var("z"), L(0))


def test_rename_transposes_asgn_binders():
    m = P.Asgn("z", "w", "p", P.QE(S.Cmp(S.Var("z"), "=", S.Var("w")), None), P.DIA)
    r = P.rename_pt(m, "z", "w")
    assert r.var == "w" and r.ghost == "z"
    assert r.body.goal == S.Cmp(S.Var("w"), "=", S.Var("z"))


def test_subst_pt_variable():
    n = P.Split(x, L(0))
    assert P.subst_pt(P.PVar("p"), "p", n) == n
    assert P.subst_pt(P.PVar("q"), "p", n) == P.PVar("q")


def test_subst_pt_shadowing():
    m = P.Lam("p", S.TRUE, P.PVar("p"))
    assert P.subst_pt(m, "p", P.Split(x, L(0))) == m


def test_subst_pt_identity_alpha():
    rng = random.Random(13)
    for _ in range(200):
        m = _rand_proof(rng, 3)
        assert P.alpha_eq(P.subst_pt(m, "p", P.PVar("p")), m)


def test_subst_crosses_assignment_binder_with_renaming():
    # substituting under x := ... redirects the copy's x to the recorded
    # ghost, so hypotheses formed before the binding keep their meaning
    n = P.QE(S.Cmp(x, ">", L(0)), None)
    m = P.Asgn("x", "x9", "h", P.App(P.PVar("p"), P.PVar("h")), P.DIA)
    out = P.subst_pt(m, "p", n)
    assert out.body.fn.goal == S.Cmp(S.Var("x9"), ">", L(0))


def test_subst_avoids_pvar_capture():
    # the Lam binds q; substituting something mentioning q must alpha-vary
    m = P.Lam("q", S.TRUE, P.App(P.PVar("p"), P.PVar("q")))
    out = P.subst_pt(m, "p", P.PVar("q"))
    assert isinstance(out, P.Lam)
    assert out.hyp != "q"
    assert out.body.fn == P.PVar("q")  # the free q survived
    assert out.body.arg == P.PVar(out.hyp)


def test_subst_term_pt():
    m = P.Split(x, L(0))
    assert P.subst_term_pt(m, "x", S.Plus(y, L(1))) == P.Split(S.Plus(y, L(1)), L(0))
    q = P.QE(S.Cmp(x, ">", L(0)), P.PVar("m"))
    got = P.subst_term_pt(q, "x", L(3))
    assert got.goal == S.Cmp(L(3), ">", L(0))


def test_subst_term_pt_blocked_by_binder():
    import pytest

    m = P.TCons("x", "xg", "h", L(1), P.QE(S.Cmp(x, "=", L(1)), None))
    with pytest.raises(S.InadmissibleSubstitution):
        P.subst_term_pt(m, "y", S.Plus(x, L(1)))  # replacement mentions bound x


def test_alpha_eq_binders():
    a = P.Lam("p", S.TRUE, P.PVar("p"))
    b = P.Lam("q", S.TRUE, P.PVar("q"))
    assert P.alpha_eq(a, b)
    assert not P.alpha_eq(a, P.Lam("q", S.TRUE, P.PVar("p")))


def test_alpha_eq_ghosts():
    a = P.Asgn("x", "g1", "h", P.QE(S.Cmp(x, "=", S.Var("g1")), None), P.DIA)
    b = P.Asgn("x", "g2", "h", P.QE(S.Cmp(x, "=", S.Var("g2")), None), P.DIA)
    assert P.alpha_eq(a, b)
    c = P.Asgn("y", "g1", "h", P.QE(S.Cmp(x, "=", S.Var("g1")), None), P.DIA)
    assert not P.alpha_eq(a, c)  # the assigned variable is rigid
