import random
from fractions import Fraction

import pytest

from cgl import syntax as S
from cgl.parser import parse_script

from importlib import resources

CORPUS_FILES = ("nim.cgl", "cake.cgl", "exists.cgl", "basics.cgl")


def corpus_text(name: str) -> str:
    return resources.files("cgl").joinpath("corpus", name).read_text()


@pytest.fixture(scope="session")
def corpus():
    return {name: parse_script(corpus_text(name)) for name in CORPUS_FILES}


@pytest.fixture(scope="session")
def all_theorems(corpus):
    out = {}
    for script in corpus.values():
        out.update(script.theorems)
    return out


# ---------------------------------------------------------------------------
# Random AST generators (plain seeded random; sizes stay desk-scale)

VARS = ["x", "y", "z", "c"]


def rand_rational(rng) -> Fraction:
    return Fraction(rng.randint(-9, 9), rng.randint(1, 4))


def rand_term(rng, depth=3) -> S.Term:
    if depth == 0 or rng.random() < 0.3:
        if rng.random() < 0.5:
            return S.Lit(rand_rational(rng))
        return S.Var(rng.choice(VARS))
    k = rng.randrange(8)
    a = rand_term(rng, depth - 1)
    b = rand_term(rng, depth - 1)
    if k == 0:
        return S.Plus(a, b)
    if k == 1:
        return S.Times(a, b)
    if k == 2:
        return S.Minus(a, b)
    if k == 3:
        return S.Neg(a)
    if k == 4:
        return S.Abs(a)
    if k == 5:
        return S.Min(a, b)
    if k == 6:
        return S.Max(a, b)
    # nonzero literal divisor keeps evaluation total
    d = Fraction(rng.choice([1, 2, 3, 4, -2, -3]))
    return (S.Div if rng.random() < 0.5 else S.Mod)(a, S.Lit(d))


def rand_cmp(rng, depth=2) -> S.Formula:
    return S.Cmp(rand_term(rng, depth), rng.choice(S.REL_OPS), rand_term(rng, depth))


def rand_formula(rng, depth=2) -> S.Formula:
    if depth == 0 or rng.random() < 0.4:
        return rand_cmp(rng, 2)
    k = rng.randrange(5)
    if k == 0:
        return S.And(rand_formula(rng, depth - 1), rand_formula(rng, depth - 1))
    if k == 1:
        return S.Or(rand_formula(rng, depth - 1), rand_formula(rng, depth - 1))
    if k == 2:
        return S.Implies(rand_formula(rng, depth - 1), rand_formula(rng, depth - 1))
    if k == 3:
        return S.Diamond(rand_game(rng, depth - 1), rand_formula(rng, depth - 1))
    return S.Box(rand_game(rng, depth - 1), rand_formula(rng, depth - 1))


def rand_game(rng, depth=2) -> S.Game:
    if depth == 0 or rng.random() < 0.35:
        k = rng.randrange(3)
        if k == 0:
            return S.Assign(rng.choice(VARS), rand_term(rng, 1))
        if k == 1:
            return S.AssignAny(rng.choice(VARS))
        return S.Test(rand_cmp(rng, 1))
    k = rng.randrange(4)
    if k == 0:
        return S.Choice(rand_game(rng, depth - 1), rand_game(rng, depth - 1))
    if k == 1:
        return S.Seq(rand_game(rng, depth - 1), rand_game(rng, depth - 1))
    if k == 2:
        return S.Repeat(rand_game(rng, depth - 1))
    return S.Dual(rand_game(rng, depth - 1))


def rand_state(rng, names=VARS) -> S.State:
    return S.State({v: rand_rational(rng) for v in names})


@pytest.fixture
def rng():
    return random.Random(20240817)
