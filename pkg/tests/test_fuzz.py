"""Metamorphic pipeline fuzz: a mutated corpus proof is either rejected by
the checker or its extracted strategy still wins every adversary line.
A losing strategy extracted from an accepted proof would be a soundness
hole; this guards the checker/oracle/extractor/engine stack jointly."""

import dataclasses
import random

from cgl import proofterms as P
from cgl import syntax as S
from cgl.checker import Checker
from cgl.engine import (
    DemonMenu, IllStructuredRealizer, close, modal_core, strip_assumptions,
    verify_exhaustive,
)
from cgl.extraction import UncheckedInput, extract
from cgl.proofterms import Context
from cgl.syntax import State


def _subterms(m, path=()):
    yield path, m
    for f in dataclasses.fields(type(m)):
        v = getattr(m, f.name)
        if isinstance(v, P.ProofTerm):
            yield from _subterms(v, path + (f.name,))


def _replace_at(m, path, new):
    if not path:
        return new
    head, rest = path[0], path[1:]
    vals = {f.name: getattr(m, f.name) for f in dataclasses.fields(type(m))}
    vals[head] = _replace_at(vals[head], rest, new)
    return type(m)(**vals)


def _bump_first_literal(t):
    if isinstance(t, S.Lit):
        return S.Lit(t.value + 1)
    for f in dataclasses.fields(type(t)):
        v = getattr(t, f.name)
        if isinstance(v, S.Term):
            nv = _bump_first_literal(v)
            if nv is not v:
                vals = {g.name: getattr(t, g.name) for g in dataclasses.fields(type(t))}
                vals[f.name] = nv
                return type(t)(**vals)
    return t


def _mutate(m, rng):
    nodes = list(_subterms(m))
    for _ in range(40):
        path, node = rng.choice(nodes)
        k = rng.randrange(7)
        if k == 0 and isinstance(node, P.InjL):
            return _replace_at(m, path, P.InjR(node.arg))
        if k == 1 and isinstance(node, P.InjR):
            return _replace_at(m, path, P.InjL(node.arg))
        if k == 2 and isinstance(node, (P.DPair, P.BPair)):
            return _replace_at(m, path, type(node)(node.snd, node.fst))
        if k == 3 and isinstance(node, P.Proj1):
            return _replace_at(m, path, P.Proj2(node.arg))
        if k == 4 and isinstance(node, P.Case):
            return _replace_at(
                m, path,
                P.Case(node.scrut, node.left, node.bright, node.right, node.bleft),
            )
        if k == 5 and isinstance(node, P.Mon):
            return _replace_at(m, path, node.scrut)
        if k == 6 and isinstance(node, P.TCons):
            return _replace_at(
                m, path,
                P.TCons(node.var, node.ghost, node.hyp,
                        _bump_first_literal(node.witness), node.body),
            )
    return None


CONFIG = {
    "dNim": (
        State({"c": 9}),
        S.Cmp(S.Mod(S.Var("c"), S.lit(4)), "=", S.lit(1)),
        DemonMenu({}, 6), False,
    ),
    "aCake": (State(), S.Cmp(S.Var("a"), ">=", S.lit("1/2")), DemonMenu({}, 2), True),
    "dCake": (
        State(), S.Cmp(S.Var("d"), ">=", S.lit("1/2")),
        DemonMenu({"x": ["0", "1/3", "1/2", "2/3", "1"]}, 2), True,
    ),
    "signFlip": (
        State(), S.Cmp(S.Var("x"), ">=", S.lit(0)),
        DemonMenu({"x": ["-5", "0", "7/2"]}, 2), True,
    ),
    "forCounter": (
        State({"c": 5}), S.Cmp(S.Var("c"), "=", S.lit(0)), DemonMenu({}, 2), True,
    ),
}


def test_accepted_mutants_still_win(all_theorems):
    rng = random.Random(90210)
    ck = Checker()
    names = list(CONFIG)
    rejected = benign = 0
    for i in range(120):
        name = names[i % len(names)]
        phi, proof = all_theorems[name]
        mut = _mutate(proof, rng)
        if mut is None or mut == proof:
            continue
        if ck.check_result(Context(), mut, phi) is not None:
            rejected += 1
            continue
        st, post, menu, reqfin = CONFIG[name]
        try:
            rz = extract(mut, phi, checked=True)
            stripped = strip_assumptions(phi, close(rz), st)
            if stripped is None:
                continue
            game, role, _ = modal_core(phi)
            cex = verify_exhaustive(
                game, role, stripped[1], [st], post, menu, require_finished=reqfin
            )
        except (UncheckedInput, IllStructuredRealizer) as e:
            raise AssertionError(f"accepted mutant broke the pipeline ({name}): {e}")
        assert cex is None, f"checker accepted a losing mutant of {name}"
        benign += 1
    assert rejected >= 20 and benign >= 5  # the fuzz actually bites
