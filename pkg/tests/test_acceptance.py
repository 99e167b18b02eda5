"""Acceptance gate: every criterion at its stated tolerance, one printed
pass/fail line each.  Run with `pytest tests/test_acceptance.py -v -s`.
"""

import random
import time
from fractions import Fraction

from cgl import normalizer as N
from cgl import proofterms as P
from cgl import realizer as R
from cgl import syntax as S
from cgl.checker import Checker
from cgl.engine import (
    ACTIVE, DORMANT, DemonMenu, Finished, close, modal_core,
    strip_assumptions, verify_exhaustive, play, ScriptedDemon,
)
from cgl.extraction import (
    extract, extract_disjunct, extract_existential, validate_existential,
)
from cgl.proofterms import Context
from cgl.syntax import State
from conftest import corpus_text, rand_formula, rand_game, rand_state

L = S.lit
x, c = S.Var("x"), S.Var("c")


def report(num, label, passed, detail=""):
    line = f"criterion {num}: {'PASS' if passed else 'FAIL'}  {label}"
    if detail:
        line += f"  [{detail}]"
    print(line)
    assert passed, line


def _strategy(all_theorems, name):
    phi, proof = all_theorems[name]
    return phi, extract(proof, phi, checked=True)


def _verify(phi, rz, states, post, menu, require_finished=False, fuel=4_000_000):
    game, role, _default_post = modal_core(phi)
    for st in states:
        stripped = strip_assumptions(phi, close(rz), st)
        assert stripped is not None, f"hypothesis fails at {st!r}"
        cex = verify_exhaustive(
            game, role, stripped[1], [st], post, menu,
            require_finished=require_finished, fuel=fuel,
        )
        if cex is not None:
            return cex
    return None


# -- 1. the four game proofs typecheck -------------------------------------------


def test_criterion_1_corpus_checks(all_theorems):
    ck = Checker()
    worst = 0.0
    for name in ("aNim", "dNim", "aCake", "dCake"):
        phi, proof = all_theorems[name]
        t0 = time.monotonic()
        err = ck.check_result(Context(), proof, phi)
        dt = time.monotonic() - t0
        worst = max(worst, dt)
        assert err is None, f"{name}: {err}"
        assert dt < 1.0, f"{name} took {dt:.2f}s"
    report(1, "aNim, dNim, aCake, dCake typecheck", True, f"worst {worst*1000:.0f} ms")


# -- 2. dormant Nim strategy soundness --------------------------------------------


def test_criterion_2_nim_dormant(all_theorems):
    phi, rz = _strategy(all_theorems, "dNim")
    states = [State({"c": k}) for k in range(1, 38, 4)]
    menu = DemonMenu(values={}, repeat_depth=12)
    t0 = time.monotonic()
    cex = _verify(phi, rz, states, S.Cmp(S.Mod(c, L(4)), "=", L(1)), menu)
    dt = time.monotonic() - t0
    report(
        2, "dNim wins all demon lines, c in {1,5,...,37}, depth <= 12",
        cex is None and dt < 10.0, f"{dt:.2f}s",
    )


# -- 3. active Nim strategy soundness ----------------------------------------------


def test_criterion_3_nim_active(all_theorems):
    phi, rz = _strategy(all_theorems, "aNim")
    states = [
        State({"c": k}) for k in range(1, 24) if k % 4 in (0, 2, 3)
    ]
    post = S.Or(S.Cmp(c, "=", L(2)), S.Or(S.Cmp(c, "=", L(3)), S.Cmp(c, "=", L(4))))
    menu = DemonMenu(values={}, repeat_depth=12)
    t0 = time.monotonic()
    cex = _verify(phi, rz, states, post, menu, require_finished=True)
    dt = time.monotonic() - t0
    report(
        3, "aNim finishes with c in {2,3,4} for every c <= 23 start",
        cex is None and dt < 10.0, f"{dt:.2f}s",
    )


# -- 4. cake exactness ----------------------------------------------------------------


def test_criterion_4_cake(all_theorems):
    t0 = time.monotonic()
    phi_a, rz_a = _strategy(all_theorems, "aCake")
    exact_half = S.Cmp(S.Var("a"), "=", L("1/2"))
    menu_a = DemonMenu(values={}, repeat_depth=2)
    cex_a = _verify(phi_a, rz_a, [State()], exact_half, menu_a, require_finished=True)

    phi_d, rz_d = _strategy(all_theorems, "dCake")
    grid = [Fraction(k, 10) for k in range(11)] + [Fraction(1, 3), Fraction(2, 3)]
    menu_d = DemonMenu(values={"x": [str(v) for v in grid]}, repeat_depth=2)
    at_least_half = S.Cmp(S.Var("d"), ">=", L("1/2"))
    cex_d = _verify(phi_d, rz_d, [State()], at_least_half, menu_d, require_finished=True)
    dt = time.monotonic() - t0
    report(
        4, "aCake gets exactly 1/2 on both slices; dCake >= 1/2 on the grid",
        cex_a is None and cex_d is None and dt < 1.0, f"{dt:.2f}s",
    )


# -- 5/6. progress, preservation, normal forms -----------------------------------------


def test_criterion_5_progress_preservation(all_theorems):
    ck = Checker()
    for name, (phi, proof) in all_theorems.items():
        cur = proof
        steps = 0
        while True:
            s = N.step(cur)
            if s is None:
                assert N.is_normal(cur), f"{name}: stuck non-normal after {steps}"
                break
            cur = s[0]
            steps += 1
            assert steps <= 10**6, f"{name}: exceeded fuel"
            err = ck.check_result(Context(), cur, phi)
            assert err is None, f"{name} step {steps} ({s[1]}): {err}"
    report(5, "every corpus trace preserves its formula and never sticks", True)


def test_criterion_6_normal_forms(all_theorems):
    for name, (_phi, proof) in all_theorems.items():
        nf, _steps, _trace = N.normalize(proof, 10**6)
        assert N.is_normal(nf), name
        kind = N.normal_kind(nf)
        assert kind in (N.SIMPLE, N.TOP_LEVEL_CASE)
    report(6, "every corpus normal form is simple or a top-level state case", True)


# -- 7. conversion-rule coverage ----------------------------------------------------------


def test_criterion_7_rule_coverage():
    from test_normalizer import coverage_seeds, rules_of

    fired = set()
    for seed in coverage_seeds():
        fired.update(rules_of(seed))
    unfired = sorted(N.APPENDIX_RULES - fired)
    report(7, "all named conversion rules fire in the unit suite",
           unfired == [], f"{len(N.APPENDIX_RULES)} rules, unfired={unfired}")


# -- 8. witness and disjunct extraction ------------------------------------------------------


def test_criterion_8_ep_dp(corpus):
    ex = corpus["exists.cgl"].theorems
    for name in ("witPlus", "witAbs", "witMax"):
        phi, proof = ex[name]
        witness, _ = extract_existential(proof, phi)
        bad = validate_existential(phi, witness, samples=1000)
        assert bad is None, f"{name}: witness fails at {bad!r}"
        if name == "witAbs":
            assert witness == S.Abs(x)

    phi, proof = corpus["basics.cgl"].theorems["splitDemo"]
    rng = random.Random(23)
    for _ in range(1000):
        st = State({"x": Fraction(rng.randint(-99, 99), rng.randint(1, 8))})
        side, _sub = extract_disjunct(proof, phi, st)
        assert side == ("L" if st.get("x") <= 0 else "R"), st
    report(8, "existential witnesses (incl. abs) and decided disjuncts validate", True)


# -- 9. metatheory property suites -------------------------------------------------------------


def test_criterion_9_metatheory(all_theorems):
    rng = random.Random(2027)
    ck = Checker()

    for _ in range(200):  # renaming self-duality
        e = rand_formula(rng, 3)
        assert S.rename(S.rename(e, "x", "y"), "x", "y") == e
    from test_proofterms import _rand_proof

    for _ in range(200):
        m = _rand_proof(rng, 3)
        assert P.rename_pt(P.rename_pt(m, "x", "y"), "x", "y") == m

    names = list(all_theorems)
    for i in range(200):  # weakening admissibility
        name = names[i % len(names)]
        phi, proof = all_theorems[name]
        junk = Context({f"w{i}": rand_formula(rng, 1)})
        assert ck.check_result(junk, proof, phi) is None, name

    # substitution lemma on corpus instances
    one_pos = S.Cmp(L(1), ">", L(0))
    lemma = P.QE(one_pos, None)
    count = 0
    for i in range(200):
        m = P.DPair(P.PVar("p"), lemma) if i % 2 else P.InjR(
            P.DPair(P.PVar("p"), P.QE(S.TRUE, None))
        )
        phi = S.And(one_pos, one_pos) if i % 2 else S.Or(one_pos, one_pos)
        assert ck.check_result(Context({"p": one_pos}), m, phi) is None
        sub = P.subst_pt(m, "p", lemma)
        assert ck.check_result(Context(), sub, phi) is None
        count += 1
    assert count == 200

    # bound effect and coincidence at trace level
    from test_engine import PooledDemon, _demon_script, suitable

    done_be = done_co = 0
    while done_be < 200 or done_co < 200:
        game = rand_game(rng, 3)
        role = rng.choice([ACTIVE, DORMANT])
        rz = suitable(rng, game, role)
        st1 = rand_state(rng)
        script = _demon_script(rng)
        out1 = play(game, role, close(rz), st1, PooledDemon(script), fuel=20000)
        if isinstance(out1, Finished) and done_be < 200:
            outside = (st1.vars() | out1.state.vars()) - S.bound_vars(game)
            assert out1.state.agrees_with(st1, outside)
            done_be += 1
        st2 = rand_state(rng)
        for v in S.free_vars(game):
            st2 = st2.set(v, st1.get(v))
        out2 = play(game, role, close(rz), st2, PooledDemon(script), fuel=20000)
        if isinstance(out1, Finished) and isinstance(out2, Finished) and done_co < 200:
            agree = S.must_bound_vars(game) | S.free_vars(game)
            assert out1.state.agrees_with(out2.state, agree)
            done_co += 1
    report(9, "renaming/weakening/substitution/bound-effect/coincidence suites", True,
           ">=200 cases each")


# -- 10. mutation sensitivity -------------------------------------------------------------------


def _mutate_text(name, old, new):
    text = corpus_text(name)
    assert old in text
    return text.replace(old, new, 1)


def test_criterion_10_mutations(all_theorems):
    from cgl.parser import parse_script

    ck = Checker()
    outcomes = []

    # 1. flipped injection: answer the 1-mod-4 case with the wrong move
    bad = parse_script(_mutate_text(
        "nim.cgl", "l2. inr inl asgnd c (g5, c.", "l2. inl asgnd c (g5, c."
    ))
    phi, proof = bad.theorems["dNim"]
    err = ck.check_result(Context(), proof, phi)
    outcomes.append(("flipped injection", err is not None and "Oracle" in err.kind))

    # 2. wrong metric: the undshifted quotient does not descend every round
    bad = parse_script(_mutate_text("nim.cgl", "M0 := (c - 2) div 4", "M0 := c div 4"))
    phi, proof = bad.theorems["aNim"]
    err = ck.check_result(Context(), proof, phi)
    outcomes.append(("wrong metric", err is not None))

    # 3. broken invariant: claim the counter stays at 0 mod 4
    bad = parse_script(_mutate_text(
        "nim.cgl", "formula J = c > 0 & c mod 4 = 1", "formula J = c > 0 & c mod 4 = 0"
    ))
    phi, proof = bad.theorems["dNim"]
    err = ck.check_result(Context(), proof, phi)
    outcomes.append(("broken invariant", err is not None))

    # 4. wrong branch test in the extracted strategy: negate dCake's
    # comparison so the chooser takes the smaller piece
    phi, rz = _strategy(all_theorems, "dCake")

    def negate_conds(r):
        if isinstance(r, R.IfTerm):
            return R.IfTerm(r.cond, negate_conds(r.els), negate_conds(r.then))
        updates = {}
        import dataclasses

        for f in dataclasses.fields(type(r)):
            v = getattr(r, f.name)
            if isinstance(v, R.Realizer):
                updates[f.name] = negate_conds(v)
        if not updates:
            return r
        vals = {f.name: getattr(r, f.name) for f in dataclasses.fields(type(r))}
        vals.update(updates)
        return type(r)(**vals)

    menu = DemonMenu(values={"x": ["1/3", "2/3"]}, repeat_depth=2)
    cex = _verify(phi, negate_conds(rz), [State()],
                  S.Cmp(S.Var("d"), ">=", L("1/2")), menu, require_finished=True)
    outcomes.append(("wrong branch test", cex is not None and len(cex.trace) <= 40))

    # 5. off-by-one assignment in the extracted strategy: cut at 2/5
    phi, rz = _strategy(all_theorems, "aCake")

    def skew_cut(r):
        if isinstance(r, R.TermVal) and r.term == L("1/2"):
            return R.TermVal(L("2/5"))
        updates = {}
        import dataclasses

        for f in dataclasses.fields(type(r)):
            v = getattr(r, f.name)
            if isinstance(v, R.Realizer):
                updates[f.name] = skew_cut(v)
        if not updates:
            return r
        vals = {f.name: getattr(r, f.name) for f in dataclasses.fields(type(r))}
        vals.update(updates)
        return type(r)(**vals)

    cex = _verify(phi, skew_cut(rz), [State()],
                  S.Cmp(S.Var("a"), ">=", L("1/2")), DemonMenu(values={}, repeat_depth=2),
                  require_finished=True)
    outcomes.append(("off-by-one assignment", cex is not None))

    bad_ones = [n for n, ok in outcomes if not ok]
    report(10, "five documented corpus mutations are caught", not bad_ones,
           f"failing detectors: {bad_ones}" if bad_ones else "all rejected")
