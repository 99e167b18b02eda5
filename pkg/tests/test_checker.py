"""Judgment checking: rule examples, diagnostics, and the structural
metatheory the checker must respect."""

from cgl import checker as C
from cgl import proofterms as P
from cgl import syntax as S
from cgl.checker import Checker
from cgl.parser import parse_script
from cgl.proofterms import Context

L = S.lit
x, c = S.Var("x"), S.Var("c")
ONE_POS = S.Cmp(L(1), ">", L(0))


def ck():
    return Checker()


def test_identity_function_proof():
    m = P.Lam("p", ONE_POS, P.PVar("p"))
    assert ck().check_result(Context(), m, S.Implies(ONE_POS, ONE_POS)) is None


def test_unbound_hypothesis():
    err = ck().check_result(Context(), P.PVar("p"), S.TRUE)
    assert err.kind == C.UNBOUND


def test_error_paths_point_at_subterm():
    bad = P.DPair(P.QE(ONE_POS, None), P.PVar("nope"))
    err = ck().check_result(Context(), bad, S.And(ONE_POS, ONE_POS))
    assert err.kind == C.UNBOUND
    assert err.path == ("snd",)


def test_rule_mismatch_reports_expectation():
    m = P.InjL(P.QE(ONE_POS, None))
    err = ck().check_result(Context(), m, ONE_POS)
    assert err.kind == C.RULE_MISMATCH


def test_split_conclusion_shape():
    m = P.Split(x, L(0))
    good = S.Or(S.Cmp(x, "<=", L(0)), S.Cmp(x, ">", L(0)))
    assert ck().check_result(Context(), m, good) is None
    bad = S.Or(S.Cmp(x, "<", L(0)), S.Cmp(x, ">=", L(0)))
    assert ck().check_result(Context(), m, bad) is not None


def test_oracle_refuted_vs_incomplete():
    refuted = ck().check_result(
        Context({"h": S.Cmp(x, "=", L(1))}), P.QE(S.Cmp(x, ">", L(2)), P.PVar("h")),
        S.Cmp(x, ">", L(2)),
    )
    assert refuted.kind == C.ORACLE_REFUTED
    unknown = ck().check_result(
        Context(), P.QE(S.Cmp(S.Times(x, x), ">=", L(0)), None),
        S.Cmp(S.Times(x, x), ">=", L(0)),
    )
    assert unknown.kind == C.ORACLE_INCOMPLETE


# -- the loop rule -------------------------------------------------------------


def _counter_loop(inv_text):
    text = f"""
theorem counter : c = 5 -> <{{c := c - 1}}*> c = 0 =
  \\h : c = 5. for(FO[{inv_text}](h); p : {inv_text}; q; M0 := c;
     asgnd c (cc, ch. FO[({inv_text}) & M0 succ c](p, q, ch));
     FO[c = 0](p, q))
"""
    script = parse_script(text)
    return script.theorems["counter"]


def test_counter_loop_checks_with_integral_invariant():
    phi, proof = _counter_loop("c >= 0 & c mod 1 = 0")
    assert ck().check_result(Context(), proof, phi) is None


def test_fractional_metric_rejected():
    # a metric that can sit strictly between 0 and 1 breaks the
    # integer-gap descent discipline
    phi, proof = _counter_loop("c >= 0")
    err = ck().check_result(Context(), proof, phi)
    assert err.kind == C.METRIC_ILL_FORMED


def test_nim_metric_without_offset_rejected(corpus):
    # the quotient c div 4 does not descend on every demon reply; the
    # descent obligation is arithmetically refuted
    text = corpus_nim_with_metric("c div 4")
    script = parse_script(text)
    phi, proof = script.theorems["aNim"]
    err = ck().check_result(Context(), proof, phi)
    assert err is not None
    assert err.kind in (C.ORACLE_REFUTED, C.ORACLE_INCOMPLETE)


def corpus_nim_with_metric(metric):
    from conftest import corpus_text

    text = corpus_text("nim.cgl")
    assert text.count("(c - 2) div 4") >= 3
    return text.replace("(c - 2) div 4", metric)


def test_ghost_freshness():
    m = P.Ghost("x", L(1), "p", P.QE(S.Cmp(x, "=", L(1)), P.PVar("p")))
    err = ck().check_result(Context(), m, S.Cmp(x, "=", L(1)))
    assert err.kind == C.FRESHNESS  # x is free in the goal


def test_numapp_inadmissible():
    inner = P.NumLam(
        "x", "x0",
        P.QE(S.Forall("y", S.Or(S.Cmp(x, "<", S.Var("y")), S.Cmp(x, ">=", S.Var("y")))), None),
    )
    m = P.NumApp(inner, S.Var("y"))
    err = ck().check_result(Context(), m, S.TRUE)
    assert err.kind == C.INADMISSIBLE


# -- structural metatheory -------------------------------------------------------


def test_weakening(all_theorems, rng):
    checker = ck()
    for name, (phi, proof) in all_theorems.items():
        for i in range(16):
            junk = Context({f"fresh{i}": S.Cmp(S.Var("w"), ">", L(i))})
            assert checker.check_result(junk, proof, phi) is None, name


def test_exchange_insensitive(all_theorems):
    checker = ck()
    phi, proof = all_theorems["splitDemo"]
    a = Context({"h1": S.TRUE, "h2": ONE_POS})
    b = Context({"h2": ONE_POS, "h1": S.TRUE})
    assert checker.check_result(a, proof, phi) is None
    assert checker.check_result(b, proof, phi) is None


def test_renaming_stability(all_theorems):
    checker = ck()
    for name, (phi, proof) in all_theorems.items():
        phi2 = S.rename(phi, "c", "k")
        proof2 = P.rename_pt(proof, "c", "k")
        assert checker.check_result(Context(), proof2, phi2) is None, name


def test_determinism(all_theorems):
    checker = ck()
    for name, (phi, proof) in all_theorems.items():
        r1 = checker.check_result(Context(), proof, phi)
        r2 = checker.check_result(Context(), proof, phi)
        assert (r1 is None) == (r2 is None)


def test_substitution_lemma_on_corpus():
    # if ctx,p:psi |- M : phi and ctx |- N : psi then ctx |- M[p:=N] : phi
    checker = ck()
    psi = ONE_POS
    n = P.QE(psi, None)
    cases = [
        (P.PVar("p"), psi),
        (P.DPair(P.PVar("p"), P.PVar("p")), S.And(psi, psi)),
        (P.InjL(P.DPair(P.PVar("p"), P.QE(S.TRUE, None))), S.Or(psi, psi)),
        (
            P.Lam("q", S.Cmp(x, ">", L(2)), P.PVar("p")),
            S.Implies(S.Cmp(x, ">", L(2)), psi),
        ),
    ]
    for m, phi in cases:
        assert checker.check_result(Context({"p": psi}), m, phi) is None
        assert checker.check_result(Context(), n, psi) is None
        sub = P.subst_pt(m, "p", n)
        assert checker.check_result(Context(), sub, phi) is None


def test_substitution_lemma_randomized(all_theorems, rng):
    checker = ck()
    phi, proof = all_theorems["dNim"]
    # substitute trivial lemmas for lambda-bound hypotheses after peeling
    assert isinstance(proof, P.Lam)
    hyp_phi = proof.ann
    body = proof.body
    lemma = P.QE(hyp_phi, P.PVar("outer"))
    ctx = Context({"outer": hyp_phi})
    inner_phi = S.split_implies(phi)[1]
    assert checker.check_result(ctx.extend(proof.hyp, hyp_phi), body, inner_phi) is None
    sub = P.subst_pt(body, proof.hyp, lemma)
    assert checker.check_result(ctx, sub, inner_phi) is None


def test_contraction_admissible():
    # duplicate hypotheses collapse by substituting one name for the other
    checker = ck()
    phi = S.And(ONE_POS, ONE_POS)
    m = P.DPair(P.PVar("p"), P.PVar("q"))
    two = Context({"p": ONE_POS, "q": ONE_POS})
    assert checker.check_result(two, m, phi) is None
    contracted = P.subst_pt(m, "q", P.PVar("p"))
    assert checker.check_result(Context({"p": ONE_POS}), contracted, phi) is None


def test_alpha_equivalent_proofs_check_alike(all_theorems):
    checker = ck()
    for name in ("dNim", "dCake", "forCounter", "signFlip"):
        phi, proof = all_theorems[name]
        renamed = _alpha_vary_binders(proof)
        assert P.alpha_eq(renamed, proof), name
        assert checker.check_result(Context(), renamed, phi) is None, name


def _alpha_vary_binders(m):
    """Rename every proof-variable binder by a tick, via substitution."""
    import dataclasses

    updates = {}
    for f in dataclasses.fields(type(m)):
        v = getattr(m, f.name)
        if isinstance(v, P.ProofTerm):
            updates[f.name] = _alpha_vary_binders(v)
    vals = {f.name: getattr(m, f.name) for f in dataclasses.fields(type(m))}
    vals.update(updates)
    out = type(m)(**vals)
    for hyp, targets in P._PVAR_BINDERS.get(type(m), ()):
        old = getattr(out, hyp)
        new = old + "_t"
        vals = {f.name: getattr(out, f.name) for f in dataclasses.fields(type(out))}
        vals[hyp] = new
        for t in targets:
            vals[t] = P.subst_pt(vals[t], old, P.PVar(new))
        out = type(out)(**vals)
    return out
