"""Small-step operational semantics on proof terms.

`step` is a total, deterministic function implementing eager
leftmost-innermost reduction with binder shielding: beta rules fire on
introduction/elimination pairs, structural (S) rules reduce the leftmost
eligible subterm not under a binder, commuting-conversion (C) rules lift
irreducible case expressions, and monotonicity-conversion rules push a
weakening through introduction forms.  `normalize` iterates under fuel.

Rule names follow the calculus; `APPENDIX_RULES` is the registry the
coverage report checks off.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import proofterms as P
from . import syntax as S
from .oracle import ArithOracle
from .proofterms import ProofTerm, subst_pt, subst_term_pt

# beta rules
LAM_PHI_BETA = "lam-phi-beta"
LAM_Q_BETA = "lam-Q-beta"
PROJ1_BETA = "proj1-beta"
PROJ2_BETA = "proj2-beta"
CASE_BETA_L = "case-beta-L"
CASE_BETA_R = "case-beta-R"
UNROLL_BETA = "unroll-beta"
UNPACK_BETA = "unpack-beta"
FP_BETA = "fp-beta"
REP_BETA = "rep-beta"
FOR_BETA = "for-beta"
FO_ALL_BETA = "FO-forall-beta"
FO_AND_BETA = "FO-and-beta"
FO_EX_BETA = "FO-exists-beta"
FO_OR_BETA = "FO-or-beta"

# monotonicity conversions
LAM_MON = "lam-phi-mon"
RLAM_MON = "lam-Q-mon"
BCONS_MON = "bpair-mon"
DCONS_MON = "dpair-mon"
INJL_MON = "inl-mon"
INJR_MON = "inr-mon"
BSWAP_MON = "yieldb-mon"
DSWAP_MON = "yieldd-mon"
BSEQ_MON = "seqb-mon"
DSEQ_MON = "seqd-mon"
TCONS_MON = "wit-mon"
DASGN_MON = "asgnd-mon"
BASGN_MON = "asgnb-mon"
BROLL_MON = "roll-mon"
STOP_MON = "stop-mon"
GO_MON = "go-mon"

# commuting conversions
PROJ1_C = "proj1-C"
PROJ2_C = "proj2-C"
BCONS_CL = "bpair-C1"
BCONS_CR = "bpair-C2"
DCONS_CL = "dpair-C1"
DCONS_CR = "dpair-C2"
STOP_C = "stop-C"
GO_C = "go-C"
INJL_C = "inl-C"
INJR_C = "inr-C"
RCASE_C = "rcase-C"
CASE_C = "case-C"
UNROLL_C = "unroll-C"
REP_C = "rep-C"
FOR_C = "for-C"
FP_C = "fp-C"
DSEQ_C = "seqd-C"
BSEQ_C = "seqb-C"
DSWAP_C = "yieldd-C"
BSWAP_C = "yieldb-C"
APP_CL = "app-C1"
APP_CR = "app-C2"
NUMAPP_C = "numapp-C"
# the calculus states the case/monotonicity commutation twice (as a
# monotonicity conversion and as a commuting conversion); one rule here
MON_C = "mon-C"
TCONS_C = "wit-C"
UNPACK_C = "unpack-C"

# structural rules
PROJ1_S = "proj1-S"
PROJ2_S = "proj2-S"
REP_S = "rep-S"
UNROLL_S = "unroll-S"
NUMAPP_S = "numapp-S"
APP_SL = "app-S1"
APP_SR = "app-S2"
BSEQ_S = "seqb-S"
DSEQ_S = "seqd-S"
MON_S = "mon-S"
INJL_S = "inl-S"
INJR_S = "inr-S"
BCONS_SL = "bpair-S1"
BCONS_SR = "bpair-S2"
DCONS_SL = "dpair-S1"
DCONS_SR = "dpair-S2"
BSWAP_S = "yieldb-S"
DSWAP_S = "yieldd-S"
FOR_S = "for-S"
FP_S = "fp-S"
CASE_S = "case-S"
UNPACK_S = "unpack-S"

# supplementary rules (not named by the calculus figures, needed for
# totality on derived constructs)
STOP_S = "stop-S"
GO_S = "go-S"
GHOST_MON = "ghost-mon"

APPENDIX_RULES = frozenset(
    {
        LAM_PHI_BETA, LAM_Q_BETA, PROJ1_BETA, PROJ2_BETA, CASE_BETA_L,
        CASE_BETA_R, UNROLL_BETA, UNPACK_BETA, FP_BETA, REP_BETA, FOR_BETA,
        FO_ALL_BETA, FO_AND_BETA, FO_EX_BETA, FO_OR_BETA,
        LAM_MON, RLAM_MON, BCONS_MON, DCONS_MON, INJL_MON, INJR_MON,
        BSWAP_MON, DSWAP_MON, BSEQ_MON, DSEQ_MON, TCONS_MON, DASGN_MON,
        BASGN_MON, BROLL_MON, STOP_MON, GO_MON,
        PROJ1_C, PROJ2_C, BCONS_CL, BCONS_CR, DCONS_CL, DCONS_CR, STOP_C,
        GO_C, INJL_C, INJR_C, RCASE_C, CASE_C, UNROLL_C, REP_C, FOR_C, FP_C,
        DSEQ_C, BSEQ_C, DSWAP_C, BSWAP_C, APP_CL, APP_CR, NUMAPP_C, MON_C,
        TCONS_C, UNPACK_C,
        PROJ1_S, PROJ2_S, REP_S, UNROLL_S, NUMAPP_S, APP_SL, APP_SR, BSEQ_S,
        DSEQ_S, MON_S, INJL_S, INJR_S, BCONS_SL, BCONS_SR, DCONS_SL,
        DCONS_SR, BSWAP_S, DSWAP_S, FOR_S, FP_S, CASE_S, UNPACK_S,
    }
)

SIMPLE = "simple"
TOP_LEVEL_CASE = "top-level-case"


@dataclass(frozen=True)
class Stepped:
    term: ProofTerm
    rule: str
    path: tuple


@dataclass(frozen=True)
class Normal:
    kind: str


class FuelExhausted(Exception):
    def __init__(self, last: ProofTerm, steps: int):
        self.last = last
        self.steps = steps
        super().__init__(f"fuel exhausted after {steps} steps")


_witness_oracle = ArithOracle()

_ELIMS = (P.App, P.NumApp, P.Proj1, P.Proj2, P.Case, P.RCase, P.Unpack, P.Unroll, P.FP, P.Mon)

# child fields shielded from reduction (binding positions, payloads)
_SHIELDED = {
    P.Lam: ("body",),
    P.NumLam: ("body",),
    P.Asgn: ("body",),
    P.TCons: ("body",),
    P.Roll: ("body",),
    P.Case: ("bleft", "bright"),
    P.RCase: ("sbody", "gbody"),
    P.FP: ("sbody", "gbody"),
    P.Mon: ("body",),
    P.Rep: ("body", "done"),
    P.For: ("body", "done"),
    P.Unpack: ("body",),
    P.Ghost: ("body",),
    P.QE: ("payload",),
    P.Dec: ("payload",),
}


def _qe_decomposable(m: P.QE) -> Optional[str]:
    """Which FO beta rule applies to this oracle leaf, if any."""
    g = m.goal
    if isinstance(g, S.Box) and isinstance(g.game, S.AssignAny):
        return FO_ALL_BETA
    if S.split_or(g) is not None:
        return FO_OR_BETA
    if S.split_and(g) is not None:
        return FO_AND_BETA
    if isinstance(g, S.Diamond) and isinstance(g.game, S.AssignAny):
        if _exists_witness(g) is not None:
            return FO_EX_BETA
        return None
    return None


_WITNESS_POOL = [S.lit(0), S.lit(1), S.lit(-1), S.lit(2), S.lit(-2), S.lit(3),
                 S.lit("1/2"), S.lit("-1/2"), S.lit(4), S.lit(5)]


def _exists_witness(g: S.Diamond) -> Optional[S.Term]:
    """Bounded enumeration over closed terms for a satisfying instance."""
    x = g.game.var
    for cand in _WITNESS_POOL:
        try:
            inst = S.subst_term(g.post, x, cand)
        except S.InadmissibleSubstitution:
            return None
        if _witness_oracle.holds_valid(None, inst):
            return cand
    return None


def is_simple(m: ProofTerm) -> bool:
    """Eliminators (and decomposable oracle leaves) occur only under binders."""
    if isinstance(m, _ELIMS):
        return False
    if isinstance(m, P.QE) and _qe_decomposable(m) is not None:
        return False
    shielded = _SHIELDED.get(type(m), ())
    for name, kind in P._child_spec(type(m)):
        if kind not in ("pt", "pt?") or name in shielded:
            continue
        v = getattr(m, name)
        if v is not None and not is_simple(v):
            return False
    return True


def _state_inspecting(m: ProofTerm) -> bool:
    return isinstance(m, (P.Split, P.Dec))


def is_normal(m: ProofTerm) -> bool:
    if is_simple(m):
        return True
    if isinstance(m, (P.Case, P.RCase)):
        return _state_inspecting(m.scrut)
    return False


def normal_kind(m: ProofTerm) -> str:
    return SIMPLE if is_simple(m) else TOP_LEVEL_CASE


def _is_case(m) -> bool:
    return isinstance(m, P.Case)


def _fresh_pvar(base, *terms):
    avoid = set()
    for t in terms:
        avoid |= P.free_pvars(t)
    return P.fresh_pvar(base, avoid)


def step(m: ProofTerm) -> Optional[tuple]:
    """One reduction step: (reduct, rule-name) or None when no rule applies.

    Total on arbitrary terms; on checker-accepted terms `None` coincides
    with `is_normal`.
    """
    return _step(m)


def step_result(m: ProofTerm):
    """Spec-shaped variant: Stepped(term, rule) or Normal(kind)."""
    s = _step(m)
    if s is None:
        return Normal(normal_kind(m))
    return Stepped(s[0], s[1], ())


def _lift_case(build, case: P.Case, rule):
    return (
        P.Case(
            case.scrut,
            case.left,
            build(case.bleft),
            case.right,
            build(case.bright),
        ),
        rule,
    )


def _step(m: ProofTerm) -> Optional[tuple]:
    match m:
        case P.QE():
            rule = _qe_decomposable(m)
            if rule is None:
                return None
            return _fo_beta(m, rule)

        case P.InjL(arg=a):
            s = _step(a)
            if s:
                return P.InjL(s[0]), INJL_S
            if _is_case(a):
                return _lift_case(P.InjL, a, INJL_C)
            return None

        case P.InjR(arg=a):
            s = _step(a)
            if s:
                return P.InjR(s[0]), INJR_S
            if _is_case(a):
                return _lift_case(P.InjR, a, INJR_C)
            return None

        case P.Stop(body=a):
            s = _step(a)
            if s:
                return P.Stop(s[0]), STOP_S
            if _is_case(a):
                return _lift_case(P.Stop, a, STOP_C)
            return None

        case P.Go(body=a):
            s = _step(a)
            if s:
                return P.Go(s[0]), GO_S
            if _is_case(a):
                return _lift_case(P.Go, a, GO_C)
            return None

        case P.SeqI(body=a, flavor=fl):
            s = _step(a)
            if s:
                return P.SeqI(s[0], fl), DSEQ_S if fl == P.DIA else BSEQ_S
            if _is_case(a):
                return _lift_case(lambda x: P.SeqI(x, fl), a, DSEQ_C if fl == P.DIA else BSEQ_C)
            return None

        case P.Swap(body=a, flavor=fl):
            s = _step(a)
            if s:
                return P.Swap(s[0], fl), DSWAP_S if fl == P.DIA else BSWAP_S
            if _is_case(a):
                return _lift_case(lambda x: P.Swap(x, fl), a, DSWAP_C if fl == P.DIA else BSWAP_C)
            return None

        case P.DPair(fst=a, snd=b):
            s = _step(a)
            if s:
                return P.DPair(s[0], b), DCONS_SL
            if _is_case(a):
                return _lift_case(lambda x: P.DPair(x, b), a, DCONS_CL)
            s = _step(b)
            if s:
                return P.DPair(a, s[0]), DCONS_SR
            if _is_case(b):
                return _lift_case(lambda x: P.DPair(a, x), b, DCONS_CR)
            return None

        case P.BPair(fst=a, snd=b):
            s = _step(a)
            if s:
                return P.BPair(s[0], b), BCONS_SL
            if _is_case(a):
                return _lift_case(lambda x: P.BPair(x, b), a, BCONS_CL)
            s = _step(b)
            if s:
                return P.BPair(a, s[0]), BCONS_SR
            if _is_case(b):
                return _lift_case(lambda x: P.BPair(a, x), b, BCONS_CR)
            return None

        case P.TCons(var=x, ghost=y, hyp=p, witness=f, body=a):
            if _is_case(a) and p not in P.free_pvars(a.scrut) and y not in P.prog_vars(a.scrut):
                return _lift_case(
                    lambda z: P.TCons(x, y, p, f, z), a, TCONS_C
                )
            return None

        case P.App(fn=f, arg=a):
            s = _step(f)
            if s:
                return P.App(s[0], a), APP_SL
            if _is_case(f):
                return _lift_case(lambda x: P.App(x, a), f, APP_CL)
            s = _step(a)
            if s:
                return P.App(f, s[0]), APP_SR
            if _is_case(a):
                return _lift_case(lambda x: P.App(f, x), a, APP_CR)
            if isinstance(f, P.Lam):
                return subst_pt(f.body, f.hyp, a), LAM_PHI_BETA
            return None

        case P.NumApp(fn=f, term=t):
            s = _step(f)
            if s:
                return P.NumApp(s[0], t), NUMAPP_S
            if _is_case(f):
                return _lift_case(lambda x: P.NumApp(x, t), f, NUMAPP_C)
            if isinstance(f, P.NumLam):
                try:
                    return subst_term_pt(f.body, f.var, t), LAM_Q_BETA
                except S.InadmissibleSubstitution:
                    return None
            return None

        case P.Proj1(arg=a):
            s = _step(a)
            if s:
                return P.Proj1(s[0]), PROJ1_S
            if _is_case(a):
                return _lift_case(P.Proj1, a, PROJ1_C)
            if isinstance(a, (P.DPair, P.BPair)):
                return a.fst, PROJ1_BETA
            return None

        case P.Proj2(arg=a):
            s = _step(a)
            if s:
                return P.Proj2(s[0]), PROJ2_S
            if _is_case(a):
                return _lift_case(P.Proj2, a, PROJ2_C)
            if isinstance(a, (P.DPair, P.BPair)):
                return a.snd, PROJ2_BETA
            return None

        case P.Unroll(body=a):
            s = _step(a)
            if s:
                return P.Unroll(s[0]), UNROLL_S
            if _is_case(a):
                return _lift_case(P.Unroll, a, UNROLL_C)
            if isinstance(a, P.Roll):
                return a.body, UNROLL_BETA
            return None

        case P.Case(scrut=a, left=l, bleft=bl, right=r, bright=br):
            s = _step(a)
            if s:
                return P.Case(s[0], l, bl, r, br), CASE_S
            if _is_case(a):
                return _lift_case(
                    lambda x: P.Case(x, l, bl, r, br), a, CASE_C
                )
            if isinstance(a, P.InjL):
                return subst_pt(bl, l, a.arg), CASE_BETA_L
            if isinstance(a, P.InjR):
                return subst_pt(br, r, a.arg), CASE_BETA_R
            return None

        case P.RCase(scrut=a, svar=s_, sbody=bs, gvar=g, gbody=bg):
            st = _step(a)
            if st:
                return P.RCase(st[0], s_, bs, g, bg), CASE_S
            if _is_case(a):
                return _lift_case(
                    lambda x: P.RCase(x, s_, bs, g, bg), a, RCASE_C
                )
            if isinstance(a, P.Stop):
                return subst_pt(bs, s_, a.body), CASE_BETA_L
            if isinstance(a, P.Go):
                return subst_pt(bg, g, a.body), CASE_BETA_R
            return None

        case P.Unpack(var=x, ghost=yu, hyp=p, scrut=a, body=n):
            s = _step(a)
            if s:
                return P.Unpack(x, yu, p, s[0], n), UNPACK_S
            if _is_case(a):
                return _lift_case(
                    lambda z: P.Unpack(x, yu, p, z, n), a, UNPACK_C
                )
            if isinstance(a, P.TCons):
                yt = a.ghost
                n1 = P.rename_pt(n, yu, yt) if yu != yt else n
                body = P.rename_pt(subst_pt(n1, p, a.body), x, yt)
                return P.Ghost(yt, a.witness, a.hyp, body), UNPACK_BETA
            return None

        case P.Rep(hyp=p, init=a, body=n, done=o, inv=j):
            s = _step(a)
            if s:
                return P.Rep(p, s[0], n, o, j), REP_S
            if _is_case(a):
                return _lift_case(lambda x: P.Rep(p, x, n, o, j), a, REP_C)
            q = _fresh_pvar("q", n, o)
            reduct = P.Roll(
                P.DPair(
                    subst_pt(o, p, a),
                    P.Mon(
                        subst_pt(n, p, a),
                        q,
                        P.Rep(p, P.PVar(q), n, o, j),
                    ),
                )
            )
            return reduct, REP_BETA

        case P.For(hyp=p, mhyp=q, m0=m0, init=a, body=b, done=c, metric=mt, inv=inv):
            s = _step(a)
            if s:
                return P.For(p, q, m0, s[0], b, c, mt, inv), FOR_S
            if _is_case(a):
                return _lift_case(
                    lambda x: P.For(p, q, m0, x, b, c, mt, inv), a, FOR_C
                )
            return _for_beta(m), FOR_BETA

        case P.FP(scrut=a, svar=s_, sbody=b, gvar=g, gbody=c):
            st = _step(a)
            if st:
                return P.FP(st[0], s_, b, g, c), FP_S
            if _is_case(a):
                return _lift_case(lambda x: P.FP(x, s_, b, g, c), a, FP_C)
            # every use of the hypothesis g becomes a recursive application;
            # the Mon scrutinee stays free so the rcase binder recaptures it
            w = _fresh_pvar("w", b, c)
            unrolled = subst_pt(
                c, g, P.Mon(P.PVar(g), w, P.FP(P.PVar(w), s_, b, g, c))
            )
            return P.RCase(a, s_, b, g, unrolled), FP_BETA

        case P.Mon(scrut=a, hyp=p, body=n):
            st = _step(a)
            if st:
                return P.Mon(st[0], p, n), MON_S
            if _is_case(a):
                return (
                    P.Case(
                        a.scrut,
                        a.left,
                        P.Mon(a.bleft, p, n),
                        a.right,
                        P.Mon(a.bright, p, n),
                    ),
                    MON_C,
                )
            return _mon_conv(m)

    return None


def _fo_beta(m: P.QE, rule: str):
    g = m.goal
    if rule == FO_ALL_BETA:
        x = g.game.var
        ghost = f"{x}0"
        i = 0
        used = P.prog_vars(m)
        while ghost in used:
            i += 1
            ghost = f"{x}{i}"
        return P.NumLam(x, ghost, P.QE(g.post, m.payload)), FO_ALL_BETA
    if rule == FO_OR_BETA:
        return P.Dec(g, m.payload), FO_OR_BETA
    if rule == FO_AND_BETA:
        l, r = S.split_and(g)
        return P.DPair(P.QE(l, m.payload), P.QE(r, m.payload)), FO_AND_BETA
    if rule == FO_EX_BETA:
        x = g.game.var
        f = _exists_witness(g)
        inst = S.subst_term(g.post, x, f)
        used = P.prog_vars(m)
        ghost = f"{x}0"
        i = 0
        while ghost in used:
            i += 1
            ghost = f"{x}{i}"
        hyp = _fresh_pvar(x, m.payload or P.PVar("_"))
        return (
            P.TCons(x, ghost, hyp, f, P.QE(inst, m.payload)),
            FO_EX_BETA,
        )
    raise AssertionError(rule)


def _for_beta(m: P.For) -> ProofTerm:
    mt, inv = m.metric, m.inv
    zero = S.lit(0)
    decision = S.Or(S.Cmp(mt, "=", zero), S.Cmp(mt, ">=", S.lit(1)))
    scrut = P.Dec(decision, m.init)
    l = _fresh_pvar("l", m.body, m.done, m.init)
    r = _fresh_pvar("r", m.body, m.done, m.init, P.PVar(l))
    rr = _fresh_pvar("rr", m.body, m.done, m.init, P.PVar(l), P.PVar(r))
    t = _fresh_pvar("t", m.body, m.done, m.init)

    stop_branch = P.Stop(
        subst_pt(
            subst_pt(m.done, m.hyp, m.init), m.mhyp, P.Proj1(P.PVar(l))
        )
    )
    step_inst = subst_pt(
        subst_pt(m.body, m.hyp, m.init),
        m.mhyp,
        P.DPair(P.PVar(rr), P.Proj1(P.PVar(r))),
    )
    go_branch = P.Ghost(
        m.m0,
        mt,
        rr,
        P.Go(
            P.Mon(
                step_inst,
                t,
                P.For(m.hyp, m.mhyp, m.m0, P.Proj1(P.PVar(t)), m.body, m.done, mt, inv),
            )
        ),
    )
    return P.Case(scrut, l, stop_branch, r, go_branch)


def _mon_conv(m: P.Mon) -> Optional[tuple]:
    a, p, n = m.scrut, m.hyp, m.body
    match a:
        case P.Lam(hyp=h, ann=ann, body=b):
            return P.Lam(h, ann, subst_pt(n, p, b)), LAM_MON
        case P.NumLam(var=x, ghost=y, body=b):
            return P.NumLam(x, y, subst_pt(n, p, b)), RLAM_MON
        case P.BPair(fst=f, snd=s):
            return (
                P.BPair(P.Mon(f, p, n), P.Mon(s, p, n)),
                BCONS_MON,
            )
        case P.DPair(fst=f, snd=s):
            return P.DPair(f, subst_pt(n, p, s)), DCONS_MON
        case P.InjL(arg=b):
            return P.InjL(P.Mon(b, p, n)), INJL_MON
        case P.InjR(arg=b):
            return P.InjR(P.Mon(b, p, n)), INJR_MON
        case P.Swap(body=b, flavor=fl):
            rule = DSWAP_MON if fl == P.DIA else BSWAP_MON
            return P.Swap(P.Mon(b, p, n), fl), rule
        case P.SeqI(body=b, flavor=fl):
            q = _fresh_pvar("q", n)
            rule = DSEQ_MON if fl == P.DIA else BSEQ_MON
            return (
                P.SeqI(P.Mon(b, q, P.Mon(P.PVar(q), p, n)), fl),
                rule,
            )
        case P.Asgn(var=x, ghost=y, hyp=h, body=b, flavor=fl):
            rule = DASGN_MON if fl == P.DIA else BASGN_MON
            return P.Asgn(x, y, h, subst_pt(n, p, b), fl), rule
        case P.TCons(var=x, ghost=y, hyp=h, witness=f, body=b):
            return P.TCons(x, y, h, f, subst_pt(n, p, b)), TCONS_MON
        case P.Stop(body=b):
            return P.Stop(subst_pt(n, p, b)), STOP_MON
        case P.Go(body=b):
            q = _fresh_pvar("q", n)
            return (
                P.Go(P.Mon(b, q, P.Mon(P.PVar(q), p, n))),
                GO_MON,
            )
        case P.Roll(body=b):
            t = _fresh_pvar("t", n)
            return (
                P.Roll(
                    P.DPair(
                        P.Mon(P.Proj1(b), p, n),
                        P.Mon(P.Proj2(b), t, P.Mon(P.PVar(t), p, n)),
                    )
                ),
                BROLL_MON,
            )
        case P.Ghost(var=x, term=f, hyp=h, body=b):
            return P.Ghost(x, f, h, P.Mon(b, p, n)), GHOST_MON
    return None


def redex_path(old: ProofTerm, new: ProofTerm) -> str:
    """Dot-path to the outermost changed position between a term and its
    reduct; stable across runs, used by the step trace."""
    parts = []
    while True:
        if type(old) is not type(new):
            break
        diff = []
        for name, kind in P._child_spec(type(old)):
            if kind not in ("pt", "pt?"):
                continue
            a, b = getattr(old, name), getattr(new, name)
            if a != b:
                diff.append((name, a, b))
        fixed = [
            f.name
            for f in type(old).__dataclass_fields__.values()
            if f.name not in {d[0] for d in diff}
        ]
        non_pt_changed = any(
            getattr(old, n) != getattr(new, n)
            for n in type(old).__dataclass_fields__
            if n in fixed
        )
        if len(diff) != 1 or non_pt_changed:
            break
        name, a, b = diff[0]
        if a is None or b is None:
            break
        parts.append(name)
        old, new = a, b
    return ".".join(parts) or "root"


def normalize(m: ProofTerm, fuel: int = 10**6):
    """Iterate `step` until normal; returns (normal_form, steps, trace).

    The trace records one (rule, reduct) node per step.  Raises
    FuelExhausted (carrying the last term) when fuel runs out.
    """
    if fuel <= 0:
        raise ValueError("fuel must be positive")
    trace = []
    cur = m
    for i in range(fuel):
        s = _step(cur)
        if s is None:
            return cur, i, trace
        cur, rule = s[0], s[1]
        trace.append((rule, cur))
    raise FuelExhausted(cur, fuel)
