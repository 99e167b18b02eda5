"""Canonical ASCII pretty-printer; `parser` inverts it exactly.

Precedences (low to high):
  formulas:  <-> 1, -> 2, | 3, & 4, prefix/modal/quantifier 5, atoms 6
  games:     ++/cap 1, ; 2, postfix */^d 3, atoms 4
  terms:     +/- 1, * div mod 2, unary - 3, atoms 4
"""

from __future__ import annotations

from . import proofterms as P
from . import syntax as S
from .rational import format_rational


# ---------------------------------------------------------------------------
# Terms


def print_term(t: S.Term, level: int = 0) -> str:
    def par(s, mine):
        return f"({s})" if mine < level else s

    match t:
        case S.Lit(value=v):
            s = format_rational(v)
            return par(s, 3 if v < 0 else 4)
        case S.Var(name=x):
            return x
        case S.Plus(left=a, right=b):
            return par(f"{print_term(a, 1)} + {print_term(b, 2)}", 1)
        case S.Minus(left=a, right=b):
            return par(f"{print_term(a, 1)} - {print_term(b, 2)}", 1)
        case S.Times(left=a, right=b):
            return par(f"{print_term(a, 2)} * {print_term(b, 3)}", 2)
        case S.Div(left=a, right=b):
            return par(f"{print_term(a, 2)} div {print_term(b, 3)}", 2)
        case S.Mod(left=a, right=b):
            return par(f"{print_term(a, 2)} mod {print_term(b, 3)}", 2)
        case S.Neg(arg=a):
            if isinstance(a, S.Lit) and a.value >= 0:
                return par(f"-({print_term(a)})", 3)
            return par(f"-{print_term(a, 3)}", 3)
        case S.Abs(arg=a):
            return f"abs({print_term(a)})"
        case S.Min(left=a, right=b):
            return f"min({print_term(a)}, {print_term(b)})"
        case S.Max(left=a, right=b):
            return f"max({print_term(a)}, {print_term(b)})"
    raise TypeError(f"not a term: {t!r}")


# ---------------------------------------------------------------------------
# Formulas


def _succ_view(phi: S.Formula):
    """Recognize the well-founded descent sugar  a succ b."""
    both = S.split_and(phi)
    if not both:
        return None
    l, r = both
    if (
        isinstance(l, S.Cmp)
        and l.rel == ">="
        and isinstance(l.right, S.Plus)
        and l.right.right == S.lit(1)
        and isinstance(r, S.Cmp)
        and r.rel == ">="
        and r.right == S.lit(0)
        and l.right.left == r.left
    ):
        return l.left, r.left
    return None


def print_formula(phi: S.Formula, level: int = 0) -> str:
    def par(s, mine):
        return f"({s})" if mine < level else s

    if phi == S.TRUE:
        return "tt"
    if phi == S.FALSE:
        return "ff"
    sv = _succ_view(phi)
    if sv is not None:
        a, b = sv
        return par(f"{print_term(a, 1)} succ {print_term(b, 1)}", 5)
    imp = S.split_implies(phi)
    if imp is not None:
        a, b = imp
        if b == S.FALSE:
            return par(f"!{print_formula(a, 6)}", 5)
        return par(f"{print_formula(a, 3)} -> {print_formula(b, 2)}", 2)
    disj = S.split_or(phi)
    if disj is not None:
        a, b = disj
        return par(f"{print_formula(a, 4)} | {print_formula(b, 3)}", 3)
    both = S.split_and(phi)
    if both is not None:
        a, b = both
        return par(f"{print_formula(a, 5)} & {print_formula(b, 4)}", 4)
    match phi:
        case S.Cmp(left=a, rel=r, right=b):
            return par(f"{print_term(a, 1)} {r} {print_term(b, 1)}", 6)
        case S.Box(game=g, post=p):
            if isinstance(g, S.AssignAny):
                return par(f"forall {g.var} {print_formula(p, 5)}", 5)
            return par(f"[{print_game(g)}]{print_formula(p, 5)}", 5)
        case S.Diamond(game=g, post=p):
            if isinstance(g, S.AssignAny):
                return par(f"exists {g.var} {print_formula(p, 5)}", 5)
            return par(f"<{print_game(g)}>{print_formula(p, 5)}", 5)
    raise TypeError(f"not a formula: {phi!r}")


# ---------------------------------------------------------------------------
# Games


def _cap_view(g: S.Game):
    if (
        isinstance(g, S.Dual)
        and isinstance(g.body, S.Choice)
        and isinstance(g.body.left, S.Dual)
        and isinstance(g.body.right, S.Dual)
    ):
        return g.body.left.body, g.body.right.body
    return None


def print_game(g: S.Game, level: int = 0) -> str:
    def par(s, mine):
        return f"{{{s}}}" if mine < level else s

    cap = _cap_view(g)
    if cap is not None:
        a, b = cap
        return par(f"{print_game(a, 2)} cap {print_game(b, 2)}", 1)
    match g:
        case S.Test(cond=c):
            return par(f"?{print_formula(c)}", 3)
        case S.Assign(var=x, term=t):
            return par(f"{x} := {print_term(t)}", 3)
        case S.AssignAny(var=x):
            return par(f"{x} := *", 3)
        case S.Choice(left=a, right=b):
            return par(f"{print_game(a, 2)} ++ {print_game(b, 1)}", 1)
        case S.Seq(left=a, right=b):
            return par(f"{print_game(a, 3)} ; {print_game(b, 2)}", 2)
        case S.Repeat(body=a):
            return par(f"{print_game(a, 4)}*", 3)
        case S.Dual(body=a):
            return par(f"{print_game(a, 4)}^d", 3)
    raise TypeError(f"not a game: {g!r}")


# ---------------------------------------------------------------------------
# Proof terms

_PREFIXES = {
    P.Proj1: "pi1",
    P.Proj2: "pi2",
    P.InjL: "inl",
    P.InjR: "inr",
    P.Stop: "stop",
    P.Go: "go",
    P.Roll: "roll",
    P.Unroll: "unroll",
}

# proof levels: 0 open (lambda bodies), 1 prefix chains, 2 application, 3 atoms


def print_proof(m: P.ProofTerm, level: int = 0) -> str:
    def par(s, mine):
        return f"({s})" if mine < level else s

    match m:
        case P.PVar(name=p):
            return p
        case P.Lam(hyp=p, ann=ann, body=b):
            return par(f"\\{p} : {print_formula(ann)}. {print_proof(b, 0)}", 0)
        case P.NumLam(var=x, ghost=y, body=b):
            return par(f"\\{x} : Q as {y}. {print_proof(b, 0)}", 0)
        case P.App(fn=f, arg=a):
            return par(f"{print_proof(f, 2)} {print_proof(a, 3)}", 2)
        case P.NumApp(fn=f, term=t):
            return par(f"{print_proof(f, 2)} @ {_term_atom(t)}", 2)
        case P.DPair(fst=a, snd=b):
            return f"<{print_proof(a, 0)}, {print_proof(b, 0)}>"
        case P.BPair(fst=a, snd=b):
            return f"[{print_proof(a, 0)}, {print_proof(b, 0)}]"
        case P.SeqI(body=b, flavor=fl):
            kw = "seqd" if fl == P.DIA else "seqb"
            return par(f"{kw} {print_proof(b, 1)}", 1)
        case P.Swap(body=b, flavor=fl):
            kw = "yieldd" if fl == P.DIA else "yieldb"
            return par(f"{kw} {print_proof(b, 1)}", 1)
        case P.Case(scrut=a, left=l, bleft=bl, right=r, bright=br):
            return par(
                f"case {print_proof(a, 1)} of {l}. {_branch(bl)} | {r}. {print_proof(br, 0)}",
                0,
            )
        case P.RCase(scrut=a, svar=s, sbody=bs, gvar=g, gbody=bg):
            return par(
                f"rcase {print_proof(a, 1)} of {s}. {_branch(bs)} | {g}. {print_proof(bg, 0)}",
                0,
            )
        case P.FP(scrut=a, svar=s, sbody=bs, gvar=g, gbody=bg):
            return par(
                f"fp {print_proof(a, 1)} of {s}. {_branch(bs)} | {g}. {print_proof(bg, 0)}",
                0,
            )
        case P.TCons(var=x, ghost=y, hyp=p, witness=f, body=b):
            return f"wit {x} := {print_term(f)} ({y}, {p}. {print_proof(b, 0)})"
        case P.Unpack(var=x, ghost=y, hyp=p, scrut=a, body=b):
            return (
                f"unpack({print_proof(a, 0)}; {x}, {y}, {p}. {print_proof(b, 0)})"
            )
        case P.Asgn(var=x, ghost=y, hyp=p, body=b, flavor=fl):
            kw = "asgnd" if fl == P.DIA else "asgnb"
            return f"{kw} {x} ({y}, {p}. {print_proof(b, 0)})"
        case P.For(
            hyp=p, mhyp=q, m0=m0, init=a, body=b, done=c, metric=mt, inv=inv
        ):
            return (
                f"for({print_proof(a, 0)}; {p} : {print_formula(inv)}; {q}; "
                f"{m0} := {print_term(mt)}; {print_proof(b, 0)}; {print_proof(c, 0)})"
            )
        case P.Rep(hyp=p, init=a, body=b, done=c, inv=inv):
            return (
                f"rep({print_proof(a, 0)}; {p} : {print_formula(inv)}. "
                f"{print_proof(b, 0)}; {print_proof(c, 0)})"
            )
        case P.Mon(scrut=a, hyp=p, body=b):
            return f"mon({print_proof(a, 0)}; {p}. {print_proof(b, 0)})"
        case P.QE(goal=goal, payload=pl):
            return f"FO[{print_formula(goal)}]({_payload(pl)})"
        case P.Dec(goal=goal, payload=pl):
            return f"Dec[{print_formula(goal)}]({_payload(pl)})"
        case P.Split(left=f, right=g):
            return f"split({print_term(f)}, {print_term(g)})"
        case P.Ghost(var=x, term=t, hyp=p, body=b):
            return f"ghost({x} := {print_term(t)}; {p}. {print_proof(b, 0)})"
    if type(m) in _PREFIXES:
        inner = getattr(m, "arg", None) or getattr(m, "body", None)
        return par(f"{_PREFIXES[type(m)]} {print_proof(inner, 1)}", 1)
    raise TypeError(f"not a proof term: {m!r}")


def _branch(b: P.ProofTerm) -> str:
    if isinstance(b, (P.Case, P.RCase, P.FP)):
        return f"({print_proof(b, 0)})"
    return print_proof(b, 0)


def _payload(pl) -> str:
    if pl is None:
        return ""
    parts = []
    cur = pl
    while isinstance(cur, P.DPair):
        parts.append(cur.fst)
        cur = cur.snd
    parts.append(cur)
    return ", ".join(print_proof(p, 0) for p in parts)


def _term_atom(t: S.Term) -> str:
    s = print_term(t, 4)
    return s


# ---------------------------------------------------------------------------
# Scripts


def print_script(script) -> str:
    out = []
    for kind, name, value in script.items_in_order():
        if kind == "game":
            out.append(f"game {name} = {print_game(value)}")
        elif kind == "formula":
            out.append(f"formula {name} = {print_formula(value)}")
        else:
            phi, proof = value
            out.append(
                f"theorem {name} : {print_formula(phi)} =\n  {print_proof(proof)}"
            )
    return "\n\n".join(out) + "\n"
