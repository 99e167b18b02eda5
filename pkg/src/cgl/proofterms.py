"""Proof terms: the functional language whose types are game formulas.

Every binder records its binding occurrence explicitly, including the ghost
program variables introduced by assignment-style rules, so that checking,
substitution, and normalization agree on names without a global supply.

Node inventory (constructor -- introducing rule):
  PVar            hypothesis
  Lam / App       test-box introduction / elimination (implication)
  NumLam / NumApp universal assignment introduction / elimination
  DPair           diamond-test introduction (conjunction)
  BPair           box-choice introduction
  Proj1 / Proj2   pair eliminations (both pair flavors)
  InjL / InjR     diamond-choice introductions (disjunction)
  Case            diamond-choice elimination
  TCons / Unpack  diamond-assignment introduction / elimination (existential)
  Asgn            deterministic assignment (diamond and box flavor)
  SeqI            sequential-game introduction (both flavors)
  Swap            dual-game introduction (both flavors)
  Stop / Go / RCase / For / FP   diamond repetition
  Rep / Roll / Unroll            box repetition
  Mon             postcondition weakening
  QE / Dec / Split               first-order oracle leaves
  Ghost           remember a term's value in a fresh variable
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Optional, Union

from . import syntax as S
from .syntax import Formula, Term, rename


class ProofTerm:
    __slots__ = ()


DIA = "d"
BOX = "b"


@dataclass(frozen=True, slots=True)
class PVar(ProofTerm):
    name: str


@dataclass(frozen=True, slots=True)
class Lam(ProofTerm):
    hyp: str
    ann: Formula
    body: ProofTerm


@dataclass(frozen=True, slots=True)
class App(ProofTerm):
    fn: ProofTerm
    arg: ProofTerm


@dataclass(frozen=True, slots=True)
class NumLam(ProofTerm):
    var: str
    ghost: str
    body: ProofTerm


@dataclass(frozen=True, slots=True)
class NumApp(ProofTerm):
    fn: ProofTerm
    term: Term


@dataclass(frozen=True, slots=True)
class DPair(ProofTerm):
    fst: ProofTerm
    snd: ProofTerm


@dataclass(frozen=True, slots=True)
class BPair(ProofTerm):
    fst: ProofTerm
    snd: ProofTerm


@dataclass(frozen=True, slots=True)
class Proj1(ProofTerm):
    arg: ProofTerm


@dataclass(frozen=True, slots=True)
class Proj2(ProofTerm):
    arg: ProofTerm


@dataclass(frozen=True, slots=True)
class InjL(ProofTerm):
    arg: ProofTerm


@dataclass(frozen=True, slots=True)
class InjR(ProofTerm):
    arg: ProofTerm


@dataclass(frozen=True, slots=True)
class Case(ProofTerm):
    scrut: ProofTerm
    left: str
    bleft: ProofTerm
    right: str
    bright: ProofTerm


@dataclass(frozen=True, slots=True)
class TCons(ProofTerm):
    var: str
    ghost: str
    hyp: str
    witness: Term
    body: ProofTerm


@dataclass(frozen=True, slots=True)
class Unpack(ProofTerm):
    var: str
    ghost: str
    hyp: str
    scrut: ProofTerm
    body: ProofTerm


@dataclass(frozen=True, slots=True)
class Asgn(ProofTerm):
    var: str
    ghost: str
    hyp: str
    body: ProofTerm
    flavor: str  # DIA or BOX


@dataclass(frozen=True, slots=True)
class SeqI(ProofTerm):
    body: ProofTerm
    flavor: str


@dataclass(frozen=True, slots=True)
class Swap(ProofTerm):
    body: ProofTerm
    flavor: str  # flavor of the conclusion modality


@dataclass(frozen=True, slots=True)
class Stop(ProofTerm):
    body: ProofTerm


@dataclass(frozen=True, slots=True)
class Go(ProofTerm):
    body: ProofTerm


@dataclass(frozen=True, slots=True)
class RCase(ProofTerm):
    scrut: ProofTerm
    svar: str
    sbody: ProofTerm
    gvar: str
    gbody: ProofTerm


@dataclass(frozen=True, slots=True)
class For(ProofTerm):
    hyp: str  # invariant hypothesis in body/done
    mhyp: str  # metric hypothesis in body/done
    m0: str  # snapshot variable for the metric
    init: ProofTerm
    body: ProofTerm
    done: ProofTerm
    metric: Term
    inv: Formula


@dataclass(frozen=True, slots=True)
class FP(ProofTerm):
    scrut: ProofTerm
    svar: str
    sbody: ProofTerm
    gvar: str
    gbody: ProofTerm


@dataclass(frozen=True, slots=True)
class Rep(ProofTerm):
    hyp: str
    init: ProofTerm
    body: ProofTerm
    done: ProofTerm
    inv: Formula


@dataclass(frozen=True, slots=True)
class Roll(ProofTerm):
    body: ProofTerm


@dataclass(frozen=True, slots=True)
class Unroll(ProofTerm):
    body: ProofTerm


@dataclass(frozen=True, slots=True)
class Mon(ProofTerm):
    scrut: ProofTerm
    hyp: str
    body: ProofTerm


@dataclass(frozen=True, slots=True)
class QE(ProofTerm):
    goal: Formula
    payload: Optional[ProofTerm]


@dataclass(frozen=True, slots=True)
class Dec(ProofTerm):
    goal: Formula
    payload: Optional[ProofTerm]


@dataclass(frozen=True, slots=True)
class Split(ProofTerm):
    left: Term
    right: Term


@dataclass(frozen=True, slots=True)
class Ghost(ProofTerm):
    var: str
    term: Term
    hyp: str
    body: ProofTerm


# ---------------------------------------------------------------------------
# Context


class Context:
    """Ordered hypothesis list with unique names; exchange-insensitive."""

    __slots__ = ("_items",)

    def __init__(self, items=()):
        self._items = dict(items)

    def lookup(self, name: str) -> Optional[Formula]:
        return self._items.get(name)

    def extend(self, name: str, phi: Formula) -> "Context":
        new = dict(self._items)
        new[name] = phi
        return Context(new)

    def rename_vars(self, x: str, y: str) -> "Context":
        return Context({p: rename(phi, x, y) for p, phi in self._items.items()})

    def map_formulas(self, fn) -> "Context":
        return Context({p: fn(phi) for p, phi in self._items.items()})

    def names(self):
        return set(self._items)

    def items(self):
        return self._items.items()

    def free_vars(self) -> frozenset[str]:
        out: frozenset[str] = frozenset()
        for phi in self._items.values():
            out |= S.free_vars(phi)
        return out

    def __contains__(self, name):
        return name in self._items

    def __len__(self):
        return len(self._items)

    def __repr__(self):
        inner = ", ".join(f"{p}:{phi!r}" for p, phi in self._items.items())
        return f"Context({inner})"


# ---------------------------------------------------------------------------
# Generic traversal helpers

_CHILD_KINDS = {}  # class -> [(field, kind)], kind in {"pt", "term", "formula"}


def _child_spec(cls):
    spec = _CHILD_KINDS.get(cls)
    if spec is None:
        spec = []
        for f in fields(cls):
            t = f.type
            if t == "ProofTerm":
                spec.append((f.name, "pt"))
            elif t == "Optional[ProofTerm]":
                spec.append((f.name, "pt?"))
            elif t == "Term":
                spec.append((f.name, "term"))
            elif t == "Formula":
                spec.append((f.name, "formula"))
        _CHILD_KINDS[cls] = spec
    return spec


def _rebuild(m: ProofTerm, **updates) -> ProofTerm:
    vals = {f.name: getattr(m, f.name) for f in fields(type(m))}
    vals.update(updates)
    return type(m)(**vals)


def map_children(m: ProofTerm, on_pt, on_term, on_formula) -> ProofTerm:
    updates = {}
    for name, kind in _child_spec(type(m)):
        v = getattr(m, name)
        if kind == "pt":
            updates[name] = on_pt(v)
        elif kind == "pt?":
            updates[name] = on_pt(v) if v is not None else None
        elif kind == "term":
            updates[name] = on_term(v)
        else:
            updates[name] = on_formula(v)
    return _rebuild(m, **updates)


_GHOST_FIELDS = {
    NumLam: ("var", "ghost"),
    TCons: ("var", "ghost"),
    Unpack: ("var", "ghost"),
    Asgn: ("var", "ghost"),
    Ghost: ("var",),
    For: ("m0",),
}

_PVAR_BINDERS = {
    Lam: (("hyp", ("body",)),),
    NumLam: (),
    TCons: (("hyp", ("body",)),),
    Unpack: (("hyp", ("body",)),),
    Asgn: (("hyp", ("body",)),),
    Case: (("left", ("bleft",)), ("right", ("bright",))),
    RCase: (("svar", ("sbody",)), ("gvar", ("gbody",))),
    FP: (("svar", ("sbody",)), ("gvar", ("gbody",))),
    For: (("hyp", ("body", "done")), ("mhyp", ("body", "done"))),
    Rep: (("hyp", ("body", "done")),),
    Mon: (("hyp", ("body",)),),
    Ghost: (("hyp", ("body",)),),
}


def rename_pt(m: ProofTerm, x: str, y: str) -> ProofTerm:
    """Transpose program variables x and y everywhere, binders included.

    Transposition is a bijection on variable names, so it is self-inverse
    and capture-free without any alpha-variation.
    """
    if x == y:
        return m

    def rn(v: str) -> str:
        return y if v == x else x if v == y else v

    out = map_children(
        m,
        lambda n: rename_pt(n, x, y),
        lambda t: rename(t, x, y),
        lambda f: rename(f, x, y),
    )
    ghost_fields = _GHOST_FIELDS.get(type(m), ())
    updates = {g: rn(getattr(out, g)) for g in ghost_fields}
    return _rebuild(out, **updates) if updates else out


def free_pvars(m: ProofTerm) -> frozenset[str]:
    match m:
        case PVar(name=p):
            return frozenset((p,))
        case QE(payload=pl) | Dec(payload=pl):
            return free_pvars(pl) if pl is not None else frozenset()
        case Split():
            return frozenset()
    out = frozenset()
    bound = {h for h, _ in _PVAR_BINDERS.get(type(m), ())}
    scoped = {}
    for h, targets in _PVAR_BINDERS.get(type(m), ()):
        for t in targets:
            scoped.setdefault(t, set()).add(h)
    for name, kind in _child_spec(type(m)):
        if kind not in ("pt", "pt?"):
            continue
        v = getattr(m, name)
        if v is None:
            continue
        sub = free_pvars(v)
        sub -= frozenset(scoped.get(name, ()))
        out |= sub
    return out


def prog_vars(m: ProofTerm) -> frozenset[str]:
    """Every program variable textually occurring in m (terms, formulas,
    ghosts); conservative superset used for freshness checks."""
    out = set()
    for name, kind in _child_spec(type(m)):
        v = getattr(m, name)
        if v is None:
            continue
        if kind in ("pt", "pt?"):
            out |= prog_vars(v)
        else:
            out |= _all_vars_expr(v)
    for g in _GHOST_FIELDS.get(type(m), ()):
        out.add(getattr(m, g))
    return frozenset(out)


def _all_vars_expr(e) -> set[str]:
    out = set()
    stack = [e]
    while stack:
        n = stack.pop()
        if isinstance(n, S.Var):
            out.add(n.name)
        elif isinstance(n, (S.Assign, S.AssignAny)):
            out.add(n.var)
            if isinstance(n, S.Assign):
                stack.append(n.term)
        else:
            for f in getattr(type(n), "__dataclass_fields__", {}):
                v = getattr(n, f)
                if isinstance(v, (S.Term, S.Game, S.Formula)):
                    stack.append(v)
    return out


_SUFFIX = 0


def fresh_pvar(base: str, avoid) -> str:
    if base not in avoid:
        return base
    i = 0
    while f"{base}_{i}" in avoid:
        i += 1
    return f"{base}_{i}"


def all_pvar_names(m: ProofTerm) -> frozenset[str]:
    """Every proof-variable name occurring in m, bound or free."""
    out = set()
    stack = [m]
    while stack:
        n = stack.pop()
        if isinstance(n, PVar):
            out.add(n.name)
            continue
        for h, _ in _PVAR_BINDERS.get(type(n), ()):
            out.add(getattr(n, h))
        for name, kind in _child_spec(type(n)):
            if kind in ("pt", "pt?"):
                v = getattr(n, name)
                if v is not None:
                    stack.append(v)
    return frozenset(out)


def subst_pt(m: ProofTerm, p: str, n: ProofTerm) -> ProofTerm:
    """Capture-avoiding substitution of proof term n for proof variable p.

    Crossing a binder that re-binds a program variable x with recorded ghost
    y renames x and y inside the substituted copy, so hypotheses formed
    before the binding keep referring to the old value.
    """
    fv_n = free_pvars(n)
    return _subst_pt(m, p, n, fv_n)


def _subst_pt(m: ProofTerm, p: str, n: ProofTerm, fv_n) -> ProofTerm:
    match m:
        case PVar(name=q):
            return n if q == p else m
        case Split():
            return m

    # adjust the substituted copy when crossing program-variable binders
    n_here = n
    if type(m) in (Asgn, TCons, Unpack, NumLam):
        n_here = rename_pt(n, m.var, m.ghost)
        fv_here = fv_n
    else:
        fv_here = fv_n

    binder_groups = _PVAR_BINDERS.get(type(m), ())
    updates = {}
    renames = {}
    # alpha-vary binders that would capture free proof variables of n
    for h, targets in binder_groups:
        b = getattr(m, h)
        if b in fv_here and any(
            p in free_pvars(getattr(m, t)) - {b} for t in targets
        ):
            avoid = set(fv_here) | {b}
            for t in targets:
                avoid |= all_pvar_names(getattr(m, t))
            renames[h] = (b, fresh_pvar(b, avoid))

    scoped = {}
    for h, targets in binder_groups:
        for t in targets:
            scoped.setdefault(t, []).append(h)

    for name, kind in _child_spec(type(m)):
        if kind not in ("pt", "pt?"):
            continue
        v = getattr(m, name)
        if v is None:
            continue
        shadowed = False
        for h in scoped.get(name, []):
            if h in renames:
                old, new = renames[h]
                v = _subst_pt(v, old, PVar(new), frozenset((new,)))
            elif getattr(m, h) == p:
                shadowed = True
        if not shadowed:
            v = _subst_pt(v, p, n_here, fv_here)
        updates[name] = v
    for h, (old, new) in renames.items():
        updates[h] = new
    return _rebuild(m, **updates)


def subst_term_pt(m: ProofTerm, x: str, f: Term) -> ProofTerm:
    """Replace program variable x by term f in all embedded syntax.

    Admissibility (the expression may bind neither x nor free variables of
    f) is enforced by the underlying formula/term substitution; binders in
    the proof term itself also must not capture.
    """
    blocked = {x} | set(S.free_vars(f))

    def go(m: ProofTerm) -> ProofTerm:
        ghosts = {getattr(m, g) for g in _GHOST_FIELDS.get(type(m), ())}
        hit = ghosts & blocked
        if hit:
            raise S.InadmissibleSubstitution(
                f"proof-term binder {sorted(hit)} blocks [{x} -> {f!r}]"
            )
        return map_children(
            m,
            go,
            lambda t: S.subst_term(t, x, f),
            lambda phi: S.subst_term(phi, x, f),
        )

    return go(m)


# ---------------------------------------------------------------------------
# Alpha-equivalence (proof variables and ghost program variables)


def alpha_eq(a: ProofTerm, b: ProofTerm) -> bool:
    return _alpha(a, b, {}, {})


def _expr_eq(e1, e2, vmap: dict) -> bool:
    if type(e1) is not type(e2):
        return False
    if isinstance(e1, S.Var):
        return vmap.get(e1.name, e1.name) == e2.name
    if isinstance(e1, (S.Assign, S.AssignAny)):
        if vmap.get(e1.var, e1.var) != e2.var:
            return False
    if isinstance(e1, S.Lit):
        return e1.value == e2.value
    if isinstance(e1, S.Cmp) and e1.rel != e2.rel:
        return False
    for f in getattr(type(e1), "__dataclass_fields__", {}):
        v1, v2 = getattr(e1, f), getattr(e2, f)
        if isinstance(v1, (S.Term, S.Game, S.Formula)):
            if not _expr_eq(v1, v2, vmap):
                return False
    return True


def _alpha(a: ProofTerm, b: ProofTerm, pmap: dict, vmap: dict) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, PVar):
        return pmap.get(a.name, a.name) == b.name
    if isinstance(a, Split):
        return _expr_eq(a.left, b.left, vmap) and _expr_eq(a.right, b.right, vmap)

    pmap2 = dict(pmap)
    vmap2 = dict(vmap)
    for h, _targets in _PVAR_BINDERS.get(type(a), ()):
        pmap2[getattr(a, h)] = getattr(b, h)
    for g in _GHOST_FIELDS.get(type(a), ()):
        va, vb = getattr(a, g), getattr(b, g)
        if g == "var" and type(a) in (Asgn, TCons, Unpack, NumLam):
            if va != vb:  # the bound program variable itself is rigid
                return False
            continue
        vmap2[va] = vb

    if isinstance(a, Lam) and not _expr_eq(a.ann, b.ann, vmap):
        return False
    if isinstance(a, (QE, Dec)) and not _expr_eq(a.goal, b.goal, vmap):
        return False
    if isinstance(a, (For, Rep)) and not _expr_eq(a.inv, b.inv, vmap):
        return False
    if isinstance(a, For) and not _expr_eq(a.metric, b.metric, vmap):
        return False

    for name, kind in _child_spec(type(a)):
        va, vb = getattr(a, name), getattr(b, name)
        if kind in ("pt", "pt?"):
            if (va is None) != (vb is None):
                return False
            if va is not None and not _alpha(va, vb, pmap2, vmap2):
                return False
        elif kind == "term" and name not in ("metric",):
            if name == "witness" or name == "term":
                if not _expr_eq(va, vb, vmap):  # witnesses live outside the binder
                    return False
        elif kind == "formula" and name in ("ann", "goal", "inv"):
            continue
    if hasattr(a, "flavor") and a.flavor != getattr(b, "flavor"):
        return False
    return True


Judgment = Union[Formula]
