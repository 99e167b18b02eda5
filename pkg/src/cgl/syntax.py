"""Core syntax: terms, games, formulas, and their static semantics.

Terms are rational-valued expressions over a global game state.  Games and
formulas are mutually recursive; the derived propositional connectives
(and/or/implies/quantifiers/dormant choice) live in the parser layer and
elaborate into this core.

All nodes are immutable and hashable; operations build new trees.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .rational import DivisionByZero, Rational, format_rational, rat_quot, rat_rem

# ---------------------------------------------------------------------------
# Terms


class Term:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Lit(Term):
    value: Rational

    def __repr__(self):
        return f"Lit({format_rational(self.value)})"


@dataclass(frozen=True, slots=True)
class Var(Term):
    name: str

    def __repr__(self):
        return f"Var({self.name})"


@dataclass(frozen=True, slots=True)
class Plus(Term):
    left: Term
    right: Term


@dataclass(frozen=True, slots=True)
class Times(Term):
    left: Term
    right: Term


@dataclass(frozen=True, slots=True)
class Minus(Term):
    left: Term
    right: Term


@dataclass(frozen=True, slots=True)
class Neg(Term):
    arg: Term


@dataclass(frozen=True, slots=True)
class Div(Term):
    """Integer quotient; the divisor is assumed nonzero."""

    left: Term
    right: Term


@dataclass(frozen=True, slots=True)
class Mod(Term):
    """Rational remainder paired with Div; divisor assumed nonzero."""

    left: Term
    right: Term


@dataclass(frozen=True, slots=True)
class Abs(Term):
    arg: Term


@dataclass(frozen=True, slots=True)
class Min(Term):
    left: Term
    right: Term


@dataclass(frozen=True, slots=True)
class Max(Term):
    left: Term
    right: Term


def lit(x) -> Lit:
    return Lit(Fraction(x))


# ---------------------------------------------------------------------------
# Games and formulas


class Game:
    __slots__ = ()


class Formula:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Test(Game):
    cond: Formula


@dataclass(frozen=True, slots=True)
class Assign(Game):
    var: str
    term: Term


@dataclass(frozen=True, slots=True)
class AssignAny(Game):
    var: str


@dataclass(frozen=True, slots=True)
class Choice(Game):
    left: Game
    right: Game


@dataclass(frozen=True, slots=True)
class Seq(Game):
    left: Game
    right: Game


@dataclass(frozen=True, slots=True)
class Repeat(Game):
    body: Game


@dataclass(frozen=True, slots=True)
class Dual(Game):
    body: Game


REL_OPS = ("<=", "<", "=", "!=", ">", ">=")


@dataclass(frozen=True, slots=True)
class Cmp(Formula):
    left: Term
    rel: str
    right: Term

    def __post_init__(self):
        if self.rel not in REL_OPS:
            raise ValueError(f"bad relation {self.rel!r}")


@dataclass(frozen=True, slots=True)
class Diamond(Formula):
    game: Game
    post: Formula


@dataclass(frozen=True, slots=True)
class Box(Formula):
    game: Game
    post: Formula


Expr = Union[Term, Game, Formula]

# Derived connectives, exactly as the core defines them.

TRUE = Cmp(lit(1), ">", lit(0))
FALSE = Cmp(lit(0), ">", lit(1))


def And(a: Formula, b: Formula) -> Formula:
    return Diamond(Test(a), b)


def Or(a: Formula, b: Formula) -> Formula:
    return Diamond(Choice(Test(a), Test(b)), TRUE)


def Implies(a: Formula, b: Formula) -> Formula:
    return Box(Test(a), b)


def Not(a: Formula) -> Formula:
    return Implies(a, FALSE)


def Forall(x: str, a: Formula) -> Formula:
    return Box(AssignAny(x), a)


def Exists(x: str, a: Formula) -> Formula:
    return Diamond(AssignAny(x), a)


def DormantChoice(a: Game, b: Game) -> Game:
    return Dual(Choice(Dual(a), Dual(b)))


def split_and(phi: Formula):
    """Inverse of And(); None when phi is not a derived conjunction."""
    if isinstance(phi, Diamond) and isinstance(phi.game, Test):
        return phi.game.cond, phi.post
    return None


def split_or(phi: Formula):
    """Inverse of Or(); None when phi is not a derived disjunction."""
    if (
        isinstance(phi, Diamond)
        and phi.post == TRUE
        and isinstance(phi.game, Choice)
        and isinstance(phi.game.left, Test)
        and isinstance(phi.game.right, Test)
    ):
        return phi.game.left.cond, phi.game.right.cond
    return None


def split_implies(phi: Formula):
    if isinstance(phi, Box) and isinstance(phi.game, Test):
        return phi.game.cond, phi.post
    return None


# ---------------------------------------------------------------------------
# State and term evaluation


class State:
    """Total valuation of program variables, default 0, functional update."""

    __slots__ = ("_vals",)

    def __init__(self, vals=None):
        self._vals = dict(vals) if vals else {}
        for k, v in list(self._vals.items()):
            self._vals[k] = Fraction(v)

    def get(self, x: str) -> Rational:
        return self._vals.get(x, Fraction(0))

    def set(self, x: str, v) -> "State":
        new = dict(self._vals)
        new[x] = Fraction(v)
        return State(new)

    def swap(self, x: str, y: str) -> "State":
        new = dict(self._vals)
        new[x], new[y] = self.get(y), self.get(x)
        return State(new)

    def vars(self):
        return set(self._vals)

    def agrees_with(self, other: "State", on) -> bool:
        return all(self.get(x) == other.get(x) for x in on)

    def __eq__(self, other):
        if not isinstance(other, State):
            return NotImplemented
        keys = self.vars() | other.vars()
        return all(self.get(k) == other.get(k) for k in keys)

    def __hash__(self):
        return hash(frozenset((k, v) for k, v in self._vals.items() if v != 0))

    def __repr__(self):
        inner = ", ".join(
            f"{k}={format_rational(v)}" for k, v in sorted(self._vals.items())
        )
        return f"State({inner})"


def eval_term(t: Term, state: State) -> Rational:
    """Exact rational value of t at state (compiled and cached per node)."""
    return compile_term(t)(state)


def eval_cmp(rel: str, a: Rational, b: Rational) -> bool:
    match rel:
        case "<=":
            return a <= b
        case "<":
            return a < b
        case "=":
            return a == b
        case "!=":
            return a != b
        case ">":
            return a > b
        case ">=":
            return a >= b
    raise ValueError(rel)


# ---------------------------------------------------------------------------
# Static semantics: free, bound, and must-bound variables


def free_vars(e: Expr) -> frozenset[str]:
    match e:
        case Lit():
            return frozenset()
        case Var(name=x):
            return frozenset((x,))
        case Plus() | Times() | Minus() | Div() | Mod() | Min() | Max():
            return free_vars(e.left) | free_vars(e.right)
        case Neg(arg=a) | Abs(arg=a):
            return free_vars(a)
        case Cmp(left=a, right=b):
            return free_vars(a) | free_vars(b)
        case Diamond(game=g, post=p) | Box(game=g, post=p):
            return free_vars(g) | (free_vars(p) - must_bound_vars(g))
        case Test(cond=c):
            return free_vars(c)
        case Assign(term=f):
            return free_vars(f)
        case AssignAny():
            return frozenset()
        case Seq(left=a, right=b):
            return free_vars(a) | (free_vars(b) - must_bound_vars(a))
        case Choice(left=a, right=b):
            return free_vars(a) | free_vars(b)
        case Repeat(body=a) | Dual(body=a):
            return free_vars(a)
    raise TypeError(f"no free variables for {e!r}")


def bound_vars(g: Game) -> frozenset[str]:
    match g:
        case Test():
            return frozenset()
        case Assign(var=x) | AssignAny(var=x):
            return frozenset((x,))
        case Choice(left=a, right=b) | Seq(left=a, right=b):
            return bound_vars(a) | bound_vars(b)
        case Repeat(body=a) | Dual(body=a):
            return bound_vars(a)
    raise TypeError(f"not a game: {g!r}")


def must_bound_vars(g: Game) -> frozenset[str]:
    match g:
        case Test():
            return frozenset()
        case Assign(var=x) | AssignAny(var=x):
            return frozenset((x,))
        case Seq(left=a, right=b):
            return must_bound_vars(a) | must_bound_vars(b)
        case Choice(left=a, right=b):
            return must_bound_vars(a) & must_bound_vars(b)
        case Repeat():
            return frozenset()
        case Dual(body=a):
            return must_bound_vars(a)
    raise TypeError(f"not a game: {g!r}")


def formula_bound_vars(phi: Formula) -> frozenset[str]:
    """All variables bound by any game occurring in phi."""
    match phi:
        case Cmp():
            return frozenset()
        case Diamond(game=g, post=p) | Box(game=g, post=p):
            return bound_vars(g) | game_formula_bound_vars(g) | formula_bound_vars(p)
    raise TypeError(f"not a formula: {phi!r}")


def game_formula_bound_vars(g: Game) -> frozenset[str]:
    match g:
        case Test(cond=c):
            return formula_bound_vars(c)
        case Assign() | AssignAny():
            return frozenset()
        case Choice(left=a, right=b) | Seq(left=a, right=b):
            return game_formula_bound_vars(a) | game_formula_bound_vars(b)
        case Repeat(body=a) | Dual(body=a):
            return game_formula_bound_vars(a)
    raise TypeError(f"not a game: {g!r}")


# ---------------------------------------------------------------------------
# Uniform renaming (transposition of two variables, including binders)


def rename(e: Expr, x: str, y: str) -> Expr:
    if x == y:
        return e

    def rn(v: str) -> str:
        return y if v == x else x if v == y else v

    match e:
        case Lit():
            return e
        case Var(name=v):
            return Var(rn(v))
        case Plus(left=a, right=b):
            return Plus(rename(a, x, y), rename(b, x, y))
        case Times(left=a, right=b):
            return Times(rename(a, x, y), rename(b, x, y))
        case Minus(left=a, right=b):
            return Minus(rename(a, x, y), rename(b, x, y))
        case Neg(arg=a):
            return Neg(rename(a, x, y))
        case Div(left=a, right=b):
            return Div(rename(a, x, y), rename(b, x, y))
        case Mod(left=a, right=b):
            return Mod(rename(a, x, y), rename(b, x, y))
        case Abs(arg=a):
            return Abs(rename(a, x, y))
        case Min(left=a, right=b):
            return Min(rename(a, x, y), rename(b, x, y))
        case Max(left=a, right=b):
            return Max(rename(a, x, y), rename(b, x, y))
        case Cmp(left=a, rel=r, right=b):
            return Cmp(rename(a, x, y), r, rename(b, x, y))
        case Diamond(game=g, post=p):
            return Diamond(rename(g, x, y), rename(p, x, y))
        case Box(game=g, post=p):
            return Box(rename(g, x, y), rename(p, x, y))
        case Test(cond=c):
            return Test(rename(c, x, y))
        case Assign(var=v, term=f):
            return Assign(rn(v), rename(f, x, y))
        case AssignAny(var=v):
            return AssignAny(rn(v))
        case Choice(left=a, right=b):
            return Choice(rename(a, x, y), rename(b, x, y))
        case Seq(left=a, right=b):
            return Seq(rename(a, x, y), rename(b, x, y))
        case Repeat(body=a):
            return Repeat(rename(a, x, y))
        case Dual(body=a):
            return Dual(rename(a, x, y))
    raise TypeError(f"cannot rename {e!r}")


def rename_state(s: State, x: str, y: str) -> State:
    return s.swap(x, y)


# ---------------------------------------------------------------------------
# Admissible term-for-variable substitution


class InadmissibleSubstitution(Exception):
    """The expression binds the substituted variable or a free variable of
    the replacement, so capture-free replacement is impossible."""


def check_admissible(e: Expr, x: str, f: Term) -> None:
    blocked = {x} | set(free_vars(f))
    if isinstance(e, Formula):
        bound = formula_bound_vars(e)
    elif isinstance(e, Game):
        bound = bound_vars(e) | game_formula_bound_vars(e)
    else:
        bound = frozenset()
    hit = bound & blocked
    if hit:
        raise InadmissibleSubstitution(
            f"substitution [{x} -> {f!r}] crosses binder of {sorted(hit)}"
        )


def subst_term(e: Expr, x: str, f: Term) -> Expr:
    """Replace free occurrences of x by f; raises when inadmissible."""
    check_admissible(e, x, f)
    return _subst(e, x, f)


def _subst(e: Expr, x: str, f: Term) -> Expr:
    match e:
        case Lit():
            return e
        case Var(name=v):
            return f if v == x else e
        case Plus(left=a, right=b):
            return Plus(_subst(a, x, f), _subst(b, x, f))
        case Times(left=a, right=b):
            return Times(_subst(a, x, f), _subst(b, x, f))
        case Minus(left=a, right=b):
            return Minus(_subst(a, x, f), _subst(b, x, f))
        case Neg(arg=a):
            return Neg(_subst(a, x, f))
        case Div(left=a, right=b):
            return Div(_subst(a, x, f), _subst(b, x, f))
        case Mod(left=a, right=b):
            return Mod(_subst(a, x, f), _subst(b, x, f))
        case Abs(arg=a):
            return Abs(_subst(a, x, f))
        case Min(left=a, right=b):
            return Min(_subst(a, x, f), _subst(b, x, f))
        case Max(left=a, right=b):
            return Max(_subst(a, x, f), _subst(b, x, f))
        case Cmp(left=a, rel=r, right=b):
            return Cmp(_subst(a, x, f), r, _subst(b, x, f))
        case Diamond(game=g, post=p):
            return Diamond(_subst(g, x, f), _subst(p, x, f))
        case Box(game=g, post=p):
            return Box(_subst(g, x, f), _subst(p, x, f))
        case Test(cond=c):
            return Test(_subst(c, x, f))
        case Assign(var=v, term=t):
            return Assign(v, _subst(t, x, f))
        case AssignAny():
            return e
        case Choice(left=a, right=b):
            return Choice(_subst(a, x, f), _subst(b, x, f))
        case Seq(left=a, right=b):
            return Seq(_subst(a, x, f), _subst(b, x, f))
        case Repeat(body=a):
            return Repeat(_subst(a, x, f))
        case Dual(body=a):
            return Dual(_subst(a, x, f))
    raise TypeError(f"cannot substitute into {e!r}")


def eval_fo(phi: Formula, state: State) -> bool:
    """Evaluate a first-order (modality-free after elaboration) formula.

    Handles comparisons plus the derived connectives; raises TypeError on
    genuine game modalities, which have no play-time truth value.
    """
    return compile_fo(phi)(state)


# ---------------------------------------------------------------------------
# Compiled evaluators (plays re-evaluate the same small terms constantly)

_ZERO = Fraction(0)
_term_fns: dict = {}
_fo_fns: dict = {}


def compile_term(t: Term):
    hit = _term_fns.get(id(t))
    if hit is not None:
        return hit[0]
    fn = _compile_term(t)
    _term_fns[id(t)] = (fn, t)
    return fn


def _compile_term(t: Term):
    match t:
        case Lit(value=v):
            return lambda s: v
        case Var(name=x):
            return lambda s: s._vals.get(x, _ZERO)
        case Plus(left=a, right=b):
            fa, fb = compile_term(a), compile_term(b)
            return lambda s: fa(s) + fb(s)
        case Times(left=a, right=b):
            fa, fb = compile_term(a), compile_term(b)
            return lambda s: fa(s) * fb(s)
        case Minus(left=a, right=b):
            fa, fb = compile_term(a), compile_term(b)
            return lambda s: fa(s) - fb(s)
        case Neg(arg=a):
            fa = compile_term(a)
            return lambda s: -fa(s)
        case Div(left=a, right=b):
            fa, fb = compile_term(a), compile_term(b)

            def quot(s, fa=fa, fb=fb, b=b):
                g = fb(s)
                if g == 0:
                    raise DivisionByZero(f"divisor {b!r} evaluates to 0")
                return rat_quot(fa(s), g)

            return quot
        case Mod(left=a, right=b):
            fa, fb = compile_term(a), compile_term(b)

            def rem(s, fa=fa, fb=fb, b=b):
                g = fb(s)
                if g == 0:
                    raise DivisionByZero(f"divisor {b!r} evaluates to 0")
                return rat_rem(fa(s), g)

            return rem
        case Abs(arg=a):
            fa = compile_term(a)
            return lambda s: abs(fa(s))
        case Min(left=a, right=b):
            fa, fb = compile_term(a), compile_term(b)
            return lambda s: min(fa(s), fb(s))
        case Max(left=a, right=b):
            fa, fb = compile_term(a), compile_term(b)
            return lambda s: max(fa(s), fb(s))
    raise TypeError(f"not a term: {t!r}")


_CMP_FNS = {
    "<=": lambda a, b: a <= b,
    "<": lambda a, b: a < b,
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


def compile_fo(phi: Formula):
    hit = _fo_fns.get(id(phi))
    if hit is not None:
        return hit[0]
    fn = _compile_fo(phi)
    _fo_fns[id(phi)] = (fn, phi)
    return fn


def _compile_fo(phi: Formula):
    if isinstance(phi, Cmp):
        fa, fb = compile_term(phi.left), compile_term(phi.right)
        op = _CMP_FNS[phi.rel]
        return lambda s: op(fa(s), fb(s))
    disj = split_or(phi)
    if disj is not None:
        fa, fb = compile_fo(disj[0]), compile_fo(disj[1])
        return lambda s: fa(s) or fb(s)
    both = split_and(phi)
    if both is not None:
        fa, fb = compile_fo(both[0]), compile_fo(both[1])
        return lambda s: fa(s) and fb(s)
    imp = split_implies(phi)
    if imp is not None:
        fa, fb = compile_fo(imp[0]), compile_fo(imp[1])
        return lambda s: (not fa(s)) or fb(s)
    raise TypeError(f"not a play-time evaluable formula: {phi!r}")
