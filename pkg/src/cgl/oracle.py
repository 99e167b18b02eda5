"""Sound, incomplete validity oracle for first-order rational arithmetic.

Decides sequents  rho -> phi  over exact rational states in three tiers:
ground evaluation, linear arithmetic by variable elimination, and
reject-with-incompleteness for everything else (nonlinear products,
non-literal divisors).

Quotient/remainder terms with literal divisors are compiled away with
auxiliary integer quotient variables; elimination runs Fourier-Motzkin
with gcd/floor tightening on all-integer constraints, which certifies the
modular-arithmetic facts the proof corpus needs.  `Valid` answers are
never produced for falsifiable formulas; `Refuted` answers always carry a
witness state.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction
from typing import Optional

from . import syntax as S
from .syntax import Formula, State, Term

VALID = "valid"
REFUTED = "refuted"
UNKNOWN = "unknown"

_BRANCH_CAP = 4096


class OracleResult:
    __slots__ = ("status", "witness", "reason")

    def __init__(self, status, witness=None, reason=""):
        self.status = status
        self.witness = witness
        self.reason = reason

    def __repr__(self):
        w = f", witness={self.witness!r}" if self.witness is not None else ""
        return f"OracleResult({self.status}{w})"


# ---------------------------------------------------------------------------
# First-order view of formulas


def fo_view(phi: Formula):
    """Structured first-order view, or None when phi is genuinely modal."""
    if isinstance(phi, S.Cmp):
        return ("cmp", phi.rel, phi.left, phi.right)
    disj = S.split_or(phi)
    if disj is not None:
        a, b = disj
        va, vb = fo_view(a), fo_view(b)
        return ("or", va, vb) if va and vb else None
    conj = S.split_and(phi)
    if conj is not None:
        a, b = conj
        va, vb = fo_view(a), fo_view(b)
        return ("and", va, vb) if va and vb else None
    imp = S.split_implies(phi)
    if imp is not None:
        a, b = imp
        va, vb = fo_view(a), fo_view(b)
        return ("imp", va, vb) if va and vb else None
    if isinstance(phi, S.Box) and isinstance(phi.game, S.AssignAny):
        body = fo_view(phi.post)
        return ("forall", phi.game.var, body) if body else None
    if isinstance(phi, S.Diamond) and isinstance(phi.game, S.AssignAny):
        body = fo_view(phi.post)
        return ("exists", phi.game.var, body) if body else None
    return None


def is_first_order(phi: Formula) -> bool:
    return fo_view(phi) is not None


def has_quantifier(view) -> bool:
    tag = view[0]
    if tag == "cmp":
        return False
    if tag in ("forall", "exists"):
        return True
    return any(has_quantifier(v) for v in view[1:])


_NEG_REL = {"<=": ">", "<": ">=", "=": "!=", "!=": "=", ">": "<=", ">=": "<"}


def _nnf(view, neg: bool, fresh, incomplete: list):
    """Negation normal form of the satisfiability problem; universal
    subproblems are weakened to `true`, which is sound for refutation."""
    tag = view[0]
    if tag == "cmp":
        _, rel, a, b = view
        return ("cmp", _NEG_REL[rel] if neg else rel, a, b)
    if tag == "and":
        l, r = _nnf(view[1], neg, fresh, incomplete), _nnf(view[2], neg, fresh, incomplete)
        return ("or" if neg else "and", l, r)
    if tag == "or":
        l, r = _nnf(view[1], neg, fresh, incomplete), _nnf(view[2], neg, fresh, incomplete)
        return ("and" if neg else "or", l, r)
    if tag == "imp":
        l = _nnf(view[1], not neg, fresh, incomplete)
        r = _nnf(view[2], neg, fresh, incomplete)
        return ("and" if neg else "or", l, r)
    if tag == "forall":
        flipped = "exists" if neg else "forall"
        return _nnf((flipped, view[1], view[2]), False, fresh, incomplete) if neg else _quant(view, neg, fresh, incomplete)
    if tag == "exists":
        return _quant(view, neg, fresh, incomplete)
    raise ValueError(view)


def _quant(view, neg, fresh, incomplete):
    tag, x, body = view
    if neg:
        tag = "exists" if tag == "forall" else "forall"
    if tag == "exists":
        x2 = fresh(x)
        return _nnf(_rename_view(body, x, x2), neg, fresh, incomplete)
    incomplete.append(view)
    return ("true",)


def _rename_view(view, x, y):
    tag = view[0]
    if tag == "cmp":
        return ("cmp", view[1], S.rename(view[2], x, y), S.rename(view[3], x, y))
    if tag in ("and", "or", "imp"):
        return (tag, _rename_view(view[1], x, y), _rename_view(view[2], x, y))
    if tag in ("forall", "exists"):
        if view[1] in (x, y):
            return view
        return (tag, view[1], _rename_view(view[2], x, y))
    return view


def _dnf(view):
    tag = view[0]
    if tag == "true":
        return [[]]
    if tag == "cmp":
        _, rel, a, b = view
        if rel == "!=":
            return [[("<", a, b)], [("<", b, a)]]
        return [[(rel, a, b)]]
    if tag == "and":
        left, right = _dnf(view[1]), _dnf(view[2])
        out = []
        for l in left:
            for r in right:
                out.append(l + r)
                if len(out) > _BRANCH_CAP:
                    raise _TooBig()
        return out
    if tag == "or":
        return _dnf(view[1]) + _dnf(view[2])
    raise ValueError(view)


class _TooBig(Exception):
    pass


# ---------------------------------------------------------------------------
# Linear sums and constraint systems


class LinSum:
    __slots__ = ("coeffs", "const")

    def __init__(self, coeffs=None, const=Fraction(0)):
        self.coeffs = {k: v for k, v in (coeffs or {}).items() if v != 0}
        self.const = const

    def __add__(self, other):
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, Fraction(0)) + v
        return LinSum(out, self.const + other.const)

    def __sub__(self, other):
        return self + other.scale(Fraction(-1))

    def scale(self, c: Fraction):
        return LinSum({k: v * c for k, v in self.coeffs.items()}, self.const * c)

    def is_const(self):
        return not self.coeffs

    def key(self):
        return (tuple(sorted(self.coeffs.items())), self.const)

    def __repr__(self):
        parts = [f"{v}*{k}" for k, v in sorted(self.coeffs.items())]
        parts.append(str(self.const))
        return " + ".join(parts)


class _NonLinear(Exception):
    pass


class _Linearizer:
    """Compiles terms into linear sums over state variables plus auxiliary
    quotient/remainder variables; abs/min/max fork case branches."""

    def __init__(self):
        self.defs = {}  # canonical key -> (qvar, rvar, def-constraints)
        self.counter = 0

    def term(self, t: Term):
        """Returns [(side_constraints, LinSum)] over all case branches."""
        match t:
            case S.Lit(value=v):
                return [([], LinSum({}, v))]
            case S.Var(name=x):
                return [([], LinSum({("v", x): Fraction(1)}))]
            case S.Plus(left=a, right=b):
                return self._bin(a, b, lambda x, y: x + y)
            case S.Minus(left=a, right=b):
                return self._bin(a, b, lambda x, y: x - y)
            case S.Neg(arg=a):
                return [(c, ls.scale(Fraction(-1))) for c, ls in self.term(a)]
            case S.Times(left=a, right=b):
                out = []
                for ca, la in self.term(a):
                    for cb, lb in self.term(b):
                        if la.is_const():
                            out.append((ca + cb, lb.scale(la.const)))
                        elif lb.is_const():
                            out.append((ca + cb, la.scale(lb.const)))
                        else:
                            raise _NonLinear()
                return out
            case S.Div(left=a, right=b):
                return self._divmod(a, b, want_quot=True)
            case S.Mod(left=a, right=b):
                return self._divmod(a, b, want_quot=False)
            case S.Abs(arg=a):
                out = []
                for c, ls in self.term(a):
                    out.append((c + [("<=", ls.scale(Fraction(-1)))], ls))
                    out.append((c + [("<", ls)], ls.scale(Fraction(-1))))
                return out
            case S.Min(left=a, right=b):
                return self._minmax(a, b, take_left_when="<=")
            case S.Max(left=a, right=b):
                return self._minmax(a, b, take_left_when=">=")
        raise _NonLinear()

    def _bin(self, a, b, op):
        return [
            (ca + cb, op(la, lb))
            for ca, la in self.term(a)
            for cb, lb in self.term(b)
        ]

    def _minmax(self, a, b, take_left_when):
        out = []
        for ca, la in self.term(a):
            for cb, lb in self.term(b):
                diff = la - lb
                if take_left_when == "<=":
                    out.append((ca + cb + [("<=", diff)], la))
                    out.append((ca + cb + [("<", diff.scale(Fraction(-1)))], lb))
                else:
                    out.append((ca + cb + [("<=", diff.scale(Fraction(-1)))], la))
                    out.append((ca + cb + [("<", diff)], lb))
        return out

    def _divmod(self, a, b, want_quot):
        out = []
        for cb, lb in self.term(b):
            if not lb.is_const():
                raise _NonLinear()
            d = lb.const
            if d == 0:
                raise _NonLinear()
            for ca, la in self.term(a):
                key = (la.key(), d)
                if key not in self.defs:
                    n = self.counter
                    self.counter += 1
                    q, r = ("q", n), ("r", n)
                    qs, rs = LinSum({q: Fraction(1)}), LinSum({r: Fraction(1)})
                    defs = [
                        ("=", la - qs.scale(d) - rs),
                        ("<=", rs.scale(Fraction(-1))),
                        ("<", rs - LinSum({}, abs(d))),
                    ]
                    self.defs[key] = (q, r, defs)
                q, r, defs = self.defs[key]
                want = LinSum({(q if want_quot else r): Fraction(1)})
                out.append((ca + list(defs), want))
        return out


def _tighten(op: str, ls: LinSum, int_vars: set):
    """Strengthen a constraint whose variables are all integer-valued."""
    if ls.is_const():
        return op, ls
    if not all(v in int_vars for v in ls.coeffs):
        return op, ls
    denom = 1
    for c in ls.coeffs.values():
        denom = denom * c.denominator // _gcd(denom, c.denominator)
    scaled = ls.scale(Fraction(denom))
    g = 0
    for c in scaled.coeffs.values():
        g = _gcd(g, abs(c.numerator))
    if g == 0:
        return op, ls
    scaled = scaled.scale(Fraction(1, g))
    # now integer combination + rational const `k`: sum + k (op) 0
    k = scaled.const
    if op == "=":
        if k.denominator != 1:
            return "unsat", scaled
        return "=", scaled
    bound = -k  # sum <= bound  /  sum < bound
    if op == "<":
        nb = bound - 1 if bound.denominator == 1 else Fraction(bound.numerator // bound.denominator)
        return "<=", LinSum(scaled.coeffs, -nb)
    nb = Fraction(bound.numerator // bound.denominator)
    return "<=", LinSum(scaled.coeffs, -nb)


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def _unsat(constraints, int_vars) -> bool:
    """Certified unsatisfiability over rationals with integer-flagged vars."""
    work = list(constraints)
    for _round in range(200):
        # constant and tightening pass
        nxt = []
        for op, ls in work:
            op, ls = _tighten(op, ls, int_vars)
            if op == "unsat":
                return True
            if ls.is_const():
                k = ls.const
                if op == "=" and k != 0:
                    return True
                if op == "<=" and k > 0:
                    return True
                if op == "<" and k >= 0:
                    return True
                continue
            nxt.append((op, ls))
        work = nxt
        if not work:
            return False

        all_vars = set()
        for _, ls in work:
            all_vars |= set(ls.coeffs)
        if not all_vars:
            return False

        # substitute a rational variable defined by an equality
        subst_done = False
        for i, (op, ls) in enumerate(work):
            if op != "=":
                continue
            rat_vars = [v for v in ls.coeffs if v not in int_vars]
            if not rat_vars:
                continue
            v = rat_vars[0]
            c = ls.coeffs[v]
            rest = LinSum({k: w for k, w in ls.coeffs.items() if k != v}, ls.const)
            expr = rest.scale(Fraction(-1, 1) / c)  # v = expr
            new_work = []
            for j, (op2, ls2) in enumerate(work):
                if j == i:
                    continue
                if v in ls2.coeffs:
                    cv = ls2.coeffs[v]
                    ls2 = LinSum({k: w for k, w in ls2.coeffs.items() if k != v}, ls2.const) + expr.scale(cv)
                new_work.append((op2, ls2))
            work = new_work
            subst_done = True
            break
        if subst_done:
            continue

        # eliminate one variable by Fourier-Motzkin (rationals first)
        rat_first = sorted(all_vars, key=lambda v: (v in int_vars, str(v)))
        v = rat_first[0]
        uppers, lowers, others, eqs = [], [], [], []
        for op, ls in work:
            c = ls.coeffs.get(v)
            if c is None:
                others.append((op, ls))
            elif op == "=":
                eqs.append((op, ls))
            elif c > 0:
                uppers.append((op, ls))
            else:
                lowers.append((op, ls))
        for op, ls in eqs:  # split equalities over v into two inequalities
            (uppers if ls.coeffs[v] > 0 else lowers).append(("<=", ls))
            neg = ls.scale(Fraction(-1))
            (uppers if neg.coeffs[v] > 0 else lowers).append(("<=", neg))
        new_work = list(others)
        for opu, lsu in uppers:
            cu = lsu.coeffs[v]
            for opl, lsl in lowers:
                cl = -lsl.coeffs[v]
                comb = lsl.scale(cu) + lsu.scale(cl)
                comb = LinSum({k: w for k, w in comb.coeffs.items() if k != v}, comb.const)
                op = "<" if (opu == "<" or opl == "<") else "<="
                new_work.append((op, comb))
        work = new_work
    return False


# ---------------------------------------------------------------------------
# Public interface


class ArithOracle:
    """Validity oracle with ground, linear, and incomplete tiers."""

    def __init__(self, witness_tries: int = 3000, seed: int = 2024):
        self._memo = {}
        self.witness_tries = witness_tries
        self.seed = seed

    def decide(self, rho: Optional[Formula], phi: Formula) -> OracleResult:
        key = (rho, phi)
        hit = self._memo.get(key)
        if hit is None:
            hit = self._decide(rho, phi)
            self._memo[key] = hit
        return hit

    def holds_valid(self, rho: Optional[Formula], phi: Formula) -> bool:
        return self.decide(rho, phi).status == VALID

    def _decide(self, rho, phi) -> OracleResult:
        goal_view = fo_view(phi)
        if goal_view is None:
            return OracleResult(UNKNOWN, reason="goal is not first-order")
        if rho is not None:
            hyp_view = fo_view(rho)
            if hyp_view is None:
                return OracleResult(UNKNOWN, reason="hypothesis is not first-order")
            problem = ("and", hyp_view, _negate(goal_view))
        else:
            problem = _negate(goal_view)

        incomplete: list = []
        counter = itertools.count()

        def fresh(x):
            return f"{x}?{next(counter)}"

        refutable = not (has_quantifier(goal_view) or (rho is not None and has_quantifier(fo_view(rho))))
        try:
            nnf = _nnf(problem, False, fresh, incomplete)
            branches = _dnf(nnf)
        except (_TooBig, ValueError):
            return OracleResult(UNKNOWN, reason="formula too large")

        all_unsat = True
        for branch in branches:
            try:
                if not self._branch_unsat(branch):
                    all_unsat = False
                    break
            except _NonLinear:
                all_unsat = False
                break
        if all_unsat:
            return OracleResult(VALID)

        if refutable:
            w = self._search_witness(rho, phi)
            if w is not None:
                return OracleResult(REFUTED, witness=w)
        return OracleResult(UNKNOWN, reason="no certificate and no witness found")

    def _branch_unsat(self, literals) -> bool:
        lin = _Linearizer()
        systems = [[]]
        for rel, a, b in literals:
            expanded = []
            for conds_a, la in lin.term(a):
                for conds_b, lb in lin.term(b):
                    diff = la - lb
                    if rel in ("<=", "<", "="):
                        cons = [(rel, diff)]
                    elif rel == ">":
                        cons = [("<", diff.scale(Fraction(-1)))]
                    elif rel == ">=":
                        cons = [("<=", diff.scale(Fraction(-1)))]
                    else:
                        raise ValueError(rel)
                    expanded.append(list(conds_a) + list(conds_b) + cons)
            systems = [s + e for s in systems for e in expanded]
            if len(systems) > _BRANCH_CAP:
                raise _NonLinear()
        int_vars = {("q", n) for n in range(lin.counter)}
        return all(_unsat(sys_, int_vars) for sys_ in systems)

    def _search_witness(self, rho, phi) -> Optional[State]:
        fv = set()
        if rho is not None:
            fv |= S.free_vars(rho)
        fv |= S.free_vars(phi)
        fv = sorted(fv)

        def falsifies(state):
            try:
                if rho is not None and not S.eval_fo(rho, state):
                    return False
                return not S.eval_fo(phi, state)
            except (TypeError, ArithmeticError):
                return False

        if not fv:
            return State() if falsifies(State()) else None

        if len(fv) <= 3:
            for combo in itertools.product(range(-8, 9), repeat=len(fv)):
                st = State(dict(zip(fv, map(Fraction, combo))))
                if falsifies(st):
                    return st
        rng = random.Random(self.seed)
        for _ in range(self.witness_tries):
            st = State(
                {x: Fraction(rng.randint(-16, 16), rng.randint(1, 4)) for x in fv}
            )
            if falsifies(st):
                return st
        return None


def _negate(view):
    tag = view[0]
    if tag == "cmp":
        return ("cmp", _NEG_REL[view[1]], view[2], view[3])
    if tag == "and":
        return ("or", _negate(view[1]), _negate(view[2]))
    if tag == "or":
        return ("and", _negate(view[1]), _negate(view[2]))
    if tag == "imp":
        return ("and", view[1], _negate(view[2]))
    if tag == "forall":
        return ("exists", view[1], _negate(view[2]))
    if tag == "exists":
        return ("forall", view[1], _negate(view[2]))
    raise ValueError(view)
