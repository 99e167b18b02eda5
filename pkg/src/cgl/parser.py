"""Surface syntax for `.cgl` proof scripts.

A script is a sequence of named definitions:

    game    Nim  = { ... }
    formula Inv  = c > 0 & c mod 4 = 1
    theorem dNim : c > 0 -> [Nim*] c mod 4 = 1 = \\nz : c > 0. ...

Game and formula names elaborate inline (definitions are acyclic by
construction: names must be defined before use).  The printer module
inverts this grammar exactly; `parse(print(ast)) == ast`.

All errors carry line/column positions and the expected-token set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import proofterms as P
from . import syntax as S
from .rational import parse_rational

KEYWORDS = {
    "game", "formula", "theorem", "tt", "ff", "forall", "exists", "div",
    "mod", "abs", "min", "max", "succ", "cap", "case", "rcase", "fp", "of",
    "rep", "for", "roll", "unroll", "stop", "go", "mon", "ghost", "unpack",
    "wit", "asgnd", "asgnb", "seqd", "seqb", "yieldd", "yieldb", "pi1",
    "pi2", "inl", "inr", "split", "FO", "Dec", "Q", "as",
}

_PUNCT = [
    "<->", "->", "++", ":=", "<=", ">=", "!=", "^d", "(", ")", "{", "}",
    "[", "]", "<", ">", "=", ",", ";", ".", ":", "?", "*", "+", "-", "&",
    "|", "!", "\\", "@", "/",
]


@dataclass(frozen=True)
class Token:
    kind: str  # 'ident', 'number', 'punct', 'keyword', 'eof'
    text: str
    line: int
    col: int


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int, expected=()):
        self.message = message
        self.line = line
        self.col = col
        self.expected = tuple(expected)
        exp = f" (expected {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{line}:{col}: {message}{exp}")


_UNICODE_ALIASES = {
    "⟨": "<", "⟩": ">", "∪": "++", "∧": "&",
    "∨": "|", "→": "->", "¬": "!", "≤": "<=",
    "≥": ">=", "≠": "!=", "↔": "<->",
}


def tokenize(text: str):
    toks = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch in _UNICODE_ALIASES:
            alias = _UNICODE_ALIASES[ch]
            toks.append(Token("punct", alias, line, col))
            i += 1
            col += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == "." and j + 1 < n and text[j + 1].isdigit():
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            toks.append(Token("number", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "keyword" if word in KEYWORDS else "ident"
            toks.append(Token(kind, word, line, col))
            col += j - i
            i = j
            continue
        for p in _PUNCT:
            if text.startswith(p, i):
                toks.append(Token("punct", p, line, col))
                i += len(p)
                col += len(p)
                break
        else:
            raise ParseError(f"stray character {ch!r}", line, col)
    toks.append(Token("eof", "", line, col))
    return toks


@dataclass
class ProofScript:
    """Named games, formula abbreviations, and theorems, in file order."""

    games: dict
    formulas: dict
    theorems: dict  # name -> (Formula, ProofTerm)
    order: list  # [(kind, name)]

    def items_in_order(self):
        for kind, name in self.order:
            if kind == "game":
                yield kind, name, self.games[name]
            elif kind == "formula":
                yield kind, name, self.formulas[name]
            else:
                yield kind, name, self.theorems[name]


class Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.pos = 0
        self.games: dict = {}
        self.formulas: dict = {}
        self.used_names = {t.text for t in self.toks if t.kind == "ident"}
        self._auto = 0

    # -- token plumbing -------------------------------------------------------

    def peek(self, k=0) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.peek()
        self.pos += 1
        return t

    def at(self, text: str, k=0) -> bool:
        t = self.peek(k)
        return t.text == text and t.kind in ("punct", "keyword")

    def eat(self, text: str) -> Token:
        t = self.peek()
        if not self.at(text):
            raise ParseError(f"found {t.text!r}", t.line, t.col, (repr(text),))
        return self.next()

    def ident(self, what="identifier") -> str:
        t = self.peek()
        if t.kind != "ident":
            raise ParseError(f"found {t.text!r}", t.line, t.col, (what,))
        return self.next().text

    def fresh_ghost(self, base: str) -> str:
        while True:
            self._auto += 1
            cand = f"{base}{self._auto}"
            if cand not in self.used_names:
                self.used_names.add(cand)
                return cand

    # -- scripts ----------------------------------------------------------------

    def script(self) -> ProofScript:
        theorems = {}
        order = []
        while not self.peek().kind == "eof":
            t = self.peek()
            if self.at("game"):
                self.next()
                name = self.ident("game name")
                self._unique(name)
                self.eat("=")
                self.games[name] = self.game()
                order.append(("game", name))
            elif self.at("formula"):
                self.next()
                name = self.ident("formula name")
                self._unique(name)
                self.eat("=")
                self.formulas[name] = self.formula()
                order.append(("formula", name))
            elif self.at("theorem"):
                self.next()
                name = self.ident("theorem name")
                self._unique(name)
                self.eat(":")
                phi = self.formula()
                self.eat("=")
                proof = self.proof()
                theorems[name] = (phi, proof)
                order.append(("theorem", name))
            else:
                raise ParseError(
                    f"found {t.text!r}", t.line, t.col,
                    ("game", "formula", "theorem"),
                )
        return ProofScript(self.games, self.formulas, theorems, order)

    def _unique(self, name):
        if name in self.games or name in self.formulas:
            t = self.peek()
            raise ParseError(f"duplicate definition {name}", t.line, t.col)

    # -- terms --------------------------------------------------------------------

    def term(self) -> S.Term:
        left = self._term_mul()
        while self.at("+") or self.at("-"):
            op = self.next().text
            right = self._term_mul()
            left = S.Plus(left, right) if op == "+" else S.Minus(left, right)
        return left

    def _term_mul(self) -> S.Term:
        left = self.term_unary()
        while self.at("*") or self.at("div") or self.at("mod"):
            # a '*' not followed by a term is game repetition, not product
            if self.at("*") and self._star_is_postfix():
                break
            op = self.next().text
            right = self.term_unary()
            left = {"*": S.Times, "div": S.Div, "mod": S.Mod}[op](left, right)
        return left

    def _star_is_postfix(self) -> bool:
        nxt = self.peek(1)
        return nxt.kind not in ("number", "ident") and nxt.text not in (
            "(", "abs", "min", "max", "-",
        )

    def term_unary(self) -> S.Term:
        if self.at("-"):
            self.next()
            # a minus sign directly on a number literal is a negative
            # literal; anything else stays a negation node
            if self.peek().kind == "number":
                lit = self.term_atom()
                return S.Lit(-lit.value)
            return S.Neg(self.term_unary())
        return self.term_atom()

    def term_atom(self) -> S.Term:
        t = self.peek()
        if t.kind == "number":
            self.next()
            if self.at("/") and self.peek(1).kind == "number":
                self.next()
                den = self.next().text
                return S.Lit(parse_rational(f"{t.text}/{den}"))
            return S.Lit(parse_rational(t.text))
        if self.at("abs") or self.at("min") or self.at("max"):
            fn = self.next().text
            self.eat("(")
            a = self.term()
            if fn == "abs":
                self.eat(")")
                return S.Abs(a)
            self.eat(",")
            b = self.term()
            self.eat(")")
            return S.Min(a, b) if fn == "min" else S.Max(a, b)
        if self.at("("):
            self.next()
            inner = self.term()
            self.eat(")")
            return inner
        if t.kind == "ident":
            return S.Var(self.next().text)
        raise ParseError(f"found {t.text!r}", t.line, t.col, ("term",))

    # -- formulas --------------------------------------------------------------------

    def formula(self, level=0) -> S.Formula:
        # 0: <->   1: ->   2: |   3: &   4: prefix/atom
        if level == 0:
            left = self.formula(1)
            if self.at("<->"):
                self.next()
                right = self.formula(0)
                return S.And(S.Implies(left, right), S.Implies(right, left))
            return left
        if level == 1:
            left = self.formula(2)
            if self.at("->"):
                self.next()
                return S.Implies(left, self.formula(1))
            return left
        if level == 2:
            left = self.formula(3)
            if self.at("|"):
                self.next()
                return S.Or(left, self.formula(2))
            return left
        if level == 3:
            left = self.formula(4)
            if self.at("&"):
                self.next()
                return S.And(left, self.formula(3))
            return left
        return self.formula_prefix()

    def formula_prefix(self) -> S.Formula:
        t = self.peek()
        if self.at("tt"):
            self.next()
            return S.TRUE
        if self.at("ff"):
            self.next()
            return S.FALSE
        if self.at("!"):
            self.next()
            return S.Not(self.formula_prefix())
        if self.at("forall") or self.at("exists"):
            q = self.next().text
            x = self.ident("bound variable")
            body = self.formula_prefix()
            return S.Forall(x, body) if q == "forall" else S.Exists(x, body)
        if self.at("<"):
            self.next()
            g = self.game()
            self.eat(">")
            return S.Diamond(g, self.formula_prefix())
        if self.at("["):
            self.next()
            g = self.game()
            self.eat("]")
            return S.Box(g, self.formula_prefix())
        if self.at("("):
            # '(' opens either a formula or the left term of a comparison;
            # try the formula reading and fall back on failure
            save = self.pos
            try:
                self.next()
                inner = self.formula(0)
                self.eat(")")
                return inner
            except ParseError:
                self.pos = save
                return self.comparison()
        if t.kind == "ident" and t.text in self.formulas:
            # formula abbreviations shadow program variables by name
            return self.formulas[self.next().text]
        return self.comparison()

    def comparison(self) -> S.Formula:
        t = self.peek()
        left = self.term()
        if self.at("succ"):
            self.next()
            right = self.term()
            from .checker import succ_formula

            return succ_formula(left, right)
        for rel in ("<=", "<", "=", "!=", ">", ">="):
            if self.at(rel):
                self.next()
                return S.Cmp(left, rel, self.term())
        raise ParseError(
            f"found {self.peek().text!r} after term", t.line, t.col,
            ("comparison operator",),
        )

    # -- games --------------------------------------------------------------------------

    def game(self, level=0) -> S.Game:
        # 0: ++/cap   1: ;   2: postfix   3: atom
        if level == 0:
            left = self.game(1)
            if self.at("++"):
                self.next()
                return S.Choice(left, self.game(0))
            if self.at("cap"):
                self.next()
                return S.DormantChoice(left, self.game(0))
            return left
        if level == 1:
            left = self.game(2)
            if self.at(";"):
                self.next()
                return S.Seq(left, self.game(1))
            return left
        g = self.game_atom()
        while True:
            if self.at("*"):
                self.next()
                g = S.Repeat(g)
            elif self.at("^d"):
                self.next()
                g = S.Dual(g)
            else:
                return g

    def game_atom(self) -> S.Game:
        t = self.peek()
        if self.at("?"):
            self.next()
            return S.Test(self.formula(1))
        if self.at("{"):
            self.next()
            inner = self.game(0)
            self.eat("}")
            return inner
        if t.kind == "ident":
            if self.peek(1).text == ":=":
                x = self.next().text
                self.eat(":=")
                if self.at("*"):
                    self.next()
                    return S.AssignAny(x)
                return S.Assign(x, self.term())
            if t.text in self.games:
                return self.games[self.next().text]
            raise ParseError(f"unknown game {t.text!r}", t.line, t.col)
        raise ParseError(f"found {t.text!r}", t.line, t.col, ("game",))

    # -- proofs --------------------------------------------------------------------------

    def proof(self) -> P.ProofTerm:
        t = self.peek()
        if self.at("\\"):
            self.next()
            x = self.ident("binder")
            self.eat(":")
            if self.at("Q"):
                self.next()
                ghost = None
                if self.at("as"):
                    self.next()
                    ghost = self.ident("ghost name")
                self.eat(".")
                body = self.proof()
                return P.NumLam(x, ghost or self.fresh_ghost(x), body)
            ann = self.formula()
            self.eat(".")
            return P.Lam(x, ann, self.proof())
        if self.at("case") or self.at("rcase") or self.at("fp"):
            kw = self.next().text
            scrut = self.proof_prefix()
            self.eat("of")
            l = self.ident("binder")
            self.eat(".")
            bl = self.proof()
            self.eat("|")
            r = self.ident("binder")
            self.eat(".")
            br = self.proof()
            cls = {"case": P.Case, "rcase": P.RCase, "fp": P.FP}[kw]
            return cls(scrut, l, bl, r, br)
        return self.proof_prefix()

    _PREFIX_KWS = {
        "pi1": P.Proj1, "pi2": P.Proj2, "inl": P.InjL, "inr": P.InjR,
        "stop": P.Stop, "go": P.Go, "roll": P.Roll, "unroll": P.Unroll,
    }

    def proof_prefix(self) -> P.ProofTerm:
        t = self.peek()
        if t.kind == "keyword" and t.text in self._PREFIX_KWS:
            self.next()
            return self._PREFIX_KWS[t.text](self.proof_prefix())
        if self.at("seqd") or self.at("seqb"):
            kw = self.next().text
            return P.SeqI(self.proof_prefix(), P.DIA if kw == "seqd" else P.BOX)
        if self.at("yieldd") or self.at("yieldb"):
            kw = self.next().text
            return P.Swap(self.proof_prefix(), P.DIA if kw == "yieldd" else P.BOX)
        return self.proof_app()

    def proof_app(self) -> P.ProofTerm:
        head = self.proof_atom()
        while True:
            t = self.peek()
            if self.at("@"):
                self.next()
                head = P.NumApp(head, self.term_atom())
            elif t.kind == "ident" or t.text in ("(",) or (
                t.kind == "keyword" and t.text in ("FO", "Dec", "split")
            ):
                head = P.App(head, self.proof_atom())
            else:
                return head

    def proof_atom(self) -> P.ProofTerm:
        t = self.peek()
        if self.at("("):
            self.next()
            inner = self.proof()
            self.eat(")")
            return inner
        if self.at("<"):
            self.next()
            a = self.proof()
            self.eat(",")
            b = self.proof()
            self.eat(">")
            return P.DPair(a, b)
        if self.at("["):
            self.next()
            a = self.proof()
            self.eat(",")
            b = self.proof()
            self.eat("]")
            return P.BPair(a, b)
        if self.at("FO") or self.at("Dec"):
            kw = self.next().text
            self.eat("[")
            goal = self.formula()
            self.eat("]")
            payload = self._payload()
            return (P.QE if kw == "FO" else P.Dec)(goal, payload)
        if self.at("split"):
            self.next()
            self.eat("(")
            a = self.term()
            self.eat(",")
            b = self.term()
            self.eat(")")
            return P.Split(a, b)
        if self.at("wit"):
            self.next()
            x = self.ident("witness variable")
            self.eat(":=")
            f = self.term()
            self.eat("(")
            n1 = self.ident("binder")
            if self.at(","):
                self.next()
                n2 = self.ident("hypothesis")
                ghost, hyp = n1, n2
            else:
                ghost, hyp = self.fresh_ghost(x), n1
            self.eat(".")
            body = self.proof()
            self.eat(")")
            return P.TCons(x, ghost, hyp, f, body)
        if self.at("asgnd") or self.at("asgnb"):
            kw = self.next().text
            x = self.ident("assigned variable")
            self.eat("(")
            n1 = self.ident("binder")
            if self.at(","):
                self.next()
                n2 = self.ident("hypothesis")
                ghost, hyp = n1, n2
            else:
                ghost, hyp = self.fresh_ghost(x), n1
            self.eat(".")
            body = self.proof()
            self.eat(")")
            return P.Asgn(x, ghost, hyp, body, P.DIA if kw == "asgnd" else P.BOX)
        if self.at("mon"):
            self.next()
            self.eat("(")
            scrut = self.proof()
            self.eat(";")
            p = self.ident("hypothesis")
            self.eat(".")
            body = self.proof()
            self.eat(")")
            return P.Mon(scrut, p, body)
        if self.at("ghost"):
            self.next()
            self.eat("(")
            x = self.ident("ghost variable")
            self.eat(":=")
            f = self.term()
            self.eat(";")
            p = self.ident("hypothesis")
            self.eat(".")
            body = self.proof()
            self.eat(")")
            return P.Ghost(x, f, p, body)
        if self.at("unpack"):
            self.next()
            self.eat("(")
            scrut = self.proof()
            self.eat(";")
            x = self.ident("unpacked variable")
            self.eat(",")
            y = self.ident("ghost")
            self.eat(",")
            p = self.ident("hypothesis")
            self.eat(".")
            body = self.proof()
            self.eat(")")
            return P.Unpack(x, y, p, scrut, body)
        if self.at("rep"):
            self.next()
            self.eat("(")
            init = self.proof()
            self.eat(";")
            p = self.ident("invariant hypothesis")
            self.eat(":")
            inv = self.formula()
            self.eat(".")
            body = self.proof()
            self.eat(";")
            done = self.proof()
            self.eat(")")
            return P.Rep(p, init, body, done, inv)
        if self.at("for"):
            self.next()
            self.eat("(")
            init = self.proof()
            self.eat(";")
            p = self.ident("invariant hypothesis")
            self.eat(":")
            inv = self.formula()
            self.eat(";")
            q = self.ident("metric hypothesis")
            self.eat(";")
            m0 = self.ident("metric snapshot")
            self.eat(":=")
            metric = self.term()
            self.eat(";")
            body = self.proof()
            self.eat(";")
            done = self.proof()
            self.eat(")")
            return P.For(p, q, m0, init, body, done, metric, inv)
        if t.kind == "ident":
            return P.PVar(self.next().text)
        raise ParseError(f"found {t.text!r}", t.line, t.col, ("proof term",))

    def _payload(self) -> Optional[P.ProofTerm]:
        self.eat("(")
        if self.at(")"):
            self.next()
            return None
        parts = [self.proof()]
        while self.at(","):
            self.next()
            parts.append(self.proof())
        self.eat(")")
        out = parts[-1]
        for p in reversed(parts[:-1]):
            out = P.DPair(p, out)
        return out


def parse_script(text: str) -> ProofScript:
    return Parser(text).script()


def parse_formula_text(text: str) -> S.Formula:
    p = Parser(text)
    phi = p.formula()
    _expect_eof(p)
    return phi


def parse_term_text(text: str) -> S.Term:
    p = Parser(text)
    t = p.term()
    _expect_eof(p)
    return t


def parse_game_text(text: str) -> S.Game:
    p = Parser(text)
    g = p.game()
    _expect_eof(p)
    return g


def parse_proof_text(text: str) -> P.ProofTerm:
    p = Parser(text)
    m = p.proof()
    _expect_eof(p)
    return m


def _expect_eof(p: Parser):
    t = p.peek()
    if t.kind != "eof":
        raise ParseError(f"trailing input {t.text!r}", t.line, t.col)
