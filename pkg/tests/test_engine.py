"""Gameplay interpreter: single plays, oracles, exhaustive verification,
and the trace-level semantic properties."""

from cgl import engine as E
from cgl import realizer as R
from cgl import syntax as S
from cgl.engine import (
    ACTIVE, DORMANT, DemonMenu, Finished, AngelViolation, DemonViolation,
    RandomDemon, ScriptedDemon, Tracer, close, play, verify_exhaustive,
)
from cgl.syntax import State
from conftest import rand_game, rand_rational, rand_state

L = S.lit
x, y, c = S.Var("x"), S.Var("y"), S.Var("c")


def test_failed_active_test_loses():
    out = play(S.Test(S.Cmp(L(0), ">", L(1))), ACTIVE, close(R.Pair(R.Unit(), R.Unit())),
               State(), ScriptedDemon([]))
    assert isinstance(out, AngelViolation)


def test_demon_value_then_sign_flip():
    # adversary announces x, the strategy negates it when negative
    game = S.Seq(S.Dual(S.AssignAny("x")), S.Choice(S.Assign("x", x), S.Assign("x", S.Neg(x))))
    rz = R.NumLamR(
        "v",
        R.IfTerm(S.Cmp(x, "<", L(0)), R.Pair(R.TermVal(L(1)), R.Unit()),
                 R.Pair(R.TermVal(L(0)), R.Unit())),
    )
    out = play(game, ACTIVE, close(rz), State(), ScriptedDemon(["-5"]))
    assert isinstance(out, Finished)
    assert out.state.get("x") == 5


def test_active_loop_counts_to_four():
    # repeat x := x+1 until x > y, from x=0, y=3
    game = S.Repeat(S.Assign("x", S.Plus(x, L(1))))
    rz = R.Ind(
        "w",
        R.IfTerm(S.Cmp(x, ">", y), R.Pair(R.TermVal(L(0)), R.Unit()),
                 R.Pair(R.TermVal(L(1)), R.RVar("w"))),
    )
    out = play(game, ACTIVE, close(rz), State({"x": 0, "y": 3}), ScriptedDemon([]))
    assert isinstance(out, Finished)
    assert out.state.get("x") == 4


def test_role_duality():
    g = S.Choice(S.Assign("x", L(1)), S.Assign("x", L(2)))
    rz = R.Pair(R.Unit(), R.Unit())
    out1 = play(S.Dual(g), ACTIVE, close(rz), State(), ScriptedDemon(["L"]))
    out2 = play(g, DORMANT, close(rz), State(), ScriptedDemon(["L"]))
    assert out1.state == out2.state


def test_demon_concede_is_angel_win():
    out = play(S.Test(S.Cmp(L(1), ">", L(0))), DORMANT, close(R.ProofLam("t", S.TRUE, R.Unit())),
               State(), ScriptedDemon(["concede"]))
    assert isinstance(out, DemonViolation)


def test_demon_false_assert_is_angel_win():
    out = play(S.Test(S.Cmp(L(0), ">", L(1))), DORMANT, close(R.ProofLam("t", S.TRUE, R.Unit())),
               State(), ScriptedDemon(["assert"]))
    assert isinstance(out, DemonViolation)


def test_scripted_determinism():
    game = S.Seq(S.Dual(S.AssignAny("x")), S.Choice(S.Assign("y", x), S.Assign("y", S.Neg(x))))
    rz = R.NumLamR("v", R.Pair(R.TermVal(L(0)), R.Unit()))
    outs = [
        play(game, ACTIVE, close(rz), State(), ScriptedDemon(["7/2"]))
        for _ in range(3)
    ]
    assert all(isinstance(o, Finished) and o.state == outs[0].state for o in outs)


def test_trace_format():
    tr = Tracer()
    game = S.Seq(S.Assign("x", L(5)), S.Test(S.Cmp(x, ">", L(0))))
    play(game, ACTIVE, close(R.Pair(R.Unit(), R.Unit())), State(), ScriptedDemon([]), tracer=tr)
    assert tr.events[0] == "assign x 5"
    assert tr.events[1] == "angel-test (x > 0) pass"


# -- suitable-realizer generator for the trace-level lemmas -----------------------


def suitable(rng, game, role):
    """A structurally suitable random realizer for (game, role)."""
    match game:
        case S.Test(_):
            if role == ACTIVE:
                return R.Pair(R.Unit(), R.Unit())
            return R.ProofLam("t", S.TRUE, R.Unit())
        case S.Assign(_, _):
            return R.Unit()
        case S.AssignAny(v):
            if role == ACTIVE:
                return R.Pair(R.TermVal(S.Lit(rand_rational(rng))), R.Unit())
            return R.NumLamR("n", R.Unit())
        case S.Choice(a, b):
            if role == ACTIVE:
                pick = rng.random() < 0.5
                return R.Pair(
                    R.TermVal(L(0 if pick else 1)),
                    suitable(rng, a if pick else b, role),
                )
            return R.Pair(suitable(rng, a, role), suitable(rng, b, role))
        case S.Seq(a, b):
            return _graft(rng, game, role)
        case S.Repeat(a):
            if role == ACTIVE:
                k = rng.randrange(3)
                out = R.Pair(R.TermVal(L(0)), R.Unit())
                for _ in range(k):
                    out = R.Pair(R.TermVal(L(1)), _seq_rz(rng, a, role, out))
                return out
            return R.Gen(R.Unit(), "v", _seq_rz(rng, a, role, R.Unit()), R.Unit(), a)
        case S.Dual(a):
            return suitable(rng, a, E.flip(role))
    raise AssertionError(game)


def _graft(rng, game, role):
    return _seq_rz(rng, game.left, role, suitable(rng, game.right, role))


def _seq_rz(rng, game, role, cont):
    """Realizer for `game` whose residual is `cont`."""
    match game:
        case S.Test(_):
            if role == ACTIVE:
                return R.Pair(R.Unit(), cont)
            return R.ProofLam("t", S.TRUE, cont)
        case S.Assign(_, _):
            return cont
        case S.AssignAny(v):
            if role == ACTIVE:
                return R.Pair(R.TermVal(S.Lit(rand_rational(rng))), cont)
            return R.NumLamR("n", cont)
        case S.Choice(a, b):
            if role == ACTIVE:
                pick = rng.random() < 0.5
                return R.Pair(
                    R.TermVal(L(0 if pick else 1)),
                    _seq_rz(rng, a if pick else b, role, cont),
                )
            return R.Pair(_seq_rz(rng, a, role, cont), _seq_rz(rng, b, role, cont))
        case S.Seq(a, b):
            return _seq_rz(rng, a, role, _seq_rz(rng, b, role, cont))
        case S.Repeat(a):
            if role == ACTIVE:
                out = R.Pair(R.TermVal(L(0)), cont)
                for _ in range(rng.randrange(3)):
                    out = R.Pair(R.TermVal(L(1)), _seq_rz(rng, a, role, out))
                return out
            return R.Gen(R.Unit(), "v", _seq_rz(rng, a, role, R.Unit()), cont, a)
        case S.Dual(a):
            return _seq_rz(rng, a, E.flip(role), cont)
    raise AssertionError(game)


def _demon_script(rng, n=64):
    # a pool of decisions consumed as needed; uniform across runs
    out = []
    for _ in range(n):
        out.append(rng.choice(["L", "R"]))
        out.append(str(rand_rational(rng)))
        out.append("assert")
        out.append(rng.choice(["continue", "stop", "stop"]))
    return out


class PooledDemon(E.DemonOracle):
    """Draws branch/value/test/repeat decisions from independent pools, so
    two runs over coincident games consume decisions identically."""

    def __init__(self, script):
        self.branches = [s for s in script if s in ("L", "R")]
        self.values = [s for s in script if "/" in s or s.lstrip("-").isdigit()]
        self.repeats = [s for s in script if s in ("continue", "stop")]
        self.bi = self.vi = self.ri = 0

    def choose_branch(self, game, state):
        self.bi += 1
        return self.branches[(self.bi - 1) % len(self.branches)]

    def choose_value(self, var, state):
        self.vi += 1
        from cgl.rational import parse_rational

        return parse_rational(self.values[(self.vi - 1) % len(self.values)])

    def assert_test(self, phi, state):
        try:
            return "assert" if S.eval_fo(phi, state) else "concede"
        except TypeError:
            return "concede"

    def continue_repeat(self, state, iteration):
        if iteration > 8:
            return False
        self.ri += 1
        return self.repeats[(self.ri - 1) % len(self.repeats)] == "continue"


def test_bound_effect_random(rng):
    # final states agree with initial states outside the bound variables
    done = 0
    while done < 250:
        game = rand_game(rng, 3)
        role = rng.choice([ACTIVE, DORMANT])
        rz = suitable(rng, game, role)
        st = rand_state(rng)
        out = play(game, role, close(rz), st, PooledDemon(_demon_script(rng)), fuel=20000)
        if not isinstance(out, Finished):
            continue
        done += 1
        outside = (st.vars() | out.state.vars()) - S.bound_vars(game)
        assert out.state.agrees_with(st, outside), (game, st, out.state)


def test_coincidence_random(rng):
    # runs from states agreeing on the free variables, with the same
    # realizer and demon script, agree on must-bound + shared variables
    done = 0
    while done < 250:
        game = rand_game(rng, 3)
        role = rng.choice([ACTIVE, DORMANT])
        rz = suitable(rng, game, role)
        fv = S.free_vars(game)
        st1 = rand_state(rng)
        st2 = rand_state(rng)
        for v in fv:
            st2 = st2.set(v, st1.get(v))
        script = _demon_script(rng)
        out1 = play(game, role, close(rz), st1, PooledDemon(script), fuel=20000)
        out2 = play(game, role, close(rz), st2, PooledDemon(script), fuel=20000)
        if not (isinstance(out1, Finished) and isinstance(out2, Finished)):
            assert type(out1) is type(out2), (game, st1, st2)
            continue
        done += 1
        agree_on = S.must_bound_vars(game) | fv
        assert out1.state.agrees_with(out2.state, agree_on), (game, st1, st2)


def test_verify_counterexample_has_trace():
    game = S.Seq(S.Dual(S.AssignAny("x")), S.Test(S.Cmp(x, ">", L(0))))
    rz = R.NumLamR("n", R.Pair(R.Unit(), R.Unit()))
    menu = DemonMenu(values={"x": ["1", "-1"]}, repeat_depth=4)
    cex = verify_exhaustive(game, ACTIVE, close(rz), [State()], S.TRUE, menu)
    assert cex is not None
    assert any("demon-value x -1" in t for t in cex.trace)
    assert len(cex.trace) <= 40


def test_fuel_exhaustion_reported():
    game = S.Repeat(S.Assign("x", S.Plus(x, L(1))))
    rz = R.Ind("w", R.Pair(R.TermVal(L(1)), R.RVar("w")))  # never stops
    out = play(game, ACTIVE, close(rz), State(), ScriptedDemon([]), fuel=500)
    assert isinstance(out, E.FuelOut)


def test_corrupted_nim_strategy_yields_counterexample(all_theorems):
    # negate the mirroring decision tree: the strategy answers the wrong
    # residue class and a short demon line defeats it
    import dataclasses

    from cgl import realizer as R
    from cgl.extraction import extract
    from cgl.engine import modal_core, strip_assumptions

    phi, proof = all_theorems["dNim"]
    rz = extract(proof, phi, checked=True)

    def flip(r):
        if isinstance(r, R.IfTerm):
            return R.IfTerm(r.cond, flip(r.els), flip(r.then))
        updates = {}
        for f in dataclasses.fields(type(r)):
            v = getattr(r, f.name)
            if isinstance(v, R.Realizer):
                updates[f.name] = flip(v)
        if not updates:
            return r
        vals = {f.name: getattr(r, f.name) for f in dataclasses.fields(type(r))}
        vals.update(updates)
        return type(r)(**vals)

    st = State({"c": 9})
    stripped = strip_assumptions(phi, close(flip(rz)), st)
    game, role, post = modal_core(phi)
    menu = DemonMenu(values={}, repeat_depth=6)
    cex = verify_exhaustive(game, role, stripped[1], [st], post, menu)
    assert cex is not None
    assert len(cex.trace) <= 40
