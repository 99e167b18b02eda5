"""Command-line front end.

Subcommands: check, normalize, extract, play, verify, test.
Exit codes: 0 success, 1 check/verify/play failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources

from . import engine, normalizer
from . import realizer as R
from . import syntax as S
from .checker import Checker
from .engine import (
    ACTIVE, DORMANT, Budget, DemonMenu, InteractiveDemon, RandomDemon,
    ScriptedDemon, Tracer, close, modal_core, play, strip_assumptions,
    verify_exhaustive,
)
from .extraction import (
    Extractor, UncheckedInput, extract, extract_disjunct,
    extract_existential, validate_existential,
)
from .parser import ParseError, parse_script
from .printer import print_formula, print_proof
from .proofterms import Context
from .rational import parse_rational
from .realizer import realizer_to_json
from .syntax import State


def _load_script(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        print(f"{path}: {e}", file=sys.stderr)
        raise SystemExit(2)
    try:
        return parse_script(text)
    except ParseError as e:
        print(f"{path}:{e}", file=sys.stderr)
        raise SystemExit(2)


def _pick_theorem(script, name, path):
    if name is None:
        if len(script.theorems) == 1:
            return next(iter(script.theorems.items()))
        print(
            f"{path}: choose one of {', '.join(script.theorems)} with --theorem",
            file=sys.stderr,
        )
        raise SystemExit(2)
    if name not in script.theorems:
        print(f"{path}: no theorem named {name}", file=sys.stderr)
        raise SystemExit(2)
    return name, script.theorems[name]


def _parse_state(text: str) -> State:
    vals = {}
    if text:
        for part in text.split(","):
            if not part.strip():
                continue
            if "=" not in part:
                print(f"bad state binding {part!r}", file=sys.stderr)
                raise SystemExit(2)
            k, v = part.split("=", 1)
            vals[k.strip()] = parse_rational(v.strip())
    return State(vals)


def _make_demon(spec: str):
    if spec == "interactive":
        return InteractiveDemon()
    if spec.startswith("random:"):
        return RandomDemon(int(spec.split(":", 1)[1]))
    if spec.startswith("script:"):
        path = spec.split(":", 1)[1]
        with open(path, "r", encoding="utf-8") as fh:
            return ScriptedDemon(json.load(fh))
    print(f"bad --demon {spec!r}", file=sys.stderr)
    raise SystemExit(2)


def cmd_check(args) -> int:
    script = _load_script(args.file)
    ck = Checker()
    failures = []
    diags = []
    for name, (phi, proof) in script.theorems.items():
        err = ck.check_result(Context(), proof, phi)
        if err is None:
            print(f"{name}: ok")
        else:
            failures.append(name)
            print(f"{args.file}: {name}: {err}")
            diags.append({"theorem": name, **err.to_json()})
    if args.json:
        print(json.dumps({"file": args.file, "errors": diags}, indent=2))
    return 1 if failures else 0


def cmd_normalize(args) -> int:
    script = _load_script(args.file)
    names = [args.theorem] if args.theorem else list(script.theorems)
    ck = Checker()
    status = 0
    for name in names:
        _, (phi, proof) = _pick_theorem(script, name, args.file)
        try:
            nf, steps, trace = normalizer.normalize(proof, args.fuel)
        except normalizer.FuelExhausted as e:
            print(f"{name}: fuel exhausted after {e.steps} steps")
            status = 1
            continue
        if args.trace:
            cur = proof
            for rule, reduct in trace:
                print(f"{name}: {rule} at {normalizer.redex_path(cur, reduct)}")
                cur = reduct
        kind = normalizer.normal_kind(nf)
        recheck = ck.check_result(Context(), nf, phi)
        ok = "ok" if recheck is None else f"RECHECK FAILED: {recheck}"
        print(f"{name}: normal after {steps} steps ({kind}); {ok}")
        if recheck is not None:
            status = 1
        if args.show:
            print(print_proof(nf))
    return status


def cmd_extract(args) -> int:
    script = _load_script(args.file)
    name, (phi, proof) = _pick_theorem(script, args.theorem, args.file)
    try:
        rz = extract(proof, phi)
    except UncheckedInput as e:
        print(f"{name}: {e}", file=sys.stderr)
        return 1
    data = json.dumps(realizer_to_json(rz), indent=2)
    if args.emit_realizer:
        with open(args.emit_realizer, "w", encoding="utf-8") as fh:
            fh.write(data + "\n")
        print(f"{name}: strategy written to {args.emit_realizer}")
    else:
        print(data)
    return 0


def cmd_play(args) -> int:
    script = _load_script(args.file)
    name, (phi, proof) = _pick_theorem(script, args.theorem, args.file)
    state = _parse_state(args.state)
    try:
        rz = extract(proof, phi)
    except UncheckedInput as e:
        print(f"{name}: {e}", file=sys.stderr)
        return 1
    stripped = strip_assumptions(phi, close(rz), state)
    if stripped is None:
        print(f"{name}: a hypothesis fails at {state!r}; nothing to play")
        return 1
    core_phi, cl = stripped
    game, role, post = modal_core(core_phi)
    demon = _make_demon(args.demon)
    tracer = Tracer()
    out = play(game, role, cl, state, demon, fuel=args.fuel, tracer=tracer)
    for line in tracer.events:
        print(line)
    if isinstance(out, engine.Finished):
        holds = S.eval_fo(post, out.state)
        print(f"finished {out.state!r}; goal {print_formula(post)} "
              f"{'holds' if holds else 'FAILS'}")
        return 0 if holds else 1
    if isinstance(out, engine.DemonViolation):
        print("demon violated a test: win by default")
        return 0
    if isinstance(out, engine.AngelViolation):
        print("strategy violated a test: loss")
        return 1
    print("fuel exhausted")
    return 1


def cmd_verify(args) -> int:
    script = _load_script(args.file)
    name, (phi, proof) = _pick_theorem(script, args.theorem, args.file)
    with open(args.menu, "r", encoding="utf-8") as fh:
        menu_data = json.load(fh)
    menu = DemonMenu(
        values=menu_data.get("values", {}),
        repeat_depth=int(menu_data.get("repeat_depth", 8)),
    )
    states = [_parse_state(s) for s in args.state] or [State()]
    try:
        rz = extract(proof, phi)
    except UncheckedInput as e:
        print(f"{name}: {e}", file=sys.stderr)
        return 1
    game, role, post = modal_core(phi)
    usable = []
    for st in states:
        stripped = strip_assumptions(phi, close(rz), st)
        if stripped is None:
            print(f"state {st!r}: hypothesis fails, skipped")
            continue
        usable.append((st, stripped[1]))
    for st, cl in usable:
        cex = verify_exhaustive(game, role, cl, [st], post, menu, fuel=args.fuel)
        if cex is not None:
            print(f"counterexample from {st!r}:")
            for line in cex.trace[:40]:
                print(f"  {line}")
            print(f"  outcome: {cex.outcome!r}")
            return 1
        print(f"state {st!r}: all demon lines win")
    return 0


def cmd_test(args) -> int:
    from . import selftest

    return selftest.run(verbose=not args.quiet)


def corpus_path(name: str) -> str:
    return str(resources.files("cgl").joinpath("corpus", name))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="cgl",
        description="Check, normalize, extract, and play game-logic proofs.",
    )
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("check", help="typecheck every theorem in a script")
    p.add_argument("file")
    p.add_argument("--json", action="store_true", help="machine-readable diagnostics")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("normalize", help="reduce proofs to normal form")
    p.add_argument("file")
    p.add_argument("--theorem")
    p.add_argument("--fuel", type=int, default=10**6)
    p.add_argument("--trace", action="store_true", help="one line per step")
    p.add_argument("--show", action="store_true", help="print the normal form")
    p.set_defaults(fn=cmd_normalize)

    p = sub.add_parser("extract", help="compile a proof into a strategy")
    p.add_argument("file")
    p.add_argument("--theorem")
    p.add_argument("--emit-realizer", metavar="OUT")
    p.set_defaults(fn=cmd_extract)

    p = sub.add_parser("play", help="play one run against an adversary")
    p.add_argument("file")
    p.add_argument("--theorem")
    p.add_argument("--demon", default="random:0",
                   help="interactive | random:SEED | script:PATH")
    p.add_argument("--state", default="", help='e.g. "c=9,x=1/2"')
    p.add_argument("--fuel", type=int, default=100_000)
    p.set_defaults(fn=cmd_play)

    p = sub.add_parser("verify", help="exhaust finite demon menus")
    p.add_argument("file")
    p.add_argument("--theorem")
    p.add_argument("--menu", required=True, help="JSON adversary menu")
    p.add_argument("--state", action="append", default=[],
                   help="initial state (repeatable)")
    p.add_argument("--fuel", type=int, default=2_000_000)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("test", help="run the bundled corpus and property suites")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(fn=cmd_test)

    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2
    except BrokenPipeError:
        return 1


if __name__ == "__main__":
    sys.exit(main())
