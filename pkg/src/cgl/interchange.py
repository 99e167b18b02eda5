"""Tagged-tree JSON interchange for proof terms.

Every node serializes as {"node": <constructor>, <field>: <value>, ...};
terms and formulas are carried as canonical surface strings, so files stay
reviewable and the parser is the single decoder.
"""

from __future__ import annotations

from dataclasses import fields

from . import proofterms as P
from . import syntax as S

_CLASSES = {
    cls.__name__: cls
    for cls in (
        P.PVar, P.Lam, P.App, P.NumLam, P.NumApp, P.DPair, P.BPair, P.Proj1,
        P.Proj2, P.InjL, P.InjR, P.Case, P.TCons, P.Unpack, P.Asgn, P.SeqI,
        P.Swap, P.Stop, P.Go, P.RCase, P.For, P.FP, P.Rep, P.Roll, P.Unroll,
        P.Mon, P.QE, P.Dec, P.Split, P.Ghost,
    )
}


def proof_to_json(m: P.ProofTerm):
    from .printer import print_formula, print_term

    out = {"node": type(m).__name__}
    for f in fields(type(m)):
        v = getattr(m, f.name)
        if isinstance(v, P.ProofTerm):
            out[f.name] = proof_to_json(v)
        elif isinstance(v, S.Term):
            out[f.name] = print_term(v)
        elif isinstance(v, S.Formula):
            out[f.name] = print_formula(v)
        else:
            out[f.name] = v
    return out


def proof_from_json(data) -> P.ProofTerm:
    from .parser import parse_formula_text, parse_term_text

    cls = _CLASSES[data["node"]]
    kwargs = {}
    for f in fields(cls):
        v = data[f.name]
        if isinstance(v, dict):
            kwargs[f.name] = proof_from_json(v)
        elif f.name in ("ann", "inv", "goal"):
            kwargs[f.name] = parse_formula_text(v)
        elif f.name in ("witness", "term", "metric", "left", "right") and isinstance(v, str) and cls in (P.TCons, P.Ghost, P.NumApp, P.For, P.Split):
            kwargs[f.name] = parse_term_text(v)
        elif f.name == "payload":
            kwargs[f.name] = proof_from_json(v) if v is not None else None
        else:
            kwargs[f.name] = v
    return cls(**kwargs)
