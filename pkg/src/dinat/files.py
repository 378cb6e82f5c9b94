"""Concrete file formats: derivation files and JSON model files.

A derivation file is a sequence of parenthesized forms: signature
declarations, named derivations (every node carries its claimed conclusion
as the final element) and optional equational obligations.  Printing and
parsing round-trip exactly up to whitespace.

A model file is a JSON document listing objects, morphisms, identities,
the composition table, atom tables with their full actions, and functor
tables.  All finite-category, functoriality and functor checks run at load
time; action entries whose morphisms are all identities may be omitted.
"""

from __future__ import annotations

import json

from . import kernel as K
from .errors import DuplicateName, ModelError, ParseError
from .finsem import AtomInterp, FinCat, FunctorInterp, Model, Mor
from .sexp import Atom, SList, expect_atom, expect_list, parse_all
from .syntax import (
    CatExpr,
    CBase,
    COp,
    CProd,
    CUnit,
    FAnd,
    FAtom,
    FCoend,
    FEnd,
    FHom,
    FImp,
    Formula,
    FTop,
    NEG,
    POS,
    Polarity,
    Sequent,
    SignatureTable,
    TApp,
    TermExpr,
    TFst,
    TPair,
    TSnd,
    TVar,
    cat_to_str,
    formula_to_str,
)

FORMULA_HEADS = {"hom", "and", "imp", "end", "coend", "top"}
TERM_HEADS = {"pair", "fst", "snd"}


def _err(node, msg, expected=()):
    raise ParseError(msg, node.line, node.col, expected=tuple(expected))


# ---------------------------------------------------------------------------
# Categories, terms, formulas, sequents


def parse_cat(node) -> CatExpr:
    if isinstance(node, Atom):
        if node.text == "unit":
            return CUnit()
        return CBase(node.text)
    node = expect_list(node, "category expression")
    if not node.items:
        _err(node, "empty category expression")
    head = expect_atom(node.items[0], "category constructor").text
    if head == "op" and len(node.items) == 2:
        return COp(parse_cat(node.items[1]))
    if head == "prod" and len(node.items) == 3:
        return CProd(parse_cat(node.items[1]), parse_cat(node.items[2]))
    _err(node, f"bad category expression head {head!r}", ("op", "prod"))


def parse_term(node) -> TermExpr:
    if isinstance(node, Atom):
        if node.text.startswith("~"):
            return TVar(node.text[1:], NEG)
        return TVar(node.text, POS)
    node = expect_list(node, "term")
    if not node.items:
        _err(node, "empty term")
    head = expect_atom(node.items[0], "term head").text
    if head == "pair" and len(node.items) == 3:
        return TPair(parse_term(node.items[1]), parse_term(node.items[2]))
    if head == "fst" and len(node.items) == 2:
        return TFst(parse_term(node.items[1]))
    if head == "snd" and len(node.items) == 2:
        return TSnd(parse_term(node.items[1]))
    if head in TERM_HEADS:
        _err(node, f"wrong arity for {head!r}")
    if len(node.items) != 2:
        _err(node, "functor application takes one argument")
    return TApp(head, parse_term(node.items[1]))


def parse_formula(node) -> Formula:
    if isinstance(node, Atom):
        if node.text == "top":
            return FTop()
        _err(node, f"bare atom {node.text!r} is not a formula", ("top", "("))
    node = expect_list(node, "formula")
    if not node.items:
        _err(node, "empty formula")
    head = expect_atom(node.items[0], "formula head").text
    if head == "hom" and len(node.items) == 4:
        return FHom(parse_cat(node.items[1]), parse_term(node.items[2]),
                    parse_term(node.items[3]))
    if head == "and" and len(node.items) == 3:
        return FAnd(parse_formula(node.items[1]), parse_formula(node.items[2]))
    if head == "imp" and len(node.items) == 3:
        return FImp(parse_formula(node.items[1]), parse_formula(node.items[2]))
    if head in ("end", "coend") and len(node.items) == 3:
        binder = expect_list(node.items[1], "binder")
        if len(binder.items) != 2:
            _err(binder, "binder takes a variable and a category")
        var = expect_atom(binder.items[0], "binder variable").text
        cat = parse_cat(binder.items[1])
        body = parse_formula(node.items[2])
        return (FEnd if head == "end" else FCoend)(var, cat, body)
    if head == "top" and len(node.items) == 1:
        return FTop()
    if head in FORMULA_HEADS:
        _err(node, f"wrong arity for {head!r}")
    return FAtom(head, tuple(parse_term(n) for n in node.items[1:]))


def parse_sequent(node) -> Sequent:
    node = expect_list(node, "sequent")
    if len(node.items) != 4 or not (
        isinstance(node.items[0], Atom) and node.items[0].text == "seq"
    ):
        _err(node, "a sequent is (seq (ctx...) (hyps...) goal)", ("seq",))
    ctx = []
    for entry in expect_list(node.items[1], "context").items:
        e = expect_list(entry, "context entry")
        if len(e.items) != 2:
            _err(e, "context entry is (var category)")
        ctx.append((expect_atom(e.items[0], "variable").text, parse_cat(e.items[1])))
    hyps = []
    for entry in expect_list(node.items[2], "hypotheses").items:
        e = expect_list(entry, "hypothesis")
        if len(e.items) != 2:
            _err(e, "hypothesis is (label formula)")
        hyps.append((expect_atom(e.items[0], "label").text, parse_formula(e.items[1])))
    return Sequent(tuple(ctx), tuple(hyps), parse_formula(node.items[3]))


# ---------------------------------------------------------------------------
# Derivations

# File layout per rule: scalar and sub-derivation fields in dataclass order,
# conclusion last.  Kinds: str, int, cat, sub.
RULE_SPECS = {
    "id": (K.Id, []),
    "top-intro": (K.TopIntro, []),
    "refl": (K.Refl, [("var", "str")]),
    "assume": (K.Assume, [("key", "str")]),
    "pair": (K.Pair, [("left", "sub"), ("right", "sub")]),
    "proj1": (K.Proj1, [("sub", "sub")]),
    "proj2": (K.Proj2, [("sub", "sub")]),
    "weaken": (K.Weaken, [("sub", "sub"), ("label", "str"),
                          ("formula", "formula"), ("pos", "int")]),
    "ctx-weaken": (K.CtxWeaken, [("sub", "sub"), ("var", "str"),
                                 ("cat", "cat"), ("pos", "int")]),
    "curry": (K.Curry, [("sub", "sub"), ("label", "str")]),
    "uncurry": (K.Uncurry, [("sub", "sub"), ("label", "str"), ("pos", "int")]),
    "reindex": (K.Reindex, [("sub", "sub"), ("var", "str"),
                            ("functor", "str"), ("newvar", "str")]),
    "j": (K.J, [("sub", "sub"), ("source", "str"), ("target", "str"),
                ("fresh", "str"), ("eq", "str")]),
    "j-inv": (K.JInv, [("sub", "sub"), ("source", "str"), ("target", "str"),
                       ("fresh", "str"), ("eq", "str")]),
    "j-with-eq": (K.JWithEq, [("main", "sub"), ("eq_deriv", "sub"),
                              ("source", "str"), ("target", "str"),
                              ("fresh", "str")]),
    "end-intro": (K.EndIntro, [("sub", "sub"), ("var", "str")]),
    "end-elim": (K.EndElim, [("sub", "sub"), ("var", "str"), ("pos", "int")]),
    "coend-intro": (K.CoendIntro, [("sub", "sub"), ("var", "str"),
                                   ("label", "str")]),
    "coend-elim": (K.CoendElim, [("sub", "sub"), ("var", "str"),
                                 ("label", "str"), ("pos", "int")]),
    "imp-func": (K.ImpFunc, [("contra", "sub"), ("cova", "sub"),
                             ("label", "str")]),
    "exchange": (K.Exchange, [("sub", "sub"), ("pos", "int")]),
    "exchange-hyps": (K.ExchangeHyps, [("sub", "sub"), ("pos", "int")]),
    "pair-ctx": (K.PairCtx, [("sub", "sub"), ("x", "str"), ("y", "str"),
                             ("p", "str")]),
    "unpair-ctx": (K.UnpairCtx, [("sub", "sub"), ("p", "str"), ("x", "str"),
                                 ("y", "str")]),
    "split-and": (K.SplitAnd, [("sub", "sub"), ("label", "str"),
                               ("left", "str"), ("right", "str")]),
    "join-and": (K.JoinAnd, [("sub", "sub"), ("left", "str"),
                             ("right", "str"), ("label", "str")]),
    "op-relabel": (K.OpRelabel, [("sub", "sub"), ("var", "str")]),
    "yoneda": (K.MYoneda, [("cat", "cat"), ("atom", "str"),
                           ("direction", "str"), ("a", "str"),
                           ("binder", "str"), ("opened", "str"),
                           ("fresh", "str"), ("eq", "str"), ("hyp", "str")]),
    "coyoneda": (K.MCoYoneda, [("cat", "cat"), ("atom", "str"),
                               ("direction", "str"), ("a", "str"),
                               ("binder", "str"), ("opened", "str"),
                               ("fresh", "str"), ("eq", "str"),
                               ("hyp", "str")]),
    "fubini": (K.MFubini, [("cat1", "cat"), ("cat2", "cat"), ("atom", "str"),
                           ("form", "str"), ("x", "str"), ("y", "str"),
                           ("p", "str"), ("hyp", "str")]),
    "coend-frobenius": (K.MCoendFrobenius, [("sub", "sub"),
                                            ("direction", "str"),
                                            ("label", "str"),
                                            ("other", "str"),
                                            ("opened", "str")]),
    "hom-rel-adj": (K.MHomRelAdj, [("sub", "sub"), ("direction", "str"),
                                   ("source", "str"), ("target", "str"),
                                   ("fresh", "str"), ("eq", "str")]),
}

_CLASS_TO_RULE = {cls: (name, spec) for name, (cls, spec) in RULE_SPECS.items()}


def _file_order(spec):
    """Scalar parameters come first in files, then premises, then the
    conclusion; rule parameters read best up front."""
    return [fk for fk in spec if fk[1] != "sub"] + [fk for fk in spec if fk[1] == "sub"]


def parse_derivation(node) -> K.Derivation:
    node = expect_list(node, "derivation")
    if not node.items:
        _err(node, "empty derivation")
    head = expect_atom(node.items[0], "rule name").text
    if head not in RULE_SPECS:
        _err(node, f"unknown rule {head!r}", tuple(sorted(RULE_SPECS)))
    cls, spec = RULE_SPECS[head]
    args = node.items[1:]
    if len(args) != len(spec) + 1:
        _err(node, f"{head} takes {len(spec)} argument(s) plus a conclusion")
    kw = {}
    for (field, kind), arg in zip(_file_order(spec), args[:-1]):
        if kind == "sub":
            kw[field] = parse_derivation(arg)
        elif kind == "str":
            kw[field] = expect_atom(arg, field).text
        elif kind == "int":
            text = expect_atom(arg, field).text
            try:
                kw[field] = int(text)
            except ValueError:
                _err(arg, f"{field} must be an integer")
        elif kind == "cat":
            kw[field] = parse_cat(arg)
        elif kind == "formula":
            kw[field] = parse_formula(arg)
    kw["concl"] = parse_sequent(args[-1])
    return cls(**kw)


def print_term(t: TermExpr) -> str:
    return str(t)


def print_sequent(s: Sequent) -> str:
    return str(s)


def print_derivation(d: K.Derivation, indent: int = 0) -> str:
    name, spec = _CLASS_TO_RULE[type(d)]
    pad = "  " * indent
    scalars = []
    subs = []
    for field, kind in _file_order(spec):
        v = getattr(d, field)
        if kind == "sub":
            subs.append(print_derivation(v, indent + 1))
        elif kind == "cat":
            scalars.append(cat_to_str(v))
        elif kind == "formula":
            scalars.append(formula_to_str(v))
        else:
            scalars.append(str(v))
    head = f"{pad}({name}" + ("".join(" " + s for s in scalars))
    body = subs + ["  " * (indent + 1) + print_sequent(d.concl)]
    return "\n".join([head] + body) + ")"


# ---------------------------------------------------------------------------
# Derivation files


class DerivationFile:
    def __init__(self, sig: SignatureTable, derivations: dict,
                 obligations: dict):
        self.sig = sig
        self.derivations = derivations  # name -> Derivation
        self.obligations = obligations  # name -> (strategy, EqJudgement)


def parse_derivation_file(text: str) -> DerivationFile:
    sig = SignatureTable()
    derivations: dict = {}
    obligations: dict = {}
    for form in parse_all(text):
        form = expect_list(form, "top-level form")
        if not form.items:
            _err(form, "empty top-level form")
        head = expect_atom(form.items[0], "declaration").text
        if head == "category":
            if len(form.items) != 2:
                _err(form, "(category NAME)")
            sig.declare_cat(expect_atom(form.items[1], "name").text)
        elif head == "atom":
            if len(form.items) < 2:
                _err(form, "(atom NAME (POL CAT)...)")
            name = expect_atom(form.items[1], "name").text
            slots = []
            for slot in form.items[2:]:
                s = expect_list(slot, "slot")
                if len(s.items) != 2:
                    _err(s, "slot is (polarity category)")
                pol = expect_atom(s.items[0], "polarity").text
                if pol not in "+-":
                    _err(s.items[0], "polarity is + or -", ("+", "-"))
                slots.append((parse_cat(s.items[1]),
                              POS if pol == "+" else NEG))
            try:
                sig.declare_atom(name, slots)
            except DuplicateName as e:
                _err(form, str(e))
        elif head == "functor":
            if len(form.items) != 4:
                _err(form, "(functor NAME DOM COD)")
            try:
                sig.declare_functor(
                    expect_atom(form.items[1], "name").text,
                    parse_cat(form.items[2]),
                    parse_cat(form.items[3]),
                )
            except DuplicateName as e:
                _err(form, str(e))
        elif head == "derive":
            if len(form.items) != 3:
                _err(form, "(derive NAME derivation)")
            name = expect_atom(form.items[1], "name").text
            if name in derivations:
                _err(form, f"derivation {name!r} defined twice")
            derivations[name] = parse_derivation(form.items[2])
        elif head == "obligation":
            if len(form.items) != 5:
                _err(form, "(obligation NAME strategy lhs rhs)")
            name = expect_atom(form.items[1], "name").text
            if name in obligations:
                _err(form, f"obligation {name!r} defined twice")
            strat = _parse_strategy(form.items[2])
            lhs = parse_derivation(form.items[3])
            rhs = parse_derivation(form.items[4])
            obligations[name] = (strat, K.EqJudgement(lhs, rhs))
        else:
            _err(form, f"unknown declaration {head!r}",
                 ("category", "atom", "functor", "derive", "obligation"))
    return DerivationFile(sig, derivations, obligations)


def _parse_strategy(node):
    if isinstance(node, Atom):
        if node.text == "direct":
            return K.Direct()
        _err(node, "strategy is direct or (jeq SRC TGT FRESH EQ)", ("direct",))
    node = expect_list(node, "strategy")
    if (
        len(node.items) == 5
        and isinstance(node.items[0], Atom)
        and node.items[0].text == "jeq"
    ):
        return K.JEqStrategy(*(expect_atom(n, "name").text for n in node.items[1:]))
    _err(node, "strategy is direct or (jeq SRC TGT FRESH EQ)")


def print_derivation_file(df: DerivationFile) -> str:
    out = []
    for c in sorted(df.sig.cats):
        out.append(f"(category {c})")
    for name, slots in df.sig.atoms.items():
        ss = " ".join(f"({p} {cat_to_str(c)})" for c, p in slots)
        out.append(f"(atom {name}{' ' + ss if ss else ''})")
    for name, (dom, cod) in df.sig.functors.items():
        out.append(f"(functor {name} {cat_to_str(dom)} {cat_to_str(cod)})")
    for name, d in df.derivations.items():
        out.append(f"(derive {name}\n{print_derivation(d, 1)})")
    for name, (strat, j) in df.obligations.items():
        if isinstance(strat, K.Direct):
            s = "direct"
        else:
            s = f"(jeq {strat.source} {strat.target} {strat.fresh} {strat.eq})"
        out.append(
            f"(obligation {name} {s}\n{print_derivation(j.left, 1)}\n"
            f"{print_derivation(j.right, 1)})"
        )
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Model files (JSON)


def load_model(text: str) -> Model:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelError(f"model file is not valid JSON: {e}")
    if not isinstance(doc, dict) or "categories" not in doc:
        raise ModelError("model file must be an object with a 'categories' map")
    cats = {}
    for cname, body in doc["categories"].items():
        mors = {}
        for m in body.get("morphisms", []):
            mors[m["name"]] = Mor(m["name"], m["src"], m["dst"])
        identity = dict(body.get("identities", {}))
        comp = {}
        for t in body.get("composition", []):
            comp[(t["first"], t["second"])] = t["result"]
        cats[cname] = FinCat(cname, body.get("objects", []), mors, identity, comp)
    model = Model(doc.get("name", "model"), cats)
    for aname, body in doc.get("atoms", {}).items():
        slots = tuple(
            (s[0], POS if s[1] == "+" else NEG) for s in body["slots"]
        )
        table = {}
        for row in body.get("elements", []):
            table[tuple(row["at"])] = tuple(row["elems"])
        interp = AtomInterp(aname, slots, table, {})
        action = {}
        for row in body.get("action", []):
            action[tuple(row["mors"])] = dict(row["map"])
        # identity-only actions may be omitted
        slot_cats = [model.base_cat(c) for c, _ in slots]
        for objs in table:
            key = tuple(c.identity[o] for c, o in zip(slot_cats, objs))
            if key not in action:
                action[key] = {v: v for v in table[objs]}
        interp.action = action
        model.atoms[aname] = interp
    for fname, body in doc.get("functors", {}).items():
        model.functors[fname] = FunctorInterp(
            fname, body["dom"], body["cod"],
            dict(body.get("objects", {})), dict(body.get("morphisms", {})),
        )
    model.validate()
    return model


def dump_model(model: Model) -> str:
    doc = {"name": model.name, "categories": {}, "atoms": {}, "functors": {}}
    for cname, cat in model.cats.items():
        doc["categories"][cname] = {
            "objects": list(cat.objects),
            "morphisms": [
                {"name": n, "src": cat.mor(n).src, "dst": cat.mor(n).dst}
                for n in cat.mor_names()
            ],
            "identities": dict(cat.identity),
            "composition": [
                {"first": f, "second": g, "result": h}
                for (f, g), h in sorted(cat.comp.items())
            ],
        }
    for aname, interp in model.atoms.items():
        doc["atoms"][aname] = {
            "slots": [[c, str(p)] for c, p in interp.slots],
            "elements": [
                {"at": list(k), "elems": list(v)}
                for k, v in sorted(interp.table.items())
            ],
            "action": [
                {"mors": list(k), "map": dict(v)}
                for k, v in sorted(interp.action.items())
            ],
        }
    for fname, fi in model.functors.items():
        doc["functors"][fname] = {
            "dom": fi.dom, "cod": fi.cod,
            "objects": dict(fi.obj_map), "morphisms": dict(fi.mor_map),
        }
    return json.dumps(doc, indent=1, sort_keys=True)
