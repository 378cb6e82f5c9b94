"""The suite of small models and the catalogue of worked derivations.

Every entry is machine-checked test data: positive entries must check and
evaluate to hexagon-passing families on every suite model, negative ones
must be rejected with their declared error class.  The entry list is
locked by ``REQUIRED_ENTRIES``; the test suite fails if the two drift.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .errors import EnumerationBound, MacroError, VarianceViolation
from .finsem import (
    AtomInterp,
    Evaluator,
    Family,
    FinCat,
    FunctorInterp,
    Model,
    Mor,
    SeqSem,
    canon_key,
    check_dinatural,
    compose_families,
    enumerate_dinaturals,
    eval_derivation,
    eval_eq_obligation,
    families_equal,
    search_composition_failure,
)
from . import kernel as K
from .kernel import (
    Direct,
    EqJudgement,
    JEqStrategy,
    check_eq_judgement,
    mk_assume,
    mk_coend_elim,
    mk_coend_intro,
    mk_curry,
    mk_end_elim,
    mk_end_intro,
    mk_exchange,
    mk_exchange_hyps,
    mk_id,
    mk_j,
    mk_jinv,
    mk_join_and,
    mk_macro,
    mk_op_relabel,
    mk_refl,
    mk_reindex,
    mk_split_and,
    mk_top,
    mk_uncurry,
    mk_weaken,
)
from .syntax import (
    CatExpr,
    CBase,
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
    TVar,
)

C = CBase("C")
D = CBase("D")


# ---------------------------------------------------------------------------
# Finite categories


def cat_walking_arrow(name="C") -> FinCat:
    mors = {
        "id_a": Mor("id_a", "a", "a"),
        "id_b": Mor("id_b", "b", "b"),
        "f": Mor("f", "a", "b"),
    }
    return FinCat(name, ["a", "b"], mors, {"a": "id_a", "b": "id_b"}, {})


def cat_discrete2(name="C") -> FinCat:
    mors = {"id_a": Mor("id_a", "a", "a"), "id_b": Mor("id_b", "b", "b")}
    return FinCat(name, ["a", "b"], mors, {"a": "id_a", "b": "id_b"}, {})


def cat_chain3(name="C") -> FinCat:
    objs = ["o0", "o1", "o2"]
    mors = {f"id_{o}": Mor(f"id_{o}", o, o) for o in objs}
    for i in range(3):
        for j in range(i + 1, 3):
            mors[f"m{i}{j}"] = Mor(f"m{i}{j}", f"o{i}", f"o{j}")
    comp = {("m01", "m12"): "m02"}
    return FinCat(name, objs, mors, {o: f"id_{o}" for o in objs}, comp)


def cat_monoid2(name="C") -> FinCat:
    """One object, one idempotent non-identity arrow."""
    mors = {"id_m": Mor("id_m", "m", "m"), "s": Mor("s", "m", "m")}
    return FinCat(name, ["m"], mors, {"m": "id_m"}, {("s", "s"): "s"})


def cat_empty(name="C") -> FinCat:
    return FinCat(name, [], {}, {}, {})


def cat_parallel_pair(name="C") -> FinCat:
    mors = {
        "id_a": Mor("id_a", "a", "a"),
        "id_b": Mor("id_b", "b", "b"),
        "u": Mor("u", "a", "b"),
        "v": Mor("v", "a", "b"),
    }
    return FinCat(name, ["a", "b"], mors, {"a": "id_a", "b": "id_b"}, {})


# ---------------------------------------------------------------------------
# Atom interpretation builders (all functorial by construction)


def _materialize(name, slots, model: Model, value_fn, action_fn) -> AtomInterp:
    cats = [model.base_cat(c) for c, _ in slots]
    table = {}
    for objs in itertools.product(*(c.objects for c in cats)):
        table[objs] = tuple(value_fn(objs))
    interp = AtomInterp(name, slots, table, {})
    action = {}
    for mors in itertools.product(*([c.mor(n) for n in c.mor_names()] for c in cats)):
        src, _ = interp.src_dst(mors)
        action[tuple(m.name for m in mors)] = {
            v: action_fn(mors, v) for v in table[src]
        }
    interp.action = action
    return interp


def interp_const(name, slots, model, size) -> AtomInterp:
    elems = tuple(f"c{i}" for i in range(size))
    return _materialize(name, slots, model, lambda objs: elems, lambda mors, v: v)


def interp_corep(name, catname, model, obj) -> AtomInterp:
    cat = model.base_cat(catname)
    return _materialize(
        name, ((catname, POS),), model,
        lambda objs: cat.hom(obj, objs[0]),
        lambda mors, v: cat.compose(v, mors[0].name),
    )


def interp_rep(name, catname, model, obj) -> AtomInterp:
    cat = model.base_cat(catname)
    return _materialize(
        name, ((catname, NEG),), model,
        lambda objs: cat.hom(objs[0], obj),
        lambda mors, v: cat.compose(mors[0].name, v),
    )


def interp_hom2(name, catname, model) -> AtomInterp:
    cat = model.base_cat(catname)
    return _materialize(
        name, ((catname, NEG), (catname, POS)), model,
        lambda objs: cat.hom(objs[0], objs[1]),
        lambda mors, v: cat.compose(mors[0].name, cat.compose(v, mors[1].name)),
    )


def interp_split2(name, catname, model, obj_l, obj_r) -> AtomInterp:
    """Separable two-slot dipresheaf: arrows into obj_l paired with arrows
    out of obj_r."""
    cat = model.base_cat(catname)
    return _materialize(
        name, ((catname, NEG), (catname, POS)), model,
        lambda objs: [("pair", u, v)
                      for u in cat.hom(objs[0], obj_l)
                      for v in cat.hom(obj_r, objs[1])],
        lambda mors, v: ("pair", cat.compose(mors[0].name, v[1]),
                         cat.compose(v[2], mors[1].name)),
    )


def interp_prof(name, catname, dname, model, functor) -> AtomInterp:
    """Arrows of the codomain out of a functor image: hom(F-, =)."""
    catd = model.base_cat(dname)
    fi = model.functor(functor)
    return _materialize(
        name, ((catname, NEG), (dname, POS)), model,
        lambda objs: catd.hom(fi.apply_obj(objs[0]), objs[1]),
        lambda mors, v: catd.compose(
            fi.mor_map[mors[0].name], catd.compose(v, mors[1].name)
        ),
    )


def interp_homhom4(name, cname, dname, model) -> AtomInterp:
    catc = model.base_cat(cname)
    catd = model.base_cat(dname)
    return _materialize(
        name, ((cname, NEG), (cname, POS), (dname, NEG), (dname, POS)), model,
        lambda objs: [("pair", u, v)
                      for u in catc.hom(objs[0], objs[1])
                      for v in catd.hom(objs[2], objs[3])],
        lambda mors, v: ("pair",
                         catc.compose(mors[0].name,
                                      catc.compose(v[1], mors[1].name)),
                         catd.compose(mors[2].name,
                                      catd.compose(v[2], mors[3].name))),
    )


def interp_sum(name, a1: AtomInterp, a2: AtomInterp) -> AtomInterp:
    assert a1.slots == a2.slots
    table = {
        k: tuple(("inl", v) for v in a1.table[k]) + tuple(("inr", v) for v in a2.table[k])
        for k in a1.table
    }
    action = {}
    for key in a1.action:
        action[key] = {
            **{("inl", v): ("inl", w) for v, w in a1.action[key].items()},
            **{("inr", v): ("inr", w) for v, w in a2.action[key].items()},
        }
    return AtomInterp(name, a1.slots, table, action)


def interp_prod(name, a1: AtomInterp, a2: AtomInterp) -> AtomInterp:
    assert a1.slots == a2.slots
    table = {
        k: tuple(("pair", u, v) for u in a1.table[k] for v in a2.table[k])
        for k in a1.table
    }
    action = {
        key: {
            ("pair", u, v): ("pair", m1[u], a2.action[key][v])
            for u in m1 for v in a2.action[key]
        }
        for key, m1 in a1.action.items()
    }
    return AtomInterp(name, a1.slots, table, action)


def rename_interp(interp: AtomInterp, name: str) -> AtomInterp:
    out = AtomInterp(name, interp.slots, interp.table, interp.action)
    return out


# ---------------------------------------------------------------------------
# The model suite


SHAPE_SET0 = ()
SHAPE_COPRE_C = (("C", POS),)
SHAPE_COPRE_D = (("D", POS),)
SHAPE_DI_C = (("C", NEG), ("C", POS))
SHAPE_PROF_CD = (("C", NEG), ("D", POS))
SHAPE_DI_CD = (("C", NEG), ("C", POS), ("D", NEG), ("D", POS))


@dataclass
class SuiteModel:
    model: Model
    stock: dict  # shape -> list of atom names


def _identity_functor(name, cname, dname, model) -> FunctorInterp:
    cat = model.base_cat(cname)
    return FunctorInterp(name, cname, dname,
                         {o: o for o in cat.objects},
                         {m: m for m in cat.mor_names()})


def _constant_functor(name, cname, dname, model, obj) -> FunctorInterp:
    catc = model.base_cat(cname)
    catd = model.base_cat(dname)
    return FunctorInterp(name, cname, dname,
                         {o: obj for o in catc.objects},
                         {m: catd.identity[obj] for m in catc.mor_names()})


def _stock_atoms(model: Model, big: bool = True) -> dict:
    """Populate a model with deterministic interpretations per shape."""
    catc = model.base_cat("C")
    stock: dict = {s: [] for s in (
        SHAPE_SET0, SHAPE_COPRE_C, SHAPE_COPRE_D, SHAPE_DI_C, SHAPE_PROF_CD,
        SHAPE_DI_CD,
    )}

    def add(shape, interp):
        model.atoms[interp.name] = interp
        stock[shape].append(interp.name)

    add(SHAPE_SET0, interp_const("K1", (), model, 1))
    add(SHAPE_SET0, interp_const("K2", (), model, 2))
    for i, o in enumerate(catc.objects[:2]):
        add(SHAPE_COPRE_C, interp_corep(f"P{i + 1}", "C", model, o))
    add(SHAPE_COPRE_C, interp_const("P0", (("C", POS),), model, 2))
    catd = model.base_cat("D")
    for i, o in enumerate(catd.objects[:1]):
        add(SHAPE_COPRE_D, interp_corep(f"G{i + 1}", "D", model, o))
    add(SHAPE_COPRE_D, interp_const("G0", (("D", POS),), model, 1))
    add(SHAPE_DI_C, interp_hom2("H1", "C", model))
    add(SHAPE_DI_C, interp_const("H0", SHAPE_DI_C, model, 2))
    if big and catc.objects:
        add(SHAPE_DI_C, interp_split2("H2", "C", model,
                                      catc.objects[0], catc.objects[-1]))
    add(SHAPE_PROF_CD, interp_prof("W1", "C", "D", model, "F1"))
    add(SHAPE_PROF_CD, interp_const("W0", SHAPE_PROF_CD, model, 1))
    add(SHAPE_DI_CD, interp_homhom4("Q1", "C", "D", model))
    add(SHAPE_DI_CD, interp_const("Q0", SHAPE_DI_CD, model, 2))
    return stock


def _suite_model(name, catc: FinCat, catd: FinCat | None = None,
                 functors: dict | None = None, big: bool = True) -> SuiteModel:
    cats = {"C": catc, "D": catd if catd is not None else catc}
    model = Model(name, cats)
    if functors:
        for fname, builder in functors.items():
            model.functors[fname] = builder(model)
    else:
        model.functors["F1"] = _identity_functor("F1", "C", "D", model)
    stock = _stock_atoms(model, big=big)
    model.validate()
    return SuiteModel(model, stock)


def model_suite() -> list[SuiteModel]:
    """The deterministic battery of small models used everywhere."""
    out = []
    out.append(_suite_model("two", cat_walking_arrow()))
    out.append(_suite_model("discrete2", cat_discrete2()))
    out.append(_suite_model("chain3", cat_chain3()))
    out.append(_suite_model("monoid2", cat_monoid2()))
    out.append(_suite_model("empty", cat_empty()))

    def cross_functor(model):
        return FunctorInterp("F1", "C", "D",
                             {"a": "o0", "b": "o2"},
                             {"id_a": "id_o0", "id_b": "id_o2", "f": "m02"})

    out.append(_suite_model("two_into_chain", cat_walking_arrow("C"),
                            cat_chain3("D"), functors={"F1": cross_functor}))
    return out


def random_model(seed: int) -> tuple[Model, list[str]]:
    """A seeded model with randomized separable/sum/product atom tables."""
    rng = random.Random(seed)
    base = rng.choice(["two", "parallel", "monoid", "chain"])
    cat = {
        "two": cat_walking_arrow,
        "parallel": cat_parallel_pair,
        "monoid": cat_monoid2,
        "chain": cat_chain3,
    }[base]("C")
    model = Model(f"random-{seed}", {"C": cat, "D": cat})
    model.functors["F1"] = _identity_functor("F1", "C", "D", model)

    def leaf(name):
        kind = rng.choice(["hom", "const", "split", "split"])
        if kind == "hom":
            return interp_hom2(name, "C", model)
        if kind == "const":
            return interp_const(name, SHAPE_DI_C, model, rng.randint(1, 2))
        ol = rng.choice(cat.objects)
        orr = rng.choice(cat.objects)
        return interp_split2(name, "C", model, ol, orr)

    def build(name):
        kind = rng.choice(["leaf", "leaf", "sum", "prod"])
        if kind == "leaf":
            return leaf(name)
        a = leaf(name + "l")
        b = leaf(name + "r")
        combined = interp_sum if kind == "sum" else interp_prod
        return rename_interp(combined(name, a, b), name)

    names = []
    for i in range(3):
        interp = build(f"A{i}")
        model.atoms[interp.name] = interp
        names.append(interp.name)
    model.validate()
    return model, names


# ---------------------------------------------------------------------------
# Entry machinery


@dataclass
class CheckResult:
    entry: str
    model: str
    check: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.detail})" if self.detail else ""
        return f"{status}  {self.entry} :: {self.check} @ {self.model}{extra}"


@dataclass
class CorpusEntry:
    name: str
    polarity: str  # "positive" | "negative"
    runner: object  # callable(SuiteModel) -> list[CheckResult]
    expected_error: type | None = None

    def run(self, sm: SuiteModel) -> list[CheckResult]:
        return self.runner(sm)


def view_model(sm: SuiteModel, binding: dict) -> Model:
    """A model exposing the entry's atom names, backed by stock tables."""
    m = sm.model
    out = Model(m.name, m.cats, functors=m.functors)
    out._cat_cache = m._cat_cache
    for entry_name, stock_name in binding.items():
        out.atoms[entry_name] = rename_interp(m.atoms[stock_name], entry_name)
    return out


def bindings_for(sm: SuiteModel, wants: dict, limit: int = 2) -> list[dict]:
    """Assignments of stock atoms to the entry's atom names, capped per atom."""
    choices = []
    for name, shape in wants.items():
        names = sm.stock[shape][:limit]
        choices.append([(name, s) for s in names])
    return [dict(combo) for combo in itertools.product(*choices)]


# Chain steps: family transformers built from single rule applications.


def rule_step(mk, *args, **kw):
    def step(fam: Family, model: Model, sig: SignatureTable) -> Family:
        asm = mk_assume(sig, "@chain", fam.seq)
        d = mk(sig, asm, *args, **kw)
        return eval_derivation(d, model, sig, assumptions={"@chain": fam})
    return step


def compose_hyp_step(pos: int, iso: K.Derivation):
    """Precompose the family at one hypothesis with an evaluated isomorphism
    (iso: single-hypothesis derivation concluding in that hypothesis)."""

    def step(fam: Family, model: Model, sig: SignatureTable) -> Family:
        iso_fam = eval_derivation(iso, model, sig)
        new_hyp = iso.concl.hyps[0]
        hyps = list(fam.seq.hyps)
        hyps[pos] = (hyps[pos][0], new_hyp[1])
        seq = Sequent(fam.seq.ctx, tuple(hyps), fam.seq.goal)
        ev = Evaluator(model, sig)
        ss = SeqSem(ev, seq)
        table = {}
        for idx in ss.indices():
            out = {}
            for u in ss.inputs(ss.sigma(idx)):
                moved = iso_fam(idx, (u[pos],))
                out[u] = fam(idx, u[:pos] + (moved,) + u[pos + 1:])
            table[idx] = out
        result = Family(seq, table)
        w = check_dinatural(ss, result, explain=True)
        if w is not None:
            raise VarianceViolation("compose-hyp", "?", str(w))
        return result

    return step


def compose_goal_step(iso: K.Derivation):
    """Postcompose the family with an evaluated isomorphism on the goal."""

    def step(fam: Family, model: Model, sig: SignatureTable) -> Family:
        iso_fam = eval_derivation(iso, model, sig)
        seq = Sequent(fam.seq.ctx, fam.seq.hyps, iso.concl.goal)
        result = Family(seq, compose_families(fam, iso_fam).table)
        ev = Evaluator(model, sig)
        w = check_dinatural(SeqSem(ev, seq), result, explain=True)
        if w is not None:
            raise VarianceViolation("compose-goal", "?", str(w))
        return result

    return step


def run_chain(fam: Family, steps, model: Model, sig: SignatureTable) -> Family:
    for step in steps:
        fam = step(fam, model, sig)
    return fam


def iso_roundtrip_results(entry: str, sm: SuiteModel, sig: SignatureTable,
                          model: Model, seq_a: Sequent, up, down,
                          bound: int = 2000, tag: str = "iso") -> list[CheckResult]:
    """Check that up;down is the identity on every enumerable family of
    seq_a, that down;up is the identity on the other side, and that the two
    sides have the same number of dinaturals."""
    out = []
    ev = Evaluator(model, sig)
    try:
        fams_a = enumerate_dinaturals(SeqSem(ev, seq_a), bound)
    except EnumerationBound as e:
        return [CheckResult(entry, model.name, f"{tag}-roundtrip", True,
                            f"skipped: {e}")]
    seq_b = None
    ok = True
    detail = ""
    count_b = None
    for fam in fams_a:
        there = run_chain(fam, up, model, sig)
        seq_b = there.seq
        back = run_chain(there, down, model, sig)
        if not families_equal(back, Family(fam.seq, fam.table)):
            ok = False
            detail = "up;down is not the identity"
            break
    out.append(CheckResult(entry, model.name, f"{tag}-there-and-back", ok, detail))
    if seq_b is not None:
        ok2 = True
        detail2 = ""
        try:
            fams_b = enumerate_dinaturals(SeqSem(ev, seq_b), bound)
            count_b = len(fams_b)
            for fam in fams_b:
                back = run_chain(fam, down, model, sig)
                there = run_chain(back, up, model, sig)
                if not families_equal(there, Family(fam.seq, fam.table)):
                    ok2 = False
                    detail2 = "down;up is not the identity"
                    break
        except EnumerationBound as e:
            detail2 = f"skipped: {e}"
        out.append(CheckResult(entry, model.name, f"{tag}-back-and-there", ok2, detail2))
        if count_b is not None:
            out.append(CheckResult(
                entry, model.name, f"{tag}-counts", len(fams_a) == count_b,
                f"|A|={len(fams_a)} |B|={count_b}",
            ))
    return out


def _hom(cat, s, t) -> FHom:
    return FHom(cat, TVar(s, NEG), TVar(t, POS))


def _atom1(name, v) -> FAtom:
    return FAtom(name, (TVar(v, POS),))


def _atom2(name, vneg, vpos) -> FAtom:
    return FAtom(name, (TVar(vneg, NEG), TVar(vpos, POS)))


# ---------------------------------------------------------------------------
# Entries


def _sig_plain() -> SignatureTable:
    sig = SignatureTable()
    sig.declare_cat("C")
    return sig


def _comp_tree(sig) -> K.J:
    base = mk_id(sig, (("z", C), ("c", C)), "g", _hom(C, "z", "c"))
    return mk_j(sig, base, "a", "b", "z", "f")


def run_comp(sm: SuiteModel) -> list[CheckResult]:
    sig = _sig_plain()
    model = view_model(sm, {})
    res = []
    comp = _comp_tree(sig)
    K.check_derivation(comp, sig)
    fam = eval_derivation(comp, model, sig)
    cat = model.base_cat("C")
    ok = all(
        out == cat.compose(e, g)
        for tab in fam.table.values()
        for (e, g), out in tab.items()
    )
    res.append(CheckResult("comp", model.name, "matches-composition-table", ok))

    left = mk_jinv(sig, comp, "a", "b", "z", "f")
    ident_l = mk_id(sig, left.concl.ctx, "g", left.concl.hyps[0][1])
    obls = check_eq_judgement(EqJudgement(left, ident_l), sig, Direct())
    ok = all(eval_eq_obligation(o, model, sig) for o in obls)
    res.append(CheckResult("comp", model.name, "left-unit", ok))

    right = mk_jinv(sig, comp, "b", "c", "w", "g")
    ident_r = mk_id(sig, right.concl.ctx, "f", right.concl.hyps[0][1])
    obls = check_eq_judgement(
        EqJudgement(right, ident_r), sig, JEqStrategy("a", "w", "u", "f")
    )
    ok = all(eval_eq_obligation(o, model, sig) for o in obls)
    res.append(CheckResult("comp", model.name, "right-unit-via-jeq", ok,
                           f"{len(obls)} obligation(s)"))

    # associativity: nested eliminations on either end
    inner_prem = mk_id(sig, (("w", C), ("d", C)), "h", _hom(C, "w", "d"))
    inner = mk_j(sig, inner_prem, "z", "c", "w", "g")
    t1 = mk_j(sig, inner, "a", "b", "z", "f")
    comp_abw = mk_j(
        sig, mk_id(sig, (("z", C), ("w", C)), "g", _hom(C, "z", "w")),
        "a", "b", "z", "f",
    )
    t2 = mk_j(sig, comp_abw, "c", "d", "w", "h")
    t2 = mk_exchange_hyps(sig, t2, 0)
    t2 = mk_exchange_hyps(sig, t2, 1)
    obls = check_eq_judgement(EqJudgement(t1, t2), sig, JEqStrategy("a", "b", "z", "f"))
    ok = all(eval_eq_obligation(o, model, sig) for o in obls)
    res.append(CheckResult("comp", model.name, "assoc-via-jeq", ok,
                           f"{len(obls)} obligation(s)"))
    return res


def _sig_map() -> SignatureTable:
    sig = SignatureTable()
    sig.declare_cat("C")
    sig.declare_cat("D")
    sig.declare_functor("F", C, D)
    return sig


def _map_tree(sig, names=("x", "y", "z", "e")) -> K.J:
    x, y, z, e = names
    r = mk_refl(sig, ((z, D),), z)
    re = mk_reindex(sig, r, z, "F", z)
    return mk_j(sig, re, x, y, z, e)


def run_map(sm: SuiteModel) -> list[CheckResult]:
    sig = _sig_map()
    model = view_model(sm, {})
    model.functors = {"F": sm.model.functors["F1"], **model.functors}
    res = []
    mapf = _map_tree(sig)
    fam = eval_derivation(mapf, model, sig)
    fi = model.functor("F")
    ok = all(out == fi.mor_map[e] for tab in fam.table.values()
             for (e,), out in tab.items())
    res.append(CheckResult("map", model.name, "matches-functor-table", ok))

    # identities map to identities
    contracted = mk_jinv(sig, mapf, "x", "y", "z", "e")
    base = mk_reindex(sig, mk_refl(sig, (("z", D),), "z"), "z", "F", "z")
    obls = check_eq_judgement(EqJudgement(contracted, base), sig, Direct())
    ok = all(eval_eq_obligation(o, model, sig) for o in obls)
    res.append(CheckResult("map", model.name, "preserves-identities", ok))

    # composites map to composites
    map_aw = _map_tree(sig, ("a", "w", "z1", "f"))
    side1 = mk_j(sig, map_aw, "b", "c", "w", "g")
    side1 = mk_exchange_hyps(sig, side1, 0)
    map_zc = _map_tree(sig, ("z", "c", "z2", "g"))
    side2 = mk_j(sig, map_zc, "a", "b", "z", "f")
    obls = check_eq_judgement(
        EqJudgement(side1, side2), sig, JEqStrategy("a", "b", "z", "f")
    )
    ok = all(eval_eq_obligation(o, model, sig) for o in obls)
    res.append(CheckResult("map", model.name, "preserves-composition-via-jeq", ok,
                           f"{len(obls)} obligation(s)"))
    return res


def _sig_with_atoms(atoms: dict) -> SignatureTable:
    sig = SignatureTable()
    sig.declare_cat("C")
    sig.declare_cat("D")
    for name, shape in atoms.items():
        sig.declare_atom(name, [(CBase(c), pol) for c, pol in shape])
    return sig


def run_transport(sm: SuiteModel) -> list[CheckResult]:
    sig = _sig_with_atoms({"P": SHAPE_COPRE_C})
    res = []
    for binding in bindings_for(sm, {"P": SHAPE_COPRE_C}):
        model = view_model(sm, binding)
        base = mk_id(sig, (("z", C),), "k", _atom1("P", "z"))
        trans = mk_j(sig, base, "a", "b", "z", "e")
        fam = eval_derivation(trans, model, sig)
        interp = model.atom("P")
        cat = model.base_cat("C")
        ok = all(
            out == interp.act((cat.mor(e),))(k)
            for tab in fam.table.values()
            for (e, k), out in tab.items()
        )
        res.append(CheckResult("transport", model.name,
                               f"matches-action[{binding['P']}]", ok))
        contracted = mk_jinv(sig, trans, "a", "b", "z", "e")
        obls = check_eq_judgement(EqJudgement(contracted, base), sig, Direct())
        ok = all(eval_eq_obligation(o, model, sig) for o in obls)
        res.append(CheckResult("transport", model.name,
                               f"computation-rule[{binding['P']}]", ok))
    return res


def sym_sequent() -> Sequent:
    return Sequent(
        (("a", C), ("b", C)),
        (("e", _hom(C, "a", "b")),),
        _hom(C, "b", "a"),
    )


def run_sym(sm: SuiteModel) -> list[CheckResult]:
    sig = _sig_plain()
    seq = sym_sequent()
    res = []
    try:
        K.contract_sequent(seq, "a", "b", "z", "e", "j")
        res.append(CheckResult("sym", sm.model.name, "rejected", False,
                               "contraction unexpectedly succeeded"))
    except VarianceViolation as e:
        res.append(CheckResult("sym", sm.model.name, "rejected", True, str(e)))
    found = K.search_proofs(seq, sig, 3)
    res.append(CheckResult("sym", sm.model.name, "no-proof-depth-3",
                           len(found) == 0, f"{len(found)} candidate(s)"))
    return res


def run_yoneda(sm: SuiteModel) -> list[CheckResult]:
    sig = _sig_with_atoms({"P": SHAPE_COPRE_C})
    res = []
    for binding in bindings_for(sm, {"P": SHAPE_COPRE_C}):
        model = view_model(sm, binding)
        intro = mk_macro(sig, K.MYoneda, C, "P", "intro")
        elim = mk_macro(sig, K.MYoneda, C, "P", "elim")
        fi = eval_derivation(intro, model, sig)
        fe = eval_derivation(elim, model, sig)
        ok1 = all(out == u for tab in compose_families(fi, fe).table.values()
                  for (u,), out in tab.items())
        ok2 = all(out == u for tab in compose_families(fe, fi).table.values()
                  for (u,), out in tab.items())
        ev = Evaluator(model, sig)
        sizes_ok = True
        for o in model.base_cat("C").objects:
            pa = ev.eval(_atom1("P", "a"), {"a": C}, {"a": (o, o)})
            end = ev.eval(intro.concl.goal, {"a": C}, {"a": (o, o)})
            sizes_ok = sizes_ok and len(pa) == len(end)
        tag = binding["P"]
        res.append(CheckResult("yoneda", model.name, f"roundtrip-set[{tag}]", ok1))
        res.append(CheckResult("yoneda", model.name, f"roundtrip-end[{tag}]", ok2))
        res.append(CheckResult("yoneda", model.name, f"bijection[{tag}]", sizes_ok))
    return res


def run_coyoneda(sm: SuiteModel) -> list[CheckResult]:
    sig = _sig_with_atoms({"P": SHAPE_COPRE_C})
    res = []
    for binding in bindings_for(sm, {"P": SHAPE_COPRE_C}):
        model = view_model(sm, binding)
        intro = mk_macro(sig, K.MCoYoneda, C, "P", "intro")
        elim = mk_macro(sig, K.MCoYoneda, C, "P", "elim")
        fi = eval_derivation(intro, model, sig)
        fe = eval_derivation(elim, model, sig)
        ok1 = all(out == u for tab in compose_families(fi, fe).table.values()
                  for (u,), out in tab.items())
        ok2 = all(out == u for tab in compose_families(fe, fi).table.values()
                  for (u,), out in tab.items())
        ev = Evaluator(model, sig)
        sizes_ok = True
        for o in model.base_cat("C").objects:
            pa = ev.eval(_atom1("P", "a"), {"a": C}, {"a": (o, o)})
            coend = ev.eval(elim.concl.hyps[0][1], {"a": C}, {"a": (o, o)})
            sizes_ok = sizes_ok and len(pa) == len(coend)
        tag = binding["P"]
        res.append(CheckResult("coyoneda", model.name, f"roundtrip-set[{tag}]", ok1))
        res.append(CheckResult("coyoneda", model.name, f"roundtrip-coend[{tag}]", ok2))
        res.append(CheckResult("coyoneda", model.name, f"bijection[{tag}]", sizes_ok))
    return res


def bindings_pick(sm: SuiteModel, wants: dict, count: int = 2) -> list[dict]:
    """A few deterministic stock assignments, cycling through each shape."""
    out = []
    for k in range(count):
        b = {}
        for i, (name, shape) in enumerate(sorted(wants.items())):
            names = sm.stock[shape]
            b[name] = names[(k + i) % len(names)]
        if b not in out:
            out.append(b)
    return out


def run_presheaf_exp(sm: SuiteModel) -> list[CheckResult]:
    wants = {"A": SHAPE_COPRE_C, "B": SHAPE_COPRE_C, "G": SHAPE_COPRE_C}
    sig = _sig_with_atoms(wants)
    res = []
    for binding in bindings_pick(sm, wants):
        model = view_model(sm, binding)
        s_top = Sequent(
            (("y", C),),
            (("aa", _atom1("A", "y")), ("g", _atom1("G", "y"))),
            _atom1("B", "y"),
        )
        coyo_elim = mk_macro(sig, K.MCoYoneda, C, "G", "elim",
                             a="y", binder="x", opened="yy", fresh="zz")
        coyo_intro = mk_macro(sig, K.MCoYoneda, C, "G", "intro",
                              a="y", binder="x", opened="yy", fresh="zz")
        down = [
            compose_hyp_step(1, coyo_elim),
            rule_step(mk_coend_elim, "x0", "g", 1),
            rule_step(mk_split_and, "g", "e", "g2"),
            rule_step(mk_exchange_hyps, 0),
            rule_step(mk_join_and, "e", "aa", "h"),
            rule_step(mk_curry, "h"),
            rule_step(mk_exchange, 0),
            rule_step(mk_end_intro, "y"),
        ]
        up = [
            rule_step(mk_end_elim, "y", 1),
            rule_step(mk_exchange, 0),
            rule_step(mk_uncurry, "h", 0),
            rule_step(mk_split_and, "h", "e", "aa"),
            rule_step(mk_exchange_hyps, 0),
            rule_step(mk_join_and, "e", "g2", "g"),
            rule_step(mk_coend_intro, "x0", "g"),
            compose_hyp_step(1, coyo_intro),
        ]
        tag = ",".join(binding[k] for k in sorted(binding))
        res.extend(iso_roundtrip_results(
            "presheaf-exp", sm, sig, model, s_top, down, up,
            tag=f"tensor-hom[{tag}]",
        ))
    return res


def _sig_kan() -> SignatureTable:
    sig = SignatureTable()
    sig.declare_cat("C")
    sig.declare_cat("D")
    sig.declare_atom("P", [(C, POS)])
    sig.declare_atom("G", [(D, POS)])
    sig.declare_functor("F", C, D)
    return sig


def run_ran_adjoint(sm: SuiteModel) -> list[CheckResult]:
    sig = _sig_kan()
    res = []
    for binding in bindings_pick(sm, {"P": SHAPE_COPRE_C, "G": SHAPE_COPRE_D}):
        model = view_model(sm, binding)
        model.functors = {"F": sm.model.functors["F1"], **model.functors}
        ran = FEnd("y", C, FImp(
            FHom(D, TVar("x", NEG), TApp("F", TVar("y", POS))),
            _atom1("P", "y"),
        ))
        s_a = Sequent((("x", D),), (("g", _atom1("G", "x")),), ran)
        coyo_elim = mk_reindex(
            sig,
            mk_macro(sig, K.MCoYoneda, D, "G", "elim",
                     a="ay", binder="x", opened="yy", fresh="zz"),
            "ay", "F", "y",
        )
        coyo_intro = mk_reindex(
            sig,
            mk_macro(sig, K.MCoYoneda, D, "G", "intro",
                     a="ay", binder="x", opened="yy", fresh="zz"),
            "ay", "F", "y",
        )
        down = [
            rule_step(mk_end_elim, "y", 1),
            rule_step(mk_uncurry, "e", 0),
            rule_step(mk_join_and, "e", "g", "h"),
            rule_step(mk_coend_intro, "x", "h"),
            compose_hyp_step(0, coyo_intro),
        ]
        up = [
            compose_hyp_step(0, coyo_elim),
            rule_step(mk_coend_elim, "x", "h", 0),
            rule_step(mk_split_and, "h", "e", "g"),
            rule_step(mk_curry, "e"),
            rule_step(mk_end_intro, "y"),
        ]
        tag = ",".join(binding[k] for k in sorted(binding))
        res.extend(iso_roundtrip_results(
            "ran-adjoint", sm, sig, model, s_a, down, up,
            tag=f"right-extension[{tag}]",
        ))
    return res


def run_lan_adjoint(sm: SuiteModel) -> list[CheckResult]:
    sig = _sig_kan()
    res = []
    for binding in bindings_pick(sm, {"P": SHAPE_COPRE_C, "G": SHAPE_COPRE_D}):
        model = view_model(sm, binding)
        model.functors = {"F": sm.model.functors["F1"], **model.functors}
        lan = FCoend("y", C, FAnd(
            FHom(D, TApp("F", TVar("y", NEG)), TVar("x", POS)),
            _atom1("P", "y"),
        ))
        s_a = Sequent((("x", D),), (("l", lan),), _atom1("G", "x"))
        yo_elim = mk_reindex(
            sig,
            mk_macro(sig, K.MYoneda, D, "G", "elim",
                     a="ay", binder="x", opened="yy", fresh="zz"),
            "ay", "F", "y",
        )
        yo_intro = mk_reindex(
            sig,
            mk_macro(sig, K.MYoneda, D, "G", "intro",
                     a="ay", binder="x", opened="yy", fresh="zz"),
            "ay", "F", "y",
        )
        down = [
            rule_step(mk_coend_elim, "y", "l", 1),
            rule_step(mk_split_and, "l", "e", "p"),
            rule_step(mk_curry, "e"),
            rule_step(mk_end_intro, "x"),
            compose_goal_step(yo_elim),
        ]
        up = [
            compose_goal_step(yo_intro),
            rule_step(mk_end_elim, "x", 0),
            rule_step(mk_uncurry, "e", 0),
            rule_step(mk_join_and, "e", "p", "l"),
            rule_step(mk_coend_intro, "y", "l"),
        ]
        tag = ",".join(binding[k] for k in sorted(binding))
        res.extend(iso_roundtrip_results(
            "lan-adjoint", sm, sig, model, s_a, down, up,
            tag=f"left-extension[{tag}]",
        ))
    return res


def run_fubini_end(sm: SuiteModel) -> list[CheckResult]:
    wants = {"Q": SHAPE_DI_CD}
    sig = _sig_with_atoms(wants)
    res = []
    qargs = (TVar("x1", NEG), TVar("x1", POS), TVar("y1", NEG), TVar("y1", POS))
    for binding in bindings_pick(sm, wants):
        model = view_model(sm, binding)
        tag = binding["Q"]
        ex = mk_macro(sig, K.MFubini, C, D, "Q", "exchange")
        cb = mk_macro(sig, K.MFubini, C, D, "Q", "combine")
        f_ex = eval_derivation(ex, model, sig)
        f_cb = eval_derivation(cb, model, sig)

        # reversing chains, built directly
        e_yx = ex.concl.goal
        base = mk_id(sig, (), "w", e_yx)
        r1 = mk_end_elim(sig, base, "y2", 0)
        r2 = mk_end_elim(sig, r1, "x2", 1)
        r3 = mk_exchange(sig, r2, 0)
        r4 = mk_end_intro(sig, r3, "y2")
        rev = mk_end_intro(sig, r4, "x2")
        f_rev = eval_derivation(rev, model, sig)
        ok = all(out == u for tab in compose_families(f_ex, f_rev).table.values()
                 for (u,), out in tab.items())
        ok &= all(out == u for tab in compose_families(f_rev, f_ex).table.values()
                  for (u,), out in tab.items())
        res.append(CheckResult("fubini-end", model.name,
                               f"exchange-roundtrip[{tag}]", ok))

        e_p = cb.concl.goal
        base = mk_id(sig, (), "w", e_p)
        c1 = mk_end_elim(sig, base, "p2", 0)
        c2 = K.mk_unpair_ctx(sig, c1, "p2", "x2", "y2")
        c3 = mk_end_intro(sig, c2, "y2")
        rev_cb = mk_end_intro(sig, c3, "x2")
        f_rev_cb = eval_derivation(rev_cb, model, sig)
        ok = all(out == u for tab in compose_families(f_cb, f_rev_cb).table.values()
                 for (u,), out in tab.items())
        ok &= all(out == u for tab in compose_families(f_rev_cb, f_cb).table.values()
                  for (u,), out in tab.items())
        res.append(CheckResult("fubini-end", model.name,
                               f"combine-roundtrip[{tag}]", ok))

        ev = Evaluator(model, sig)
        body = FAtom("Q", qargs)
        e_xy = FEnd("x1", C, FEnd("y1", D, body))
        e_yx_f = FEnd("y1", D, FEnd("x1", C, body))
        from .syntax import CProd, TFst, TSnd
        pbody = FAtom("Q", (
            TFst(TVar("p", NEG)), TFst(TVar("p", POS)),
            TSnd(TVar("p", NEG)), TSnd(TVar("p", POS)),
        ))
        e_pf = FEnd("p", CProd(C, D), pbody)
        sizes = [len(ev.eval(f, {}, {})) for f in (e_xy, e_yx_f, e_pf)]
        res.append(CheckResult("fubini-end", model.name,
                               f"cardinalities[{tag}]",
                               len(set(sizes)) == 1, f"sizes {sizes}"))
    return res


def run_right_rift(sm: SuiteModel) -> list[CheckResult]:
    wants = {"P": SHAPE_DI_C, "Q": SHAPE_PROF_CD, "G": SHAPE_PROF_CD}
    sig = _sig_with_atoms(wants)
    res = []
    for binding in bindings_pick(sm, wants):
        model = view_model(sm, binding)
        coend = FCoend("y", C, FAnd(
            _atom2("P", "x", "y"),
            FAtom("Q", (TVar("y", NEG), TVar("z", POS))),
        ))
        s1 = Sequent(
            (("x", C), ("z", D)),
            (("c", coend),),
            FAtom("G", (TVar("x", NEG), TVar("z", POS))),
        )
        down = [
            rule_step(mk_coend_elim, "y", "c", 1),
            rule_step(mk_split_and, "c", "p", "q"),
            rule_step(mk_curry, "p"),
            rule_step(mk_end_intro, "x"),
            rule_step(mk_op_relabel, "y"),
        ]
        up = [
            rule_step(mk_op_relabel, "y"),
            rule_step(mk_end_elim, "x", 0),
            rule_step(mk_uncurry, "p", 0),
            rule_step(mk_join_and, "p", "q", "c"),
            rule_step(mk_coend_intro, "y", "c"),
        ]
        tag = ",".join(binding[k] for k in sorted(binding))
        res.extend(iso_roundtrip_results(
            "right-rift", sm, sig, model, s1, down, up, tag=f"rift[{tag}]",
        ))
    return res


def run_hom_limits_left(sm: SuiteModel) -> list[CheckResult]:
    wants = {"P": SHAPE_DI_C, "G": SHAPE_SET0, "Q": SHAPE_SET0}
    sig = _sig_with_atoms(wants)
    res = []
    for binding in bindings_pick(sm, wants):
        model = view_model(sm, binding)
        s_a = Sequent(
            (), (("g", FAtom("G", ())),),
            FImp(FCoend("x", C, _atom2("P", "x", "x")), FAtom("Q", ())),
        )
        down = [
            rule_step(mk_uncurry, "c", 0),
            rule_step(mk_coend_elim, "x", "c", 0),
            rule_step(mk_curry, "c"),
            rule_step(mk_end_intro, "x"),
        ]
        up = [
            rule_step(mk_end_elim, "x", 0),
            rule_step(mk_uncurry, "c", 0),
            rule_step(mk_coend_intro, "x", "c"),
            rule_step(mk_curry, "c"),
        ]
        tag = ",".join(binding[k] for k in sorted(binding))
        res.extend(iso_roundtrip_results(
            "hom-limits-left", sm, sig, model, s_a, down, up,
            tag=f"continuity[{tag}]",
        ))
    return res


def run_hom_limits_right(sm: SuiteModel) -> list[CheckResult]:
    wants = {"P": SHAPE_DI_C, "G": SHAPE_SET0, "Q": SHAPE_SET0}
    sig = _sig_with_atoms(wants)
    res = []
    for binding in bindings_pick(sm, wants):
        model = view_model(sm, binding)
        s_a = Sequent(
            (), (("g", FAtom("G", ())),),
            FImp(FAtom("Q", ()), FEnd("x", C, _atom2("P", "x", "x"))),
        )
        down = [
            rule_step(mk_uncurry, "q", 0),
            rule_step(mk_end_elim, "x", 0),
            rule_step(mk_curry, "q"),
            rule_step(mk_end_intro, "x"),
        ]
        up = [
            rule_step(mk_end_elim, "x", 0),
            rule_step(mk_uncurry, "q", 0),
            rule_step(mk_end_intro, "x"),
            rule_step(mk_curry, "q"),
        ]
        tag = ",".join(binding[k] for k in sorted(binding))
        res.extend(iso_roundtrip_results(
            "hom-limits-right", sm, sig, model, s_a, down, up,
            tag=f"continuity[{tag}]",
        ))
    return res


def run_dinat_as_end(sm: SuiteModel) -> list[CheckResult]:
    wants = {"P": SHAPE_DI_C, "Q": SHAPE_DI_C}
    sig = _sig_with_atoms(wants)
    res = []
    for binding in bindings_pick(sm, wants, count=3):
        model = view_model(sm, binding)
        tag = ",".join(binding[k] for k in sorted(binding))
        seq = Sequent(
            (("x", C),), (("h", _atom2("P", "x", "x")),), _atom2("Q", "x", "x")
        )
        endf = FEnd("x", C, FImp(_atom2("P", "x", "x"), _atom2("Q", "x", "x")))
        ev = Evaluator(model, sig)
        try:
            fams = enumerate_dinaturals(SeqSem(ev, seq), 20000)
        except EnumerationBound as e:
            res.append(CheckResult("dinat-as-end", model.name,
                                   f"cardinality[{tag}]", True, f"skipped: {e}"))
            continue
        endset = ev.eval(endf, {}, {})
        res.append(CheckResult(
            "dinat-as-end", model.name, f"cardinality[{tag}]",
            len(fams) == len(endset),
            f"dinaturals {len(fams)}, end {len(endset)}",
        ))
        up = [rule_step(mk_curry, "h"), rule_step(mk_end_intro, "x")]
        down = [rule_step(mk_end_elim, "x", 0), rule_step(mk_uncurry, "h", 0)]
        images = []
        ok = True
        for fam in fams:
            point = run_chain(fam, up, model, sig)
            w = point.table[()][()]
            images.append(w)
            back = run_chain(point, down, model, sig)
            ok = ok and families_equal(back, Family(back.seq, fam.table))
        ok = ok and len(set(images)) == len(fams) and set(images) <= set(endset)
        seq_e = Sequent((), (), endf)
        for w in endset:
            fam_w = Family(seq_e, {(): {(): w}})
            back = run_chain(fam_w, down, model, sig)
            point = run_chain(back, up, model, sig)
            ok = ok and point.table[()][()] == w
        res.append(CheckResult("dinat-as-end", model.name,
                               f"explicit-bijection[{tag}]", ok))
    return res


def run_hom_rel_adj(sm: SuiteModel) -> list[CheckResult]:
    sig = _sig_with_atoms({"G": SHAPE_DI_C})
    res = []
    model = view_model(sm, {"G": sm.stock[SHAPE_DI_C][0]})
    gfml = _atom2("G", "x", "x")
    base = mk_weaken(sig, mk_refl(sig, (("z", C), ("x", C)), "z"), "g", gfml, 0)
    intro = mk_macro(sig, K.MHomRelAdj, base, "intro", "a", "b", "z", "e")
    elim = mk_macro(sig, K.MHomRelAdj, intro, "elim", "a", "b", "z", "e")
    f_base = eval_derivation(base, model, sig)
    f_back = eval_derivation(elim, model, sig)
    res.append(CheckResult("hom-rel-adj", model.name, "closed-roundtrip",
                           families_equal(f_back, Family(f_back.seq, f_base.table))))

    def up_step(fam, mdl, sg):
        asm = mk_assume(sg, "@chain", fam.seq)
        d = mk_macro(sg, K.MHomRelAdj, asm, "intro", "a", "b", "z", "e")
        return eval_derivation(d, mdl, sg, assumptions={"@chain": fam})

    def down_step(fam, mdl, sg):
        asm = mk_assume(sg, "@chain", fam.seq)
        d = mk_macro(sg, K.MHomRelAdj, asm, "elim", "a", "b", "z", "e")
        return eval_derivation(d, mdl, sg, assumptions={"@chain": fam})

    res.extend(iso_roundtrip_results(
        "hom-rel-adj", sm, sig, model, base.concl, [up_step], [down_step],
        tag="bijection",
    ))
    bad = mk_weaken(sig, mk_refl(sig, (("z", C), ("x", C)), "z"), "g",
                    _atom2("G", "z", "z"), 0)
    try:
        mk_macro(sig, K.MHomRelAdj, bad, "intro", "a", "b", "z", "e")
        res.append(CheckResult("hom-rel-adj", model.name,
                               "dependent-context-rejected", False,
                               "macro accepted a dependent context"))
    except MacroError as e:
        res.append(CheckResult("hom-rel-adj", model.name,
                               "dependent-context-rejected", True, str(e)))
    return res


# ---------------------------------------------------------------------------
# The catalogue


REQUIRED_ENTRIES = (
    "comp",
    "map",
    "transport",
    "sym",
    "yoneda",
    "coyoneda",
    "presheaf-exp",
    "ran-adjoint",
    "lan-adjoint",
    "fubini-end",
    "right-rift",
    "hom-limits-left",
    "hom-limits-right",
    "dinat-as-end",
    "hom-rel-adj",
)


def corpus_entries() -> list[CorpusEntry]:
    entries = [
        CorpusEntry("comp", "positive", run_comp),
        CorpusEntry("map", "positive", run_map),
        CorpusEntry("transport", "positive", run_transport),
        CorpusEntry("sym", "negative", run_sym, VarianceViolation),
        CorpusEntry("yoneda", "positive", run_yoneda),
        CorpusEntry("coyoneda", "positive", run_coyoneda),
        CorpusEntry("presheaf-exp", "positive", run_presheaf_exp),
        CorpusEntry("ran-adjoint", "positive", run_ran_adjoint),
        CorpusEntry("lan-adjoint", "positive", run_lan_adjoint),
        CorpusEntry("fubini-end", "positive", run_fubini_end),
        CorpusEntry("right-rift", "positive", run_right_rift),
        CorpusEntry("hom-limits-left", "positive", run_hom_limits_left),
        CorpusEntry("hom-limits-right", "positive", run_hom_limits_right),
        CorpusEntry("dinat-as-end", "positive", run_dinat_as_end),
        CorpusEntry("hom-rel-adj", "positive", run_hom_rel_adj),
    ]
    assert tuple(e.name for e in entries) == REQUIRED_ENTRIES
    return entries


def run_corpus(models: list[SuiteModel] | None = None) -> list[CheckResult]:
    suite = models if models is not None else model_suite()
    out = []
    for entry in corpus_entries():
        for sm in suite:
            out.extend(entry.run(sm))
    return out


def find_composition_witness(seeds: range, per_model_bound: int = 3000):
    """Scan seeded random models for a non-composable pair of dinaturals."""
    for seed in seeds:
        model, names = random_model(seed)
        sig = SignatureTable()
        sig.declare_cat("C")
        for n in names:
            sig.declare_atom(n, [(C, NEG), (C, POS)])
        witness = search_composition_failure(model, sig, names, C,
                                             bound=per_model_bound)
        if witness is not None:
            return seed, model, witness
    return None
