"""Finite-category semantics: everything is evaluated in finite sets.

Formulas denote set-valued dipresheaves, derivations denote families of
functions indexed by diagonal context assignments, ends are equalizers of
products and coends are coequalizers of coproducts (a union-find quotient).
All element encodings are canonical nested tuples of strings so that sets
can be ordered, compared and re-evaluated deterministically.

Action convention used throughout: ``act(F, old, new, mu)`` transports an
element of ``F`` at the point ``old`` to the point ``new``, where per
variable ``mu[x] = (n, p)`` with ``n : new_neg -> old_neg`` (contravariant
side pulls back) and ``p : old_pos -> new_pos``.  Either side may be
``None`` when no occurrence of that variance exists; using a missing side
is a soundness bug, never silently ignored.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field

from .errors import (
    EnumerationBound,
    EvalError,
    ModelError,
    SoundnessBug,
)
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
    free_vars,
    normalize,
)

DEFAULT_MAX_SET_SIZE = 10**6


def max_set_size_default() -> int:
    env = os.environ.get("DINAT_MAX_SET_SIZE")
    return int(env) if env else DEFAULT_MAX_SET_SIZE


def canon_key(x):
    """Total order key for canonical element values (strings and tuples)."""
    if isinstance(x, str):
        return (0, x)
    if isinstance(x, tuple):
        return (1, tuple(canon_key(i) for i in x))
    raise TypeError(f"non-canonical element {x!r}")


def canon_sort(xs) -> tuple:
    return tuple(sorted(xs, key=canon_key))


# ---------------------------------------------------------------------------
# Finite categories


@dataclass(frozen=True)
class Mor:
    name: object  # str, or nested tuple of names for product categories
    src: object
    dst: object


class FinCat:
    """A finite category given by an explicit composition table.

    ``comp[(f, g)]`` is the diagrammatic composite f;g for f : a -> b,
    g : b -> c.  Validation checks totality on composable pairs, unit laws
    and associativity exhaustively.
    """

    def __init__(self, name, objects, mors, identity, comp):
        self.name = name
        self.objects = canon_sort(objects)
        self.mors: dict[object, Mor] = dict(mors)
        self.identity: dict[object, object] = dict(identity)
        self.comp: dict[tuple, object] = dict(comp)
        self._mor_names = canon_sort(self.mors.keys())

    def mor_names(self) -> tuple:
        return self._mor_names

    def mor(self, name) -> Mor:
        return self.mors[name]

    def id_mor(self, obj) -> Mor:
        return self.mors[self.identity[obj]]

    def is_id(self, name) -> bool:
        m = self.mors[name]
        return self.identity.get(m.src) == name

    def nonid_mors(self):
        return [self.mors[n] for n in self._mor_names if not self.is_id(n)]

    def hom(self, a, b) -> tuple:
        return tuple(
            n for n in self._mor_names
            if self.mors[n].src == a and self.mors[n].dst == b
        )

    def compose(self, f, g):
        """Name of f;g for composable morphism names f, g."""
        mf, mg = self.mors[f], self.mors[g]
        if mf.dst != mg.src:
            raise ModelError(f"{self.name}: {f};{g} not composable")
        if self.identity.get(mf.src) == f:
            return g
        if self.identity.get(mg.src) == g:
            return f
        key = (f, g)
        if key not in self.comp:
            raise ModelError(f"{self.name}: missing composite {f};{g}")
        return self.comp[key]

    def validate(self) -> None:
        for o in self.objects:
            if o not in self.identity:
                raise ModelError(f"{self.name}: missing identity for {o}")
            i = self.identity[o]
            if i not in self.mors or self.mors[i].src != o or self.mors[i].dst != o:
                raise ModelError(f"{self.name}: bad identity {i} for {o}")
        for m in self.mors.values():
            if m.src not in self.objects or m.dst not in self.objects:
                raise ModelError(f"{self.name}: morphism {m.name} has unknown endpoint")
        for f in self._mor_names:
            for g in self._mor_names:
                mf, mg = self.mors[f], self.mors[g]
                if mf.dst != mg.src:
                    continue
                h = self.compose(f, g)
                mh = self.mors.get(h)
                if mh is None or mh.src != mf.src or mh.dst != mg.dst:
                    raise ModelError(f"{self.name}: bad composite {f};{g} = {h}")
        for f in self._mor_names:
            for g in self._mor_names:
                for h in self._mor_names:
                    mf, mg, mh = self.mors[f], self.mors[g], self.mors[h]
                    if mf.dst != mg.src or mg.dst != mh.src:
                        continue
                    if self.compose(self.compose(f, g), h) != self.compose(
                        f, self.compose(g, h)
                    ):
                        raise ModelError(
                            f"{self.name}: associativity fails on ({f}, {g}, {h})"
                        )

    def op(self) -> "FinCat":
        mors = {
            n: Mor(n, m.dst, m.src) for n, m in self.mors.items()
        }
        comp = {(g, f): h for (f, g), h in self.comp.items()}
        return FinCat(f"op({self.name})", self.objects, mors, self.identity, comp)

    @staticmethod
    def product(c1: "FinCat", c2: "FinCat") -> "FinCat":
        objects = [(a, b) for a in c1.objects for b in c2.objects]
        mors = {}
        for f in c1.mor_names():
            for g in c2.mor_names():
                mf, mg = c1.mor(f), c2.mor(g)
                mors[(f, g)] = Mor((f, g), (mf.src, mg.src), (mf.dst, mg.dst))
        identity = {
            (a, b): (c1.identity[a], c2.identity[b]) for a in c1.objects for b in c2.objects
        }
        comp = {}
        for (f1, g1), m1 in mors.items():
            for (f2, g2), m2 in mors.items():
                if m1.dst != m2.src:
                    continue
                comp[((f1, g1), (f2, g2))] = (
                    c1.compose(f1, f2),
                    c2.compose(g1, g2),
                )
        return FinCat(f"prod({c1.name},{c2.name})", objects, mors, identity, comp)

    @staticmethod
    def unit() -> "FinCat":
        m = Mor("id_*", "*", "*")
        return FinCat("unit", ("*",), {"id_*": m}, {"*": "id_*"}, {})


# ---------------------------------------------------------------------------
# Atom and functor interpretations


class AtomInterp:
    """A dipresheaf table: values per object tuple, action per morphism tuple.

    Slots are ``(base category name, polarity)``.  The action for a tuple
    of morphisms maps the value set at the source tuple (where NEG slots
    sit at the morphism's codomain) to the one at the destination tuple.
    """

    def __init__(self, name, slots, table, action):
        self.name = name
        self.slots: tuple[tuple[str, Polarity], ...] = tuple(slots)
        self.table: dict[tuple, tuple] = {k: canon_sort(v) for k, v in table.items()}
        self.action: dict[tuple, dict] = dict(action)

    def src_dst(self, mors: tuple[Mor, ...]) -> tuple[tuple, tuple]:
        src = tuple(
            m.dst if pol is NEG else m.src for m, (_, pol) in zip(mors, self.slots)
        )
        dst = tuple(
            m.src if pol is NEG else m.dst for m, (_, pol) in zip(mors, self.slots)
        )
        return src, dst

    def at(self, objs: tuple) -> tuple:
        if objs not in self.table:
            raise EvalError(f"atom {self.name}: no value at {objs}")
        return self.table[objs]

    def act(self, mors: tuple[Mor, ...]):
        if not mors:
            return lambda x: x
        key = tuple(m.name for m in mors)
        if key not in self.action:
            raise EvalError(f"atom {self.name}: no action for {key}")
        return lambda x, _t=self.action[key]: _t[x]

    def validate(self, model: "Model") -> None:
        cats = [model.base_cat(c) for c, _ in self.slots]
        for objs in itertools.product(*(c.objects for c in cats)):
            if objs not in self.table:
                raise ModelError(f"atom {self.name}: missing value at {objs}")
        for mors in itertools.product(*(
            [c.mor(n) for n in c.mor_names()] for c in cats
        )):
            src, dst = self.src_dst(mors)
            fn = self.act(mors)
            for v in self.table[src]:
                out = fn(v)
                if out not in self.table[dst]:
                    raise ModelError(
                        f"atom {self.name}: action {tuple(m.name for m in mors)} "
                        f"sends {v} outside the target set"
                    )
        # identity preservation
        for objs in itertools.product(*(c.objects for c in cats)):
            ids = tuple(c.id_mor(o) for c, o in zip(cats, objs))
            fn = self.act(ids)
            for v in self.table[objs]:
                if fn(v) != v:
                    raise ModelError(f"atom {self.name}: identity action moves {v}")
        # functoriality on composable pairs
        for mors1 in itertools.product(*(
            [c.mor(n) for n in c.mor_names()] for c in cats
        )):
            _, mid = self.src_dst(mors1)
            for mors2 in itertools.product(*(
                [c.mor(n) for n in c.mor_names()] for c in cats
            )):
                src2, _ = self.src_dst(mors2)
                if src2 != mid:
                    continue
                comp = []
                ok = True
                for m1, m2, (cname, pol) in zip(mors1, mors2, self.slots):
                    c = model.base_cat(cname)
                    if pol is NEG:
                        if m2.dst != m1.src:
                            ok = False
                            break
                        comp.append(c.mor(c.compose(m2.name, m1.name)))
                    else:
                        if m1.dst != m2.src:
                            ok = False
                            break
                        comp.append(c.mor(c.compose(m1.name, m2.name)))
                if not ok:
                    continue
                f1, f2, fc = self.act(mors1), self.act(mors2), self.act(tuple(comp))
                src1, _ = self.src_dst(mors1)
                for v in self.table[src1]:
                    if f2(f1(v)) != fc(v):
                        raise ModelError(
                            f"atom {self.name}: functoriality fails on "
                            f"{tuple(m.name for m in mors1)} then "
                            f"{tuple(m.name for m in mors2)}"
                        )


class FunctorInterp:
    def __init__(self, name, dom, cod, obj_map, mor_map):
        self.name = name
        self.dom = dom
        self.cod = cod
        self.obj_map: dict = dict(obj_map)
        self.mor_map: dict = dict(mor_map)

    def apply_obj(self, o):
        if o not in self.obj_map:
            raise EvalError(f"functor {self.name}: no image for object {o}")
        return self.obj_map[o]

    def apply_mor(self, m: Mor, cod_cat: FinCat) -> Mor:
        if m.name not in self.mor_map:
            raise EvalError(f"functor {self.name}: no image for morphism {m.name}")
        return cod_cat.mor(self.mor_map[m.name])

    def validate(self, model: "Model") -> None:
        dom, cod = model.base_cat(self.dom), model.base_cat(self.cod)
        for o in dom.objects:
            if self.apply_obj(o) not in cod.objects:
                raise ModelError(f"functor {self.name}: bad object image for {o}")
        for n in dom.mor_names():
            m = dom.mor(n)
            img = self.apply_mor(m, cod)
            if img.src != self.apply_obj(m.src) or img.dst != self.apply_obj(m.dst):
                raise ModelError(f"functor {self.name}: image of {n} has wrong endpoints")
        for o in dom.objects:
            if self.mor_map[dom.identity[o]] != cod.identity[self.apply_obj(o)]:
                raise ModelError(f"functor {self.name}: does not preserve id_{o}")
        for f in dom.mor_names():
            for g in dom.mor_names():
                mf, mg = dom.mor(f), dom.mor(g)
                if mf.dst != mg.src:
                    continue
                lhs = self.mor_map[dom.compose(f, g)]
                rhs = cod.compose(self.mor_map[f], self.mor_map[g])
                if lhs != rhs:
                    raise ModelError(
                        f"functor {self.name}: does not preserve {f};{g}"
                    )


class Model:
    def __init__(self, name, cats, atoms=None, functors=None):
        self.name = name
        self.cats: dict[str, FinCat] = dict(cats)
        self.atoms: dict[str, AtomInterp] = dict(atoms or {})
        self.functors: dict[str, FunctorInterp] = dict(functors or {})
        self._cat_cache: dict[CatExpr, FinCat] = {}

    def base_cat(self, name: str) -> FinCat:
        if name not in self.cats:
            raise EvalError(f"model {self.name}: unknown base category {name}")
        return self.cats[name]

    def category_of(self, e: CatExpr) -> FinCat:
        e = normalize(e)
        if e in self._cat_cache:
            return self._cat_cache[e]
        match e:
            case CBase(n):
                c = self.base_cat(n)
            case COp(inner):
                c = self.category_of(inner).op()
            case CProd(l, r):
                c = FinCat.product(self.category_of(l), self.category_of(r))
            case CUnit():
                c = FinCat.unit()
            case _:
                raise EvalError(f"cannot interpret category {e!r}")
        self._cat_cache[e] = c
        return c

    def atom(self, name: str) -> AtomInterp:
        if name not in self.atoms:
            raise EvalError(f"model {self.name}: atom {name!r} has no interpretation")
        return self.atoms[name]

    def functor(self, name: str) -> FunctorInterp:
        if name not in self.functors:
            raise EvalError(f"model {self.name}: functor {name!r} has no interpretation")
        return self.functors[name]

    def validate(self) -> None:
        for c in self.cats.values():
            c.validate()
        for a in self.atoms.values():
            a.validate(self)
        for f in self.functors.values():
            f.validate(self)


# ---------------------------------------------------------------------------
# Formula evaluation

Assign = dict  # var -> (neg_obj, pos_obj)
MorAssign = dict  # var -> (Mor | None, Mor | None)


def swap_assign(sigma: Assign) -> Assign:
    return {v: (p, n) for v, (n, p) in sigma.items()}


def swap_mors(mu: MorAssign) -> MorAssign:
    return {v: (p, n) for v, (n, p) in mu.items()}


class Evaluator:
    """Evaluates formulas and derivations in one model.

    Evaluation is memoized per (formula, relevant assignment); coend
    quotients additionally memoize their member-to-class maps so that
    transports can relocate elements into classes cheaply.
    """

    def __init__(self, model: Model, sig: SignatureTable, max_set_size: int | None = None,
                 assumptions: dict | None = None):
        self.model = model
        self.sig = sig
        self.max_set_size = max_set_size or max_set_size_default()
        self.assumptions = assumptions or {}
        self._eval_cache: dict = {}
        self._coend_cache: dict = {}

    # -- helpers

    def _key(self, f: Formula, ctx: dict, sigma: Assign):
        fv = free_vars(f)
        return (f, tuple(sorted((v, sigma[v]) for v in fv)))

    def guard(self, n: int, what: str) -> None:
        if n > self.max_set_size:
            raise EnumerationBound(n, self.max_set_size, what)

    def term_obj(self, t: TermExpr, sigma: Assign):
        """Object denoted by a term; NEG variables read the negative component."""
        match t:
            case TVar(name, pol):
                if name not in sigma:
                    raise EvalError(f"unassigned variable {name}")
                n, p = sigma[name]
                return n if pol is NEG else p
            case TApp(f, a):
                return self.model.functor(f).apply_obj(self.term_obj(a, sigma))
            case TPair(l, r):
                return (self.term_obj(l, sigma), self.term_obj(r, sigma))
            case TFst(a):
                return self.term_obj(a, sigma)[0]
            case TSnd(a):
                return self.term_obj(a, sigma)[1]
        raise TypeError(f"not a TermExpr: {t!r}")

    def term_mor(self, t: TermExpr, mu: MorAssign) -> Mor:
        """Morphism action of a term.

        For a POS-polarity term the result runs old -> new, for a NEG one
        new -> old; missing morphism components are a soundness bug.
        """
        match t:
            case TVar(name, pol):
                n, p = mu.get(name, (None, None))
                m = n if pol is NEG else p
                if m is None:
                    raise SoundnessBug(
                        f"transport needs the {'negative' if pol is NEG else 'positive'}"
                        f" side of {name}, which is unavailable"
                    )
                return m
            case TApp(f, a):
                fi = self.model.functor(f)
                _, cod = self.sig.functor_sig(f)
                inner = self.term_mor(a, mu)
                return fi.apply_mor(inner, self.model.category_of(cod))
            case TPair(l, r):
                ml = self.term_mor(l, mu)
                mr = self.term_mor(r, mu)
                return Mor((ml.name, mr.name), (ml.src, mr.src), (ml.dst, mr.dst))
            case TFst(a):
                m = self.term_mor(a, mu)
                return Mor(m.name[0], m.src[0], m.dst[0])
            case TSnd(a):
                m = self.term_mor(a, mu)
                return Mor(m.name[1], m.src[1], m.dst[1])
        raise TypeError(f"not a TermExpr: {t!r}")

    # -- evaluation

    def eval(self, f: Formula, ctx: dict, sigma: Assign) -> tuple:
        """The value set at ``sigma``; ``ctx`` maps variables to categories."""
        key = self._key(f, ctx, sigma)
        if key in self._eval_cache:
            return self._eval_cache[key]
        match f:
            case FTop():
                out = ("*",)
            case FHom(cat, s, t):
                c = self.model.category_of(cat)
                out = c.hom(self.term_obj(s, sigma), self.term_obj(t, sigma))
            case FAtom(name, args):
                interp = self.model.atom(name)
                objs = tuple(self.term_obj(a, sigma) for a in args)
                out = interp.at(objs)
            case FAnd(l, r):
                lv = self.eval(l, ctx, sigma)
                rv = self.eval(r, ctx, sigma)
                self.guard(len(lv) * len(rv), "product")
                out = tuple(("pair", a, b) for a in lv for b in rv)
            case FImp(l, r):
                lv = self.eval(l, ctx, swap_assign(sigma))
                rv = self.eval(r, ctx, sigma)
                self.guard(len(rv) ** len(lv) if lv else 1, "function set")
                tables = itertools.product(rv, repeat=len(lv))
                out = tuple(("fn", tuple(zip(lv, tb))) for tb in tables)
            case FEnd(v, c, b):
                dp = self.body_dipresheaf(f, ctx, sigma)
                out, _ = compute_end(dp, self.max_set_size)
            case FCoend(v, c, b):
                out = self._coend(f, ctx, sigma)[0]
            case _:
                raise TypeError(f"not a Formula: {f!r}")
        out = canon_sort(out)
        self._eval_cache[key] = out
        return out

    def body_dipresheaf(self, f: Formula, ctx: dict, sigma: Assign) -> "BodyDipresheaf":
        """The one-variable dipresheaf obtained by focusing a binder's body."""
        assert isinstance(f, (FEnd, FCoend))
        cat = self.model.category_of(f.cat)
        inner_ctx = {**ctx, f.var: normalize(f.cat)}
        outer = {v: sigma[v] for v in free_vars(f) if v in sigma}
        return BodyDipresheaf(self, f.body, inner_ctx, outer, f.var, cat)

    def _coend(self, f: FCoend, ctx: dict, sigma: Assign):
        key = self._key(f, ctx, sigma)
        if key in self._coend_cache:
            return self._coend_cache[key]
        dp = self.body_dipresheaf(f, ctx, sigma)
        elements, class_of = compute_coend(dp, self.max_set_size)
        self._coend_cache[key] = (elements, class_of)
        return elements, class_of

    def apply_fn(self, fn, arg):
        assert fn[0] == "fn"
        for k, v in fn[1]:
            if k == arg:
                return v
        raise EvalError(f"function table has no entry for {arg!r}")

    # -- functorial action

    def act(self, f: Formula, ctx: dict, old: Assign, new: Assign, mu: MorAssign):
        """Transport function eval(f, old) -> eval(f, new)."""

        def go(x):
            return self._act_elem(f, ctx, old, new, mu, x)

        return go

    def _act_elem(self, f: Formula, ctx: dict, old: Assign, new: Assign, mu: MorAssign, x):
        match f:
            case FTop():
                return x
            case FHom(cat, s, t):
                c = self.model.category_of(cat)
                ms = self.term_mor(s, mu)  # s(new) -> s(old)
                mt = self.term_mor(t, mu)  # t(old) -> t(new)
                return c.compose(c.compose(ms.name, x), mt.name)
            case FAtom(name, args):
                interp = self.model.atom(name)
                mors = tuple(self.term_mor(a, mu) for a in args)
                return interp.act(mors)(x)
            case FAnd(l, r):
                return (
                    "pair",
                    self._act_elem(l, ctx, old, new, mu, x[1]),
                    self._act_elem(r, ctx, old, new, mu, x[2]),
                )
            case FImp(l, r):
                lv_new = self.eval(l, ctx, swap_assign(new))
                pull = self.act(l, ctx, swap_assign(new), swap_assign(old), swap_mors(mu))
                push = self.act(r, ctx, old, new, mu)
                return (
                    "fn",
                    tuple((u, push(self.apply_fn(x, pull(u)))) for u in lv_new),
                )
            case FEnd(v, c, b):
                cat = self.model.category_of(c)
                inner_ctx = {**ctx, v: normalize(c)}
                comps = []
                for cobj, u in x[1]:
                    ident = cat.id_mor(cobj)
                    comps.append((
                        cobj,
                        self._act_elem(
                            b, inner_ctx,
                            {**old, v: (cobj, cobj)},
                            {**new, v: (cobj, cobj)},
                            {**mu, v: (ident, ident)},
                            u,
                        ),
                    ))
                return ("wedge", tuple(comps))
            case FCoend(v, c, b):
                cat = self.model.category_of(c)
                inner_ctx = {**ctx, v: normalize(c)}
                _, cobj, u = x[1]
                ident = cat.id_mor(cobj)
                u2 = self._act_elem(
                    b, inner_ctx,
                    {**old, v: (cobj, cobj)},
                    {**new, v: (cobj, cobj)},
                    {**mu, v: (ident, ident)},
                    u,
                )
                _, class_of = self._coend(f, ctx, new)
                return class_of[("at", cobj, u2)]
        raise TypeError(f"not a Formula: {f!r}")


# ---------------------------------------------------------------------------
# Single-variable dipresheaves, ends and coends


class BodyDipresheaf:
    """A formula body focused on one bound variable, other parameters fixed."""

    def __init__(self, ev: Evaluator, body: Formula, ctx: dict, outer: Assign,
                 var: str, cat: FinCat):
        self.ev = ev
        self.body = body
        self.ctx = ctx
        self.outer = outer
        self.var = var
        self.cat = cat

    def at(self, neg, pos) -> tuple:
        return self.ev.eval(self.body, self.ctx, {**self.outer, self.var: (neg, pos)})

    def act(self, old: tuple, new: tuple, n: Mor | None, p: Mor | None):
        mu = {v: identity_pair(self.ev, self.ctx, v, objs)
              for v, objs in self.outer.items()}
        mu[self.var] = (n, p)
        return self.ev.act(
            self.body, self.ctx,
            {**self.outer, self.var: old},
            {**self.outer, self.var: new},
            mu,
        )


def identity_pair(ev: Evaluator, ctx: dict, var: str, objs: tuple):
    cat = ev.model.category_of(ctx[var])
    n, p = objs
    return (cat.id_mor(n), cat.id_mor(p))


class TableDipresheaf:
    """An explicit single-variable dipresheaf (tables, no formula behind it)."""

    def __init__(self, cat: FinCat, table: dict, action):
        self.cat = cat
        self.table = {k: canon_sort(v) for k, v in table.items()}
        self.action = action  # (Mor n, Mor p) -> elem map

    def at(self, neg, pos) -> tuple:
        return self.table[(neg, pos)]

    def act(self, old, new, n: Mor | None, p: Mor | None):
        if n is None:
            n = self.cat.id_mor(old[0])
        if p is None:
            p = self.cat.id_mor(old[1])
        return self.action(n, p)


def compute_end(dp, max_size: int | None = None) -> tuple[tuple, dict]:
    """The end of a one-variable dipresheaf as an equalizer of products.

    Returns the canonical wedge set and the projection family
    ``obj -> (wedge -> element)``; wedges are tuples sorted by object.
    """
    max_size = max_size or max_set_size_default()
    cat = dp.cat
    diag = {c: dp.at(c, c) for c in cat.objects}
    total = 1
    for c in cat.objects:
        total *= len(diag[c])
        if total > max_size:
            raise EnumerationBound(total, max_size, "end product")
    out = []
    for combo in itertools.product(*(diag[c] for c in cat.objects)):
        t = dict(zip(cat.objects, combo))
        ok = True
        for m in cat.nonid_mors():
            a, b = m.src, m.dst
            ida, idb = cat.id_mor(a), cat.id_mor(b)
            lhs = dp.act((b, b), (a, b), m, idb)(t[b])
            rhs = dp.act((a, a), (a, b), ida, m)(t[a])
            if lhs != rhs:
                ok = False
                break
        if ok:
            out.append(("wedge", tuple(sorted(t.items(), key=lambda kv: canon_key(kv[0])))))
    elements = canon_sort(out)
    proj = {
        c: {w: dict(w[1])[c] for w in elements} for c in cat.objects
    }
    return elements, proj


class UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def add(self, x) -> None:
        self.parent.setdefault(x, x)

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:  # path compression
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x, y) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.parent[ry] = rx


def compute_coend(dp, max_size: int | None = None) -> tuple[tuple, dict]:
    """The coend as a coequalizer of the coproduct, via union-find.

    Returns the canonical class set and the member-to-class map; a class
    is represented by its least member in the global canonical order.
    """
    max_size = max_size or max_set_size_default()
    cat = dp.cat
    uf = UnionFind()
    members = []
    for c in cat.objects:
        for u in dp.at(c, c):
            m = ("at", c, u)
            uf.add(m)
            members.append(m)
    if len(members) > max_size:
        raise EnumerationBound(len(members), max_size, "coend coproduct")
    for m in cat.nonid_mors():
        a, b = m.src, m.dst
        ida, idb = cat.id_mor(a), cat.id_mor(b)
        for u in dp.at(b, a):
            left = dp.act((b, a), (a, a), m, ida)(u)
            right = dp.act((b, a), (b, b), idb, m)(u)
            uf.union(("at", a, left), ("at", b, right))
    groups: dict = {}
    for m in members:
        groups.setdefault(uf.find(m), []).append(m)
    class_of = {}
    elements = []
    for g in groups.values():
        rep = min(g, key=canon_key)
        cls = ("cls", rep)
        elements.append(cls)
        for m in g:
            class_of[m] = cls
    return canon_sort(elements), class_of


def coend_injections(dp, max_size: int | None = None) -> dict:
    """The cowedge ``obj -> (element -> class)`` into the coend."""
    _, class_of = compute_coend(dp, max_size)
    return {
        c: {u: class_of[("at", c, u)] for u in dp.at(c, c)}
        for c in dp.cat.objects
    }


# ---------------------------------------------------------------------------
# Sequent semantics and dinatural families


class SeqSem:
    """Semantic view of a sequent: indexed hypothesis and goal sets."""

    def __init__(self, ev: Evaluator, seq: Sequent):
        self.ev = ev
        self.seq = seq
        self.ctx = [(v, ev.model.category_of(c)) for v, c in seq.ctx]
        self.ctx_types = {v: normalize(c) for v, c in seq.ctx}

    def indices(self) -> list[tuple]:
        return list(itertools.product(*(c.objects for _, c in self.ctx)))

    def sigma(self, idx: tuple, mixed: dict | None = None) -> Assign:
        sigma = {v: (o, o) for (v, _), o in zip(self.ctx, idx)}
        if mixed:
            sigma.update(mixed)
        return sigma

    def hyp_sets(self, sigma: Assign) -> list[tuple]:
        return [self.ev.eval(f, self.ctx_types, sigma) for _, f in self.seq.hyps]

    def inputs(self, sigma: Assign) -> list[tuple]:
        sets = self.hyp_sets(sigma)
        n = 1
        for s in sets:
            n *= len(s)
        self.ev.guard(n, "hypothesis product")
        return [tuple(combo) for combo in itertools.product(*sets)]

    def goal_set(self, sigma: Assign) -> tuple:
        return self.ev.eval(self.seq.goal, self.ctx_types, sigma)

    def hyps_act(self, old: Assign, new: Assign, mu: MorAssign):
        fns = [self.ev.act(f, self.ctx_types, old, new, mu) for _, f in self.seq.hyps]
        return lambda xs: tuple(fn(x) for fn, x in zip(fns, xs))

    def goal_act(self, old: Assign, new: Assign, mu: MorAssign):
        return self.ev.act(self.seq.goal, self.ctx_types, old, new, mu)

    def identity_mu(self, sigma: Assign) -> MorAssign:
        return {
            v: (cat.id_mor(sigma[v][0]), cat.id_mor(sigma[v][1]))
            for v, cat in self.ctx
        }


@dataclass
class Family:
    """A candidate dinatural family for a sequent: per-index function tables."""

    seq: Sequent
    table: dict = field(default_factory=dict)  # idx -> {inputs -> output}

    def at(self, idx: tuple):
        return self.table[idx]

    def __call__(self, idx: tuple, inputs: tuple):
        return self.table[idx][inputs]


def families_equal(f1: Family, f2: Family) -> bool:
    if f1.seq.ctx != f2.seq.ctx:
        raise EvalError("families indexed by different contexts")
    if set(f1.table.keys()) != set(f2.table.keys()):
        raise EvalError("families with different index sets")
    for idx, tab in f1.table.items():
        other = f2.table[idx]
        if set(tab.keys()) != set(other.keys()):
            raise EvalError(f"families with different inputs at {idx}")
        for k, v in tab.items():
            if other[k] != v:
                return False
    return True


def check_dinatural(ss: SeqSem, fam: Family, explain: bool = False):
    """Hexagon of Def: both transports around every morphism agree.

    Only generating morphisms are checked; composites follow from the
    functoriality of the action tables, validated at model load.
    """
    for vi, (var, cat) in enumerate(ss.ctx):
        others = [c.objects for j, (_, c) in enumerate(ss.ctx) if j != vi]
        for m in cat.nonid_mors():
            a, b = m.src, m.dst
            ida, idb = cat.id_mor(a), cat.id_mor(b)
            for rest in itertools.product(*others):
                def mk_idx(o):
                    out = list(rest)
                    out.insert(vi, o)
                    return tuple(out)

                idx_a, idx_b = mk_idx(a), mk_idx(b)
                sig_mix = ss.sigma(idx_a, {var: (b, a)})
                sig_aa = ss.sigma(idx_a)
                sig_bb = ss.sigma(idx_b)
                sig_ab = ss.sigma(idx_a, {var: (a, b)})
                id_mu = ss.identity_mu(sig_mix)
                up_h = ss.hyps_act(sig_mix, sig_bb, {**id_mu, var: (idb, m)})
                up_g = ss.goal_act(sig_bb, sig_ab, {**id_mu, var: (m, idb)})
                dn_h = ss.hyps_act(sig_mix, sig_aa, {**id_mu, var: (m, ida)})
                dn_g = ss.goal_act(sig_aa, sig_ab, {**id_mu, var: (ida, m)})
                for u in ss.inputs(sig_mix):
                    lhs = up_g(fam(idx_b, up_h(u)))
                    rhs = dn_g(fam(idx_a, dn_h(u)))
                    if lhs != rhs:
                        if explain:
                            return (var, m.name, rest, u, lhs, rhs)
                        return False
    return None if explain else True


def enumerate_dinaturals(ss: SeqSem, bound: int | None = None) -> list[Family]:
    """All hexagon-passing families, in canonical order.

    The candidate space is the full product of function sets; the bound
    rejects the enumeration up front, reporting the required count.
    """
    bound = bound or 200_000
    idxs = ss.indices()
    per_index = []
    total = 1
    for idx in idxs:
        sigma = ss.sigma(idx)
        ins = ss.inputs(sigma)
        outs = ss.goal_set(sigma)
        count = len(outs) ** len(ins)
        total *= max(count, 1)
        if total > bound:
            raise EnumerationBound(total, bound, "dinatural enumeration")
        if count == 0 and len(ins) > 0:
            return []
        per_index.append([dict(zip(ins, combo))
                          for combo in itertools.product(outs, repeat=len(ins))])
    out = []
    for combo in itertools.product(*per_index):
        fam = Family(ss.seq, dict(zip(idxs, combo)))
        if check_dinatural(ss, fam):
            out.append(fam)
    return out


def compose_families(f1: Family, f2: Family) -> Family:
    """Pointwise composite: feed f1's output as the single input of f2.

    f2 must have exactly one hypothesis, whose formula matches f1's goal.
    There is no cut rule in the kernel; composites built here are semantic
    candidates and must be hexagon-checked by the caller.
    """
    table = {}
    for idx, tab in f1.table.items():
        table[idx] = {ins: f2(idx, (out,)) for ins, out in tab.items()}
    return Family(Sequent(f1.seq.ctx, f1.seq.hyps, f2.seq.goal), table)


def identity_family(ss: SeqSem) -> Family:
    """The identity on a single-hypothesis sequent whose hyp equals the goal."""
    table = {}
    for idx in ss.indices():
        sigma = ss.sigma(idx)
        table[idx] = {(u,): u for (u,) in ss.inputs(sigma)}
    return Family(ss.seq, table)


# ---------------------------------------------------------------------------
# Derivation evaluation

from . import kernel as K  # noqa: E402  (kernel has no semantic imports)


def eval_derivation(d: "K.Derivation", model: Model, sig: SignatureTable,
                    assumptions: dict | None = None,
                    max_set_size: int | None = None,
                    check: bool = True) -> Family:
    """Evaluate a checked derivation to its dinatural family.

    The resulting family is hexagon-checked unless ``check`` is disabled;
    a failure here is a soundness bug in a rule's semantics and is raised,
    never ignored.
    """
    K.check_derivation(d, sig)
    ev = Evaluator(model, sig, max_set_size=max_set_size, assumptions=assumptions or {})
    fam = _eval_node(d, ev)
    if check:
        ss = SeqSem(ev, d.concl)
        witness = check_dinatural(ss, fam, explain=True)
        if witness is not None:
            raise SoundnessBug(
                f"evaluated family for {d.rule_name()} fails the hexagon: {witness}"
            )
    return fam


def _diag(idx: tuple, names: list) -> Assign:
    return {v: (o, o) for v, o in zip(names, idx)}


def _ins(t: tuple, pos: int, x) -> tuple:
    return t[:pos] + (x,) + t[pos:]


def _del(t: tuple, pos: int) -> tuple:
    return t[:pos] + t[pos + 1:]


def _eval_node(d: "K.Derivation", ev: Evaluator) -> Family:
    if isinstance(d, K.MACRO_TYPES):
        inner = _eval_node(K.expand_macro(d), ev)
        return Family(d.concl, inner.table)
    seq = d.concl
    ss = SeqSem(ev, seq)
    names = [v for v, _ in seq.ctx]
    table: dict = {}

    match d:
        case K.Id():
            for idx in ss.indices():
                table[idx] = {u: u[0] for u in ss.inputs(ss.sigma(idx))}
        case K.TopIntro():
            for idx in ss.indices():
                table[idx] = {u: "*" for u in ss.inputs(ss.sigma(idx))}
        case K.Refl(var=v):
            cat = dict(ss.ctx)[v]
            vi = seq.ctx_index(v)
            for idx in ss.indices():
                table[idx] = {(): cat.identity[idx[vi]]}
        case K.Assume(key=key):
            if key not in ev.assumptions:
                raise EvalError(f"no family supplied for assumption {key!r}")
            src = ev.assumptions[key]
            return Family(seq, src.table if isinstance(src, Family) else src)
        case K.Pair(left=l, right=r):
            fl, fr = _eval_node(l, ev), _eval_node(r, ev)
            for idx in ss.indices():
                table[idx] = {
                    u: ("pair", fl(idx, u), fr(idx, u))
                    for u in ss.inputs(ss.sigma(idx))
                }
        case K.Proj1(sub=s) | K.Proj2(sub=s):
            fs = _eval_node(s, ev)
            pick = 1 if isinstance(d, K.Proj1) else 2
            for idx in ss.indices():
                table[idx] = {u: fs(idx, u)[pick] for u in ss.inputs(ss.sigma(idx))}
        case K.Weaken(sub=s, pos=pos):
            fs = _eval_node(s, ev)
            for idx in ss.indices():
                table[idx] = {u: fs(idx, _del(u, pos)) for u in ss.inputs(ss.sigma(idx))}
        case K.CtxWeaken(sub=s, pos=pos):
            fs = _eval_node(s, ev)
            for idx in ss.indices():
                table[idx] = {
                    u: fs(_del(idx, pos), u) for u in ss.inputs(ss.sigma(idx))
                }
        case K.Curry(sub=s, label=lb):
            fs = _eval_node(s, ev)
            i = s.concl.hyp_index(lb)
            domf = s.concl.hyp(lb)
            ctx_types = {v: c for v, c in s.concl.ctx}
            for idx in ss.indices():
                sigma = _diag(idx, names)
                dom = ev.eval(domf, ctx_types, sigma)
                table[idx] = {
                    u: ("fn", tuple((x, fs(idx, _ins(u, i, x))) for x in dom))
                    for u in ss.inputs(sigma)
                }
        case K.Uncurry(sub=s, pos=pos):
            fs = _eval_node(s, ev)
            for idx in ss.indices():
                table[idx] = {
                    u: ev.apply_fn(fs(idx, _del(u, pos)), u[pos])
                    for u in ss.inputs(ss.sigma(idx))
                }
        case K.Reindex(sub=s, functor=fn, newvar=nv):
            fs = _eval_node(s, ev)
            fi = ev.model.functor(fn)
            i = seq.ctx_index(nv)
            for idx in ss.indices():
                sub_idx = idx[:i] + (fi.apply_obj(idx[i]),) + idx[i + 1:]
                table[idx] = {u: fs(sub_idx, u) for u in ss.inputs(ss.sigma(idx))}
        case K.J(sub=s, source=a, target=b, eq=e):
            fs = _eval_node(s, ev)
            ia, ib, ie = seq.ctx_index(a), seq.ctx_index(b), seq.hyp_index(e)
            cat = ev.model.category_of(seq.ctx_cat(a))
            sub_names = [v for v, _ in s.concl.ctx]
            for idx in ss.indices():
                alpha, beta = idx[ia], idx[ib]
                sub_idx = tuple(
                    beta if j == ia else o
                    for j, o in enumerate(idx) if j != ib
                )
                assert len(sub_idx) == len(sub_names)
                out = {}
                for u in ss.inputs(ss.sigma(idx)):
                    m = cat.mor(u[ie])
                    out[u] = _j_value(ev, ss, seq, idx, u, m, a, b, ie, fs, sub_idx)
                table[idx] = out
        case K.JInv(sub=s, source=a, target=b, fresh=z, eq=e):
            fs = _eval_node(s, ev)
            sub_seq = s.concl
            ia, ib, ie = (
                sub_seq.ctx_index(a), sub_seq.ctx_index(b), sub_seq.hyp_index(e)
            )
            iz = seq.ctx_index(z)
            cat = ev.model.category_of(seq.ctx_cat(z))
            for idx in ss.indices():
                zeta = idx[iz]
                sub_idx = _ins(idx, ib, zeta)  # source already sits at z's slot
                out = {}
                for u in ss.inputs(ss.sigma(idx)):
                    out[u] = fs(sub_idx, _ins(u, ie, cat.identity[zeta]))
                table[idx] = out
        case K.JWithEq(main=mn, eq_deriv=ed, source=a, target=b):
            fm = _eval_node(mn, ev)
            fe = _eval_node(ed, ev)
            ia, ib = seq.ctx_index(a), seq.ctx_index(b)
            cat = ev.model.category_of(seq.ctx_cat(a))
            for idx in ss.indices():
                alpha, beta = idx[ia], idx[ib]
                sub_idx = tuple(
                    beta if j == ia else o
                    for j, o in enumerate(idx) if j != ib
                )
                out = {}
                for u in ss.inputs(ss.sigma(idx)):
                    m = cat.mor(fe(idx, u))
                    out[u] = _j_value(ev, ss, seq, idx, u, m, a, b, None, fm, sub_idx)
                table[idx] = out
        case K.EndIntro(sub=s, var=v):
            fs = _eval_node(s, ev)
            iv = s.concl.ctx_index(v)
            cat = ev.model.category_of(s.concl.ctx_cat(v))
            for idx in ss.indices():
                out = {}
                for u in ss.inputs(ss.sigma(idx)):
                    comps = tuple(
                        sorted(
                            ((c, fs(_ins(idx, iv, c), u)) for c in cat.objects),
                            key=lambda kv: canon_key(kv[0]),
                        )
                    )
                    out[u] = ("wedge", comps)
                table[idx] = out
        case K.EndElim(sub=s, pos=pos):
            fs = _eval_node(s, ev)
            for idx in ss.indices():
                c = idx[pos]
                sub_idx = _del(idx, pos)
                table[idx] = {
                    u: dict(fs(sub_idx, u)[1])[c] for u in ss.inputs(ss.sigma(idx))
                }
        case K.CoendIntro(sub=s, var=v, label=lb):
            fs = _eval_node(s, ev)
            iv = s.concl.ctx_index(v)
            il = seq.hyp_index(lb)
            for idx in ss.indices():
                out = {}
                for u in ss.inputs(ss.sigma(idx)):
                    _, (_, c, elem) = u[il][0], u[il][1]
                    sub_idx = _ins(idx, iv, c)
                    sub_u = u[:il] + (elem,) + u[il + 1:]
                    out[u] = fs(sub_idx, sub_u)
                table[idx] = out
        case K.CoendElim(sub=s, var=v, label=lb, pos=pos):
            fs = _eval_node(s, ev)
            il = seq.hyp_index(lb)
            coendf = s.concl.hyp(lb)
            ctx_types = {w: c for w, c in s.concl.ctx}
            for idx in ss.indices():
                c = idx[pos]
                sub_idx = _del(idx, pos)
                sub_sigma = _diag(sub_idx, [w for w, _ in s.concl.ctx])
                _, class_of = ev._coend(coendf, ctx_types, sub_sigma)
                table[idx] = {
                    u: fs(sub_idx, u[:il] + (class_of[("at", c, u[il])],) + u[il + 1:])
                    for u in ss.inputs(ss.sigma(idx))
                }
        case K.ImpFunc(contra=cp, cova=cq):
            fp = _eval_node(cp, ev)
            fq = _eval_node(cq, ev)
            domf = cp.concl.hyps[0][1]  # P' in the conclusion goal Imp(P', Q')
            ctx_types = {w: c for w, c in seq.ctx}
            for idx in ss.indices():
                sigma = _diag(idx, names)
                dom = ev.eval(domf, ctx_types, sigma)
                table[idx] = {
                    (phi,): (
                        "fn",
                        tuple(
                            (x, fq(idx, (ev.apply_fn(phi, fp(idx, (x,))),)))
                            for x in dom
                        ),
                    )
                    for (phi,) in ss.inputs(sigma)
                }
        case K.Exchange(sub=s, pos=pos):
            fs = _eval_node(s, ev)
            for idx in ss.indices():
                sub_idx = list(idx)
                sub_idx[pos], sub_idx[pos + 1] = sub_idx[pos + 1], sub_idx[pos]
                table[idx] = {
                    u: fs(tuple(sub_idx), u) for u in ss.inputs(ss.sigma(idx))
                }
        case K.ExchangeHyps(sub=s, pos=pos):
            fs = _eval_node(s, ev)
            for idx in ss.indices():
                table[idx] = {
                    u: fs(idx, u[:pos] + (u[pos + 1], u[pos]) + u[pos + 2:])
                    for u in ss.inputs(ss.sigma(idx))
                }
        case K.PairCtx(sub=s, x=x):
            fs = _eval_node(s, ev)
            i = s.concl.ctx_index(x)
            for idx in ss.indices():
                a, b = idx[i]
                sub_idx = idx[:i] + (a, b) + idx[i + 1:]
                table[idx] = {u: fs(sub_idx, u) for u in ss.inputs(ss.sigma(idx))}
        case K.UnpairCtx(sub=s, x=x):
            fs = _eval_node(s, ev)
            i = seq.ctx_index(x)
            for idx in ss.indices():
                sub_idx = idx[:i] + ((idx[i], idx[i + 1]),) + idx[i + 2:]
                table[idx] = {u: fs(sub_idx, u) for u in ss.inputs(ss.sigma(idx))}
        case K.SplitAnd(sub=s, left=l1):
            fs = _eval_node(s, ev)
            i = seq.hyp_index(l1)
            for idx in ss.indices():
                table[idx] = {
                    u: fs(idx, u[:i] + (("pair", u[i], u[i + 1]),) + u[i + 2:])
                    for u in ss.inputs(ss.sigma(idx))
                }
        case K.JoinAnd(sub=s, label=lb):
            fs = _eval_node(s, ev)
            i = seq.hyp_index(lb)
            for idx in ss.indices():
                table[idx] = {
                    u: fs(idx, u[:i] + (u[i][1], u[i][2]) + u[i + 1:])
                    for u in ss.inputs(ss.sigma(idx))
                }
        case K.OpRelabel(sub=s):
            return Family(seq, _eval_node(s, ev).table)
        case _:
            raise EvalError(f"no semantics for node {d.rule_name()}")
    return Family(seq, table)


def _j_value(ev: Evaluator, ss: SeqSem, seq, idx, u, m: Mor, a: str, b: str,
             ie: int | None, sub_fam: Family, sub_idx: tuple):
    """The eliminator's semantics: transport the context forward along the
    equality, evaluate on the diagonal, transport the goal back."""
    names = [v for v, _ in seq.ctx]
    ctx_types = {v: c for v, c in seq.ctx}
    ia, ib = seq.ctx_index(a), seq.ctx_index(b)
    alpha, beta = idx[ia], idx[ib]
    sigma_diag = _diag(idx, names)
    sigma_mid = {**sigma_diag, a: (beta, beta)}
    id_mu = {
        v: identity_pair(ev, ctx_types, v, sigma_diag[v])
        for v in sigma_diag
    }
    fwd_mu = {**id_mu, a: (None, m)}
    back_mu = {**id_mu, a: (m, None)}
    sub_u = []
    for j, (lb, f) in enumerate(seq.hyps):
        if ie is not None and j == ie:
            continue
        sub_u.append(ev.act(f, ctx_types, sigma_diag, sigma_mid, fwd_mu)(u[j]))
    r = sub_fam(sub_idx, tuple(sub_u))
    return ev.act(seq.goal, ctx_types, sigma_mid, sigma_diag, back_mu)(r)


def eval_eq_obligation(j: "K.EqJudgement", model: Model, sig: SignatureTable,
                       assumptions: dict | None = None) -> bool:
    """Discharge an equality judgement extensionally on one model."""
    f1 = eval_derivation(j.left, model, sig, assumptions=assumptions)
    f2 = eval_derivation(j.right, model, sig, assumptions=assumptions)
    return families_equal(f1, f2)


def search_composition_failure(model: Model, sig: SignatureTable,
                               atom_names: list[str], var_cat: CatExpr,
                               bound: int = 4000):
    """Look for dinaturals whose pointwise composite breaks the hexagon.

    Scans ordered pairs over the given one-variable atoms: enumerate the
    families P -> Q and Q -> R, compose pointwise, hexagon-check.  Returns
    the first witness (P, Q, R, f1, f2, composite) or None.
    """
    ev = Evaluator(model, sig)

    def one_var_seq(p: str, q: str) -> Sequent:
        slots = sig.atom_slots(p)
        args_p = _diag_args(slots)
        args_q = _diag_args(sig.atom_slots(q))
        return Sequent(
            (("x", var_cat),),
            (("h", FAtom(p, args_p)),),
            FAtom(q, args_q),
        )

    for p, q, r in itertools.product(atom_names, repeat=3):
        try:
            sp = one_var_seq(p, q)
            sq = one_var_seq(q, r)
            fams1 = enumerate_dinaturals(SeqSem(ev, sp), bound)
            fams2 = enumerate_dinaturals(SeqSem(ev, sq), bound)
        except EnumerationBound:
            continue
        sc = Sequent(sp.ctx, sp.hyps, sq.goal)
        ssc = SeqSem(ev, sc)
        for f1 in fams1:
            for f2 in fams2:
                comp = compose_families(f1, f2)
                comp = Family(sc, comp.table)
                if not check_dinatural(ssc, comp):
                    return (p, q, r, f1, f2, comp)
    return None


def _diag_args(slots) -> tuple:
    return tuple(TVar("x", pol) for _, pol in slots)


# ---------------------------------------------------------------------------
# Quantifier/reindexing interaction checks


def beck_chevalley_end(model: Model, sig: SignatureTable, atom: str,
                       functor: str, bound_cat: CatExpr, var_cat: CatExpr,
                       reindexed_cat: CatExpr) -> bool:
    """Ends commute with reindexing along a term, strictly.

    The atom has slots over (bound_cat, var_cat); the functor runs
    reindexed_cat -> var_cat.  One side substitutes first and computes the
    end; the other computes the end as a dipresheaf over the original
    variable and reindexes the resulting tables.  Canonical sets and full
    action tables must agree as structures, not merely up to bijection.
    """
    ev = Evaluator(model, sig)
    fi = model.functor(functor)
    cat_x = model.category_of(reindexed_cat)
    cat_y = model.category_of(var_cat)

    # atom slots: (bound-, bound+, var-, var+) in order
    a_args = (TVar("a", NEG), TVar("a", POS))
    f_of = lambda pol: TApp(functor, TVar("x", pol))
    sub_formula = FEnd("a", bound_cat, FAtom(atom, a_args + (f_of(NEG), f_of(POS))))
    plain_formula = FEnd("a", bound_cat,
                         FAtom(atom, a_args + (TVar("y", NEG), TVar("y", POS))))

    ctx_sub = {"x": normalize(reindexed_cat)}
    ctx_plain = {"y": normalize(var_cat)}

    points = [(n, p) for n in cat_x.objects for p in cat_x.objects]
    for (n, p) in points:
        lhs = ev.eval(sub_formula, ctx_sub, {"x": (n, p)})
        rhs = ev.eval(plain_formula, ctx_plain,
                      {"y": (fi.apply_obj(n), fi.apply_obj(p))})
        if lhs != rhs:
            return False
    for mn in cat_x.mor_names():
        for pn in cat_x.mor_names():
            m, q = cat_x.mor(mn), cat_x.mor(pn)
            old = (m.dst, q.src)
            new = (m.src, q.dst)
            act_l = ev.act(sub_formula, ctx_sub, {"x": old}, {"x": new},
                           {"x": (m, q)})
            fm = fi.apply_mor(m, cat_y)
            fq = fi.apply_mor(q, cat_y)
            act_r = ev.act(plain_formula, ctx_plain,
                           {"y": (fm.dst, fq.src)}, {"y": (fm.src, fq.dst)},
                           {"y": (fm, fq)})
            for u in ev.eval(sub_formula, ctx_sub, {"x": old}):
                if act_l(u) != act_r(u):
                    return False
    return True


def frobenius_coend(model: Model, sig: SignatureTable, factor: str,
                    body: str, bound_cat: CatExpr, var_cat: CatExpr) -> bool:
    """Conjunction distributes over the coend, canonically.

    ``factor`` is an atom over var_cat only (the weakened conjunct), ``body``
    an atom over (bound_cat, var_cat).  The canonical decomposition sending
    the class of (c, (p, g)) to (p, class of (c, g)) must be well defined, a
    bijection, and must commute with every action; this pins the two sides
    together element by element rather than merely counting them.
    """
    ev = Evaluator(model, sig)
    cat_y = model.category_of(var_cat)

    pf = FAtom(factor, (TVar("y", NEG), TVar("y", POS)))
    gf = FAtom(body, (TVar("x", NEG), TVar("x", POS), TVar("y", NEG), TVar("y", POS)))
    lhs_f = FCoend("x", bound_cat, FAnd(pf, gf))
    rhs_coend = FCoend("x", bound_cat, gf)
    rhs_f = FAnd(pf, rhs_coend)
    ctx = {"y": normalize(var_cat)}

    def decompose(point) -> dict:
        """class of (c, (p, g)) -> (p, class of (c, g)); None if ill-defined."""
        _, lhs_classes = ev._coend(lhs_f, ctx, point)
        _, rhs_classes = ev._coend(rhs_coend, ctx, point)
        out = {}
        for member, cls in lhs_classes.items():
            _, c, pg = member
            _, p, g = pg
            image = ("pair", p, rhs_classes[("at", c, g)])
            if cls in out and out[cls] != image:
                return None
            out[cls] = image
        return out

    points = [(n, p) for n in cat_y.objects for p in cat_y.objects]
    maps = {}
    for point in points:
        dec = decompose({"y": point})
        if dec is None:
            return False
        lhs = ev.eval(lhs_f, ctx, {"y": point})
        rhs = ev.eval(rhs_f, ctx, {"y": point})
        if sorted(dec.keys(), key=canon_key) != list(lhs):
            return False
        if canon_sort(dec.values()) != rhs or len(set(dec.values())) != len(lhs):
            return False
        maps[point] = dec
    for mn in cat_y.mor_names():
        for pn in cat_y.mor_names():
            m, q = cat_y.mor(mn), cat_y.mor(pn)
            old = (m.dst, q.src)
            new = (m.src, q.dst)
            act_l = ev.act(lhs_f, ctx, {"y": old}, {"y": new}, {"y": (m, q)})
            act_r = ev.act(rhs_f, ctx, {"y": old}, {"y": new}, {"y": (m, q)})
            for u in ev.eval(lhs_f, ctx, {"y": old}):
                if maps[new][act_l(u)] != act_r(maps[old][u]):
                    return False
    return True
