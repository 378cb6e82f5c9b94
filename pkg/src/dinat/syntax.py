"""Polarized syntax: category expressions, terms, formulas, sequents.

A context variable ``x : C`` stands for the pair of a contravariant copy
(written ``~x`` in the concrete syntax, ``TVar(x, NEG)`` here) and a
covariant copy (``x``, ``TVar(x, POS)``).  Annotations on occurrences must
agree with the intrinsic variance of the slot they fill: the first argument
of ``hom`` and every ``-`` slot of an atom take NEG occurrences, covariant
slots take POS ones.  The left argument of an implication is stored in
plain (unflipped) form; the *effective* polarity of an occurrence, as
returned by :func:`occurrences`, flips once per enclosing implication-left.

Variables whose declared category is an ``op`` are normalized away: a
variable of type ``C^op`` becomes a variable of type ``C`` whose occurrence
annotations are flipped.  One canonical presentation keeps all variance
side conditions checkable in a single convention.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum

from .errors import (
    ArityMismatch,
    DuplicateName,
    SyntaxError_,
    TypeMismatch,
    UnboundVariable,
)


class Polarity(Enum):
    POS = "+"
    NEG = "-"

    def flip(self) -> "Polarity":
        return Polarity.NEG if self is Polarity.POS else Polarity.POS

    def __str__(self) -> str:
        return self.value


POS = Polarity.POS
NEG = Polarity.NEG


# ---------------------------------------------------------------------------
# Category expressions


class CatExpr:
    __slots__ = ()

    def __str__(self) -> str:
        return cat_to_str(self)


@dataclass(frozen=True)
class CBase(CatExpr):
    name: str


@dataclass(frozen=True)
class COp(CatExpr):
    inner: CatExpr


@dataclass(frozen=True)
class CProd(CatExpr):
    left: CatExpr
    right: CatExpr


@dataclass(frozen=True)
class CUnit(CatExpr):
    pass


def normalize(e: CatExpr) -> CatExpr:
    """Push ``op`` through products and the unit and cancel ``op . op``.

    The result contains ``COp`` only directly above a ``CBase``; the
    function is idempotent.
    """
    match e:
        case CBase(_):
            return e
        case CUnit():
            return e
        case CProd(l, r):
            return CProd(normalize(l), normalize(r))
        case COp(inner):
            match normalize(inner):
                case COp(x):
                    return x
                case CProd(l, r):
                    return CProd(normalize(COp(l)), normalize(COp(r)))
                case CUnit():
                    return CUnit()
                case n:
                    return COp(n)
    raise TypeError(f"not a CatExpr: {e!r}")


def cat_to_str(e: CatExpr) -> str:
    match e:
        case CBase(name):
            return name
        case COp(inner):
            return f"(op {cat_to_str(inner)})"
        case CProd(l, r):
            return f"(prod {cat_to_str(l)} {cat_to_str(r)})"
        case CUnit():
            return "unit"
    raise TypeError(f"not a CatExpr: {e!r}")


def base_names(e: CatExpr) -> set[str]:
    match e:
        case CBase(name):
            return {name}
        case COp(inner):
            return base_names(inner)
        case CProd(l, r):
            return base_names(l) | base_names(r)
        case CUnit():
            return set()
    raise TypeError(f"not a CatExpr: {e!r}")


# ---------------------------------------------------------------------------
# Terms


class TermExpr:
    __slots__ = ()

    def __str__(self) -> str:
        return term_to_str(self)


@dataclass(frozen=True)
class TVar(TermExpr):
    name: str
    pol: Polarity


@dataclass(frozen=True)
class TApp(TermExpr):
    functor: str
    arg: TermExpr


@dataclass(frozen=True)
class TPair(TermExpr):
    left: TermExpr
    right: TermExpr


@dataclass(frozen=True)
class TFst(TermExpr):
    arg: TermExpr


@dataclass(frozen=True)
class TSnd(TermExpr):
    arg: TermExpr


def term_to_str(t: TermExpr) -> str:
    match t:
        case TVar(name, pol):
            return name if pol is POS else f"~{name}"
        case TApp(f, a):
            return f"({f} {term_to_str(a)})"
        case TPair(l, r):
            return f"(pair {term_to_str(l)} {term_to_str(r)})"
        case TFst(a):
            return f"(fst {term_to_str(a)})"
        case TSnd(a):
            return f"(snd {term_to_str(a)})"
    raise TypeError(f"not a TermExpr: {t!r}")


def term_vars(t: TermExpr) -> list[TVar]:
    match t:
        case TVar(_, _):
            return [t]
        case TApp(_, a) | TFst(a) | TSnd(a):
            return term_vars(a)
        case TPair(l, r):
            return term_vars(l) + term_vars(r)
    raise TypeError(f"not a TermExpr: {t!r}")


def op_image(t: TermExpr) -> TermExpr:
    """The same term read through ``op``: every occurrence annotation flips."""
    match t:
        case TVar(name, pol):
            return TVar(name, pol.flip())
        case TApp(f, a):
            return TApp(f, op_image(a))
        case TPair(l, r):
            return TPair(op_image(l), op_image(r))
        case TFst(a):
            return TFst(op_image(a))
        case TSnd(a):
            return TSnd(op_image(a))
    raise TypeError(f"not a TermExpr: {t!r}")


# ---------------------------------------------------------------------------
# Formulas


class Formula:
    __slots__ = ()

    def __str__(self) -> str:
        return formula_to_str(self)


@dataclass(frozen=True)
class FTop(Formula):
    pass


@dataclass(frozen=True)
class FHom(Formula):
    cat: CatExpr
    src: TermExpr  # contravariant slot: NEG-polarity term
    dst: TermExpr  # covariant slot: POS-polarity term


@dataclass(frozen=True)
class FAtom(Formula):
    name: str
    args: tuple[TermExpr, ...]


@dataclass(frozen=True)
class FAnd(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class FImp(Formula):
    left: Formula  # stored plain; effective polarities flip under this slot
    right: Formula


@dataclass(frozen=True)
class FEnd(Formula):
    var: str
    cat: CatExpr
    body: Formula


@dataclass(frozen=True)
class FCoend(Formula):
    var: str
    cat: CatExpr
    body: Formula


TOP = FTop()


def formula_to_str(f: Formula) -> str:
    match f:
        case FTop():
            return "top"
        case FHom(cat, s, t):
            return f"(hom {cat_to_str(cat)} {term_to_str(s)} {term_to_str(t)})"
        case FAtom(name, args):
            if not args:
                return f"({name})"
            return f"({name} {' '.join(term_to_str(a) for a in args)})"
        case FAnd(l, r):
            return f"(and {formula_to_str(l)} {formula_to_str(r)})"
        case FImp(l, r):
            return f"(imp {formula_to_str(l)} {formula_to_str(r)})"
        case FEnd(v, c, b):
            return f"(end ({v} {cat_to_str(c)}) {formula_to_str(b)})"
        case FCoend(v, c, b):
            return f"(coend ({v} {cat_to_str(c)}) {formula_to_str(b)})"
    raise TypeError(f"not a Formula: {f!r}")


# ---------------------------------------------------------------------------
# Signature


@dataclass
class SignatureTable:
    """Declared base categories, atom slot signatures and functor symbols.

    Atom slots are ``(category, polarity)`` pairs; a slot declared over an
    ``op`` category is normalized to the underlying category with flipped
    polarity.  Functor symbols are plain functors between base categories.
    """

    cats: set[str] = field(default_factory=set)
    atoms: dict[str, tuple[tuple[CatExpr, Polarity], ...]] = field(default_factory=dict)
    functors: dict[str, tuple[CatExpr, CatExpr]] = field(default_factory=dict)

    def declare_cat(self, name: str) -> None:
        self.cats.add(name)

    def declare_atom(self, name: str, slots: list[tuple[CatExpr, Polarity]]) -> None:
        if name in self.atoms:
            raise DuplicateName(f"atom {name!r} declared twice")
        self.atoms[name] = tuple(normalize_slot(c, p) for c, p in slots)

    def declare_functor(self, name: str, dom: CatExpr, cod: CatExpr) -> None:
        if name in self.functors:
            raise DuplicateName(f"functor {name!r} declared twice")
        self.functors[name] = (normalize(dom), normalize(cod))

    def atom_slots(self, name: str) -> tuple[tuple[CatExpr, Polarity], ...]:
        if name not in self.atoms:
            raise UnboundVariable(name, "atom signature")
        return self.atoms[name]

    def functor_sig(self, name: str) -> tuple[CatExpr, CatExpr]:
        if name not in self.functors:
            raise UnboundVariable(name, "functor signature")
        return self.functors[name]


def normalize_slot(cat: CatExpr, pol: Polarity) -> tuple[CatExpr, Polarity]:
    """Normalize an argument slot: a slot over ``C^op`` is a flipped slot over ``C``."""
    n = normalize(cat)
    if isinstance(n, COp):
        return n.inner, pol.flip()
    return n, pol


# ---------------------------------------------------------------------------
# Contexts and sequents

TermCtx = tuple[tuple[str, CatExpr], ...]
Hyps = tuple[tuple[str, Formula], ...]


@dataclass(frozen=True)
class Sequent:
    ctx: TermCtx
    hyps: Hyps
    goal: Formula

    def ctx_names(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.ctx)

    def ctx_cat(self, var: str) -> CatExpr:
        for v, c in self.ctx:
            if v == var:
                return c
        raise UnboundVariable(var, "term context")

    def ctx_index(self, var: str) -> int:
        for i, (v, _) in enumerate(self.ctx):
            if v == var:
                return i
        raise UnboundVariable(var, "term context")

    def hyp_labels(self) -> tuple[str, ...]:
        return tuple(l for l, _ in self.hyps)

    def hyp(self, label: str) -> Formula:
        for l, f in self.hyps:
            if l == label:
                return f
        raise UnboundVariable(label, "hypotheses")

    def hyp_index(self, label: str) -> int:
        for i, (l, _) in enumerate(self.hyps):
            if l == label:
                return i
        raise UnboundVariable(label, "hypotheses")

    def __str__(self) -> str:
        ctx = " ".join(f"({v} {cat_to_str(c)})" for v, c in self.ctx)
        hyps = " ".join(f"({l} {formula_to_str(f)})" for l, f in self.hyps)
        return f"(seq ({ctx}) ({hyps}) {formula_to_str(self.goal)})"


def make_ctx(*pairs: tuple[str, CatExpr]) -> TermCtx:
    names = [v for v, _ in pairs]
    if len(set(names)) != len(names):
        raise DuplicateName(f"duplicate context variable in {names}")
    return tuple((v, normalize(c)) for v, c in pairs)


def normalize_ctx_entry(var: str, cat: CatExpr) -> tuple[str, CatExpr, bool]:
    """Normalize one context entry; returns (var, cat, flipped).

    A variable declared over ``C^op`` becomes a variable over ``C`` whose
    occurrences must be flipped by the caller.  Products mixing ``op``
    components cannot be flipped entry-wise and are rejected.
    """
    n = normalize(cat)
    if isinstance(n, COp):
        if not isinstance(n.inner, CBase):
            raise SyntaxError_(f"cannot normalize context entry {var} : {cat_to_str(n)}")
        return var, n.inner, True
    if isinstance(n, CProd) and _mentions_op(n):
        raise SyntaxError_(
            f"context entry {var} : {cat_to_str(n)} mixes op inside a product; "
            "split the variable instead"
        )
    return var, n, False


def _mentions_op(e: CatExpr) -> bool:
    match e:
        case COp(_):
            return True
        case CProd(l, r):
            return _mentions_op(l) or _mentions_op(r)
        case _:
            return False


# ---------------------------------------------------------------------------
# Well-formedness

# Occurrence paths are tuples of step strings, e.g. ("hyp g", "imp.left", "arg 0").
Path = tuple[str, ...]


def term_type(t: TermExpr, ctx: TermCtx, sig: SignatureTable) -> tuple[CatExpr, Polarity]:
    """Compute the (category, polarity) of a term.

    Every variable occurring in a term must carry the same annotation, so
    a term has a single overall polarity; functor application preserves it.
    """
    match t:
        case TVar(name, pol):
            for v, c in ctx:
                if v == name:
                    return c, pol
            raise UnboundVariable(name, f"term {term_to_str(t)}")
        case TApp(f, a):
            dom, cod = sig.functor_sig(f)
            acat, apol = term_type(a, ctx, sig)
            if normalize(acat) != dom:
                raise TypeMismatch(
                    f"functor {f} expects {cat_to_str(dom)}, got {cat_to_str(acat)}"
                )
            return cod, apol
        case TPair(l, r):
            lc, lp = term_type(l, ctx, sig)
            rc, rp = term_type(r, ctx, sig)
            if lp is not rp:
                raise TypeMismatch(f"mixed polarity in pair {term_to_str(t)}")
            return CProd(lc, rc), lp
        case TFst(a):
            ac, ap = term_type(a, ctx, sig)
            if not isinstance(ac, CProd):
                raise TypeMismatch(f"fst of non-product {term_to_str(t)}")
            return ac.left, ap
        case TSnd(a):
            ac, ap = term_type(a, ctx, sig)
            if not isinstance(ac, CProd):
                raise TypeMismatch(f"snd of non-product {term_to_str(t)}")
            return ac.right, ap
    raise TypeError(f"not a TermExpr: {t!r}")


def check_term_slot(
    t: TermExpr, cat: CatExpr, pol: Polarity, ctx: TermCtx, sig: SignatureTable, where: str
) -> None:
    tc, tp = term_type(t, ctx, sig)
    ncat, npol = normalize_slot(cat, pol)
    if normalize(tc) != ncat:
        raise TypeMismatch(
            f"{where}: term {term_to_str(t)} has category {cat_to_str(tc)}, "
            f"slot wants {cat_to_str(ncat)}"
        )
    if tp is not npol:
        raise TypeMismatch(
            f"{where}: term {term_to_str(t)} has polarity {tp}, slot wants {npol}"
        )


def check_formula(f: Formula, ctx: TermCtx, sig: SignatureTable) -> None:
    """Check binding, atom arity/variance conformance and slot polarities."""
    match f:
        case FTop():
            return
        case FHom(cat, s, t):
            c = normalize(cat)
            check_term_slot(s, c, NEG, ctx, sig, "hom source")
            check_term_slot(t, c, POS, ctx, sig, "hom target")
        case FAtom(name, args):
            slots = sig.atom_slots(name)
            if len(slots) != len(args):
                raise ArityMismatch(
                    f"atom {name} expects {len(slots)} arguments, got {len(args)}"
                )
            for i, ((scat, spol), arg) in enumerate(zip(slots, args)):
                check_term_slot(arg, scat, spol, ctx, sig, f"{name} arg {i}")
        case FAnd(l, r) | FImp(l, r):
            check_formula(l, ctx, sig)
            check_formula(r, ctx, sig)
        case FEnd(v, c, b) | FCoend(v, c, b):
            if any(v == name for name, _ in ctx):
                raise DuplicateName(f"binder {v} shadows a context variable")
            check_formula(b, ctx + ((v, normalize(c)),), sig)
        case _:
            raise TypeError(f"not a Formula: {f!r}")


def check_sequent(s: Sequent, sig: SignatureTable) -> None:
    names = [v for v, _ in s.ctx]
    if len(set(names)) != len(names):
        raise DuplicateName(f"duplicate context variables: {names}")
    labels = [l for l, _ in s.hyps]
    if len(set(labels)) != len(labels):
        raise DuplicateName(f"duplicate hypothesis labels: {labels}")
    for v, c in s.ctx:
        if normalize(c) != c:
            raise SyntaxError_(f"context category for {v} is not normalized")
    for _, f in s.hyps:
        check_formula(f, s.ctx, sig)
    check_formula(s.goal, s.ctx, sig)


# ---------------------------------------------------------------------------
# Occurrences / effective polarity


def occurrences(f: Formula, var: str) -> list[tuple[Path, Polarity]]:
    """Every free occurrence of ``var`` with its *effective* polarity.

    The effective polarity of an occurrence is its annotation flipped once
    per enclosing implication-left; the annotation itself already records
    the intrinsic variance of the slot (hom source, atom ``-`` slots).
    """
    out: list[tuple[Path, Polarity]] = []
    _occ_formula(f, var, (), 0, out)
    return out


def _occ_formula(
    f: Formula, var: str, path: Path, flips: int, out: list[tuple[Path, Polarity]]
) -> None:
    match f:
        case FTop():
            return
        case FHom(_, s, t):
            _occ_term(s, var, path + ("hom.src",), flips, out)
            _occ_term(t, var, path + ("hom.dst",), flips, out)
        case FAtom(name, args):
            for i, a in enumerate(args):
                _occ_term(a, var, path + (f"{name}.arg{i}",), flips, out)
        case FAnd(l, r):
            _occ_formula(l, var, path + ("and.left",), flips, out)
            _occ_formula(r, var, path + ("and.right",), flips, out)
        case FImp(l, r):
            _occ_formula(l, var, path + ("imp.left",), flips + 1, out)
            _occ_formula(r, var, path + ("imp.right",), flips, out)
        case FEnd(v, _, b) | FCoend(v, _, b):
            if v != var:
                _occ_formula(b, var, path + ("body",), flips, out)
        case _:
            raise TypeError(f"not a Formula: {f!r}")


def _occ_term(
    t: TermExpr, var: str, path: Path, flips: int, out: list[tuple[Path, Polarity]]
) -> None:
    for occ in term_vars(t):
        if occ.name == var:
            eff = occ.pol if flips % 2 == 0 else occ.pol.flip()
            out.append((path, eff))


def free_vars(f: Formula) -> set[str]:
    match f:
        case FTop():
            return set()
        case FHom(_, s, t):
            return {v.name for v in term_vars(s)} | {v.name for v in term_vars(t)}
        case FAtom(_, args):
            return {v.name for a in args for v in term_vars(a)}
        case FAnd(l, r) | FImp(l, r):
            return free_vars(l) | free_vars(r)
        case FEnd(v, _, b) | FCoend(v, _, b):
            return free_vars(b) - {v}
    raise TypeError(f"not a Formula: {f!r}")


# ---------------------------------------------------------------------------
# Substitution


def fresh_name(base: str, taken: set[str]) -> str:
    if base not in taken:
        return base
    for n in itertools.count(1):
        cand = f"{base}{n}" if n > 1 else f"{base}'"
        if cand not in taken:
            return cand
    raise AssertionError


def substitute(f: Formula, var: str, t: TermExpr) -> Formula:
    """Capture-avoiding substitution of ``t`` for ``var``.

    POS occurrences receive ``t`` itself, NEG occurrences its op-image
    (every annotation inside ``t`` flipped): the negative copy of a
    substituted variable reads the substituted term on the swapped side.
    """
    t_free = {v.name for v in term_vars(t)}

    def sub_t(term: TermExpr) -> TermExpr:
        match term:
            case TVar(name, pol):
                if name != var:
                    return term
                return t if pol is POS else op_image(t)
            case TApp(fn, a):
                return TApp(fn, sub_t(a))
            case TPair(l, r):
                return TPair(sub_t(l), sub_t(r))
            case TFst(a):
                return TFst(sub_t(a))
            case TSnd(a):
                return TSnd(sub_t(a))
        raise TypeError(f"not a TermExpr: {term!r}")

    def sub_f(g: Formula, taken: set[str]) -> Formula:
        match g:
            case FTop():
                return g
            case FHom(cat, s, d):
                return FHom(cat, sub_t(s), sub_t(d))
            case FAtom(name, args):
                return FAtom(name, tuple(sub_t(a) for a in args))
            case FAnd(l, r):
                return FAnd(sub_f(l, taken), sub_f(r, taken))
            case FImp(l, r):
                return FImp(sub_f(l, taken), sub_f(r, taken))
            case FEnd(v, c, b) | FCoend(v, c, b):
                ctor = FEnd if isinstance(g, FEnd) else FCoend
                if v == var:
                    return g
                if v in t_free:
                    v2 = fresh_name(v, taken | t_free | free_vars(b) | {var})
                    b = rename_var(b, v, v2)
                    v = v2
                return ctor(v, c, sub_f(b, taken | {v}))
        raise TypeError(f"not a Formula: {g!r}")

    return sub_f(f, free_vars(f) | t_free)


def rename_var(f: Formula, old: str, new: str) -> Formula:
    """Rename a variable, preserving occurrence annotations."""
    return substitute(f, old, TVar(new, POS))


def split_rename(f: Formula, var: str, neg_target: str, pos_target: str) -> Formula:
    """Split ``var`` into two variables according to *effective* polarity.

    Occurrences whose effective polarity is NEG go to ``neg_target``, POS
    ones to ``pos_target``; annotations are preserved, so an occurrence
    sitting under an implication-left keeps its written form and only its
    name changes.  This is the twist used when two natural variables are
    joined into (or split out of) a single dinatural one: the two targets
    take over exactly the reads of the negative and positive component.
    """

    def go_t(term: TermExpr, flips: int) -> TermExpr:
        match term:
            case TVar(name, pol):
                if name != var:
                    return term
                eff = pol if flips % 2 == 0 else pol.flip()
                return TVar(neg_target if eff is NEG else pos_target, pol)
            case TApp(fn, a):
                return TApp(fn, go_t(a, flips))
            case TPair(l, r):
                return TPair(go_t(l, flips), go_t(r, flips))
            case TFst(a):
                return TFst(go_t(a, flips))
            case TSnd(a):
                return TSnd(go_t(a, flips))
        raise TypeError(f"not a TermExpr: {term!r}")

    def go_f(g: Formula, flips: int) -> Formula:
        match g:
            case FTop():
                return g
            case FHom(cat, s, d):
                return FHom(cat, go_t(s, flips), go_t(d, flips))
            case FAtom(name, args):
                return FAtom(name, tuple(go_t(a, flips) for a in args))
            case FAnd(l, r):
                return FAnd(go_f(l, flips), go_f(r, flips))
            case FImp(l, r):
                return FImp(go_f(l, flips + 1), go_f(r, flips))
            case FEnd(v, c, b) | FCoend(v, c, b):
                ctor = FEnd if isinstance(g, FEnd) else FCoend
                if v == var:
                    return g
                if v in (neg_target, pos_target):
                    v2 = fresh_name(v, free_vars(b) | {var, neg_target, pos_target})
                    return ctor(v2, c, go_f(rename_var(b, v, v2), flips))
                return ctor(v, c, go_f(b, flips))
        raise TypeError(f"not a Formula: {g!r}")

    return go_f(f, 0)


# ---------------------------------------------------------------------------
# Alpha equality


def alpha_equal(f: Formula, g: Formula) -> bool:
    """Equality up to consistent renaming of end/coend binders."""
    return _alpha(f, g, {}, {}, [0])


def _alpha(f: Formula, g: Formula, env_f: dict, env_g: dict, counter: list[int]) -> bool:
    def tvar_key(name: str, env: dict):
        return env.get(name, ("free", name))

    def terms_eq(s: TermExpr, t: TermExpr) -> bool:
        match (s, t):
            case (TVar(n1, p1), TVar(n2, p2)):
                return p1 is p2 and tvar_key(n1, env_f) == tvar_key(n2, env_g)
            case (TApp(f1, a1), TApp(f2, a2)):
                return f1 == f2 and terms_eq(a1, a2)
            case (TPair(l1, r1), TPair(l2, r2)):
                return terms_eq(l1, l2) and terms_eq(r1, r2)
            case (TFst(a1), TFst(a2)) | (TSnd(a1), TSnd(a2)):
                return terms_eq(a1, a2)
            case _:
                return False

    match (f, g):
        case (FTop(), FTop()):
            return True
        case (FHom(c1, s1, t1), FHom(c2, s2, t2)):
            return normalize(c1) == normalize(c2) and terms_eq(s1, s2) and terms_eq(t1, t2)
        case (FAtom(n1, a1), FAtom(n2, a2)):
            return n1 == n2 and len(a1) == len(a2) and all(
                terms_eq(x, y) for x, y in zip(a1, a2)
            )
        case (FAnd(l1, r1), FAnd(l2, r2)) | (FImp(l1, r1), FImp(l2, r2)):
            return _alpha(l1, l2, env_f, env_g, counter) and _alpha(
                r1, r2, env_f, env_g, counter
            )
        case (FEnd(v1, c1, b1), FEnd(v2, c2, b2)) | (FCoend(v1, c1, b1), FCoend(v2, c2, b2)):
            if type(f) is not type(g) or normalize(c1) != normalize(c2):
                return False
            counter[0] += 1
            mark = ("bound", counter[0])
            return _alpha(
                b1, b2, {**env_f, v1: mark}, {**env_g, v2: mark}, counter
            )
        case _:
            return False


def sequents_equal(a: Sequent, b: Sequent) -> bool:
    """Literal on context names, categories and hypothesis labels; alpha on formulas."""
    if a.ctx != b.ctx:
        return False
    if a.hyp_labels() != b.hyp_labels():
        return False
    for (_, f), (_, g) in zip(a.hyps, b.hyps):
        if not alpha_equal(f, g):
            return False
    return alpha_equal(a.goal, b.goal)


def formula_size(f: Formula) -> int:
    match f:
        case FTop():
            return 1
        case FHom(_, s, t):
            return 1 + len(term_vars(s)) + len(term_vars(t))
        case FAtom(_, args):
            return 1 + sum(len(term_vars(a)) for a in args)
        case FAnd(l, r) | FImp(l, r):
            return 1 + formula_size(l) + formula_size(r)
        case FEnd(_, _, b) | FCoend(_, _, b):
            return 1 + formula_size(b)
    raise TypeError(f"not a Formula: {f!r}")
