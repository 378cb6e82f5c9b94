"""Derivation trees and their checker.

Every node stores its claimed conclusion sequent; checking recomputes the
conclusion from the rule schema and the (recursively checked) premises and
compares up to alpha-equality of formulas.  Rule schemas are not
syntax-directed on the conclusion alone (the hom eliminator in particular),
so nodes carry the parameters that pin the instance down: the eliminated
hypothesis is always named explicitly, never searched for.

There is no cut rule.  The only composition forms available are the ones
the rules themselves provide (projections, the eliminator with an equality
derivation in context, and the structural plumbing); pointwise composites
of arbitrary families are a semantic notion, not a derivation.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields

from .errors import (
    MacroError,
    SchemaMismatch,
    VarianceViolation,
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
    Sequent,
    SignatureTable,
    TApp,
    TermExpr,
    TFst,
    TPair,
    TSnd,
    TVar,
    alpha_equal,
    check_sequent,
    fresh_name,
    free_vars,
    normalize,
    occurrences,
    rename_var,
    sequents_equal,
    split_rename,
    substitute,
)


class Derivation:
    __slots__ = ()

    def rule_name(self) -> str:
        return type(self).__name__.lower()

    def subderivations(self) -> list["Derivation"]:
        return [
            getattr(self, f.name)
            for f in fields(self)
            if isinstance(getattr(self, f.name), Derivation)
        ]


@dataclass(frozen=True)
class Id(Derivation):
    concl: Sequent


@dataclass(frozen=True)
class TopIntro(Derivation):
    concl: Sequent


@dataclass(frozen=True)
class Refl(Derivation):
    var: str
    concl: Sequent


@dataclass(frozen=True)
class Assume(Derivation):
    """A hypothesis leaf: stands for an externally supplied family.

    Only the test and verification harnesses evaluate these; a derivation
    containing one is checked but carries no closed semantic content.
    """

    key: str
    concl: Sequent


@dataclass(frozen=True)
class Pair(Derivation):
    left: Derivation
    right: Derivation
    concl: Sequent


@dataclass(frozen=True)
class Proj1(Derivation):
    sub: Derivation
    concl: Sequent


@dataclass(frozen=True)
class Proj2(Derivation):
    sub: Derivation
    concl: Sequent


@dataclass(frozen=True)
class Weaken(Derivation):
    sub: Derivation
    label: str
    formula: Formula
    pos: int
    concl: Sequent


@dataclass(frozen=True)
class CtxWeaken(Derivation):
    sub: Derivation
    var: str
    cat: CatExpr
    pos: int
    concl: Sequent


@dataclass(frozen=True)
class Curry(Derivation):
    sub: Derivation
    label: str
    concl: Sequent


@dataclass(frozen=True)
class Uncurry(Derivation):
    sub: Derivation
    label: str
    pos: int
    concl: Sequent


@dataclass(frozen=True)
class Reindex(Derivation):
    sub: Derivation
    var: str
    functor: str
    newvar: str
    concl: Sequent


@dataclass(frozen=True)
class J(Derivation):
    """Eliminate the hom hypothesis ``eq : hom(~source, target)``.

    The premise identifies ``source`` and ``target`` as the single fresh
    variable; the variance side conditions make the elimination directed.
    """

    sub: Derivation
    source: str
    target: str
    fresh: str
    eq: str
    concl: Sequent


@dataclass(frozen=True)
class JInv(Derivation):
    """Contract a hom hypothesis by plugging the identity: the inverse of J."""

    sub: Derivation
    source: str
    target: str
    fresh: str
    eq: str
    concl: Sequent


@dataclass(frozen=True)
class JWithEq(Derivation):
    """Eliminate against a *derived* equality over the twisted context."""

    main: Derivation
    eq_deriv: Derivation
    source: str
    target: str
    fresh: str
    concl: Sequent


@dataclass(frozen=True)
class EndIntro(Derivation):
    sub: Derivation
    var: str
    concl: Sequent


@dataclass(frozen=True)
class EndElim(Derivation):
    sub: Derivation
    var: str
    pos: int
    concl: Sequent


@dataclass(frozen=True)
class CoendIntro(Derivation):
    sub: Derivation
    var: str
    label: str
    concl: Sequent


@dataclass(frozen=True)
class CoendElim(Derivation):
    sub: Derivation
    var: str
    label: str
    pos: int
    concl: Sequent


@dataclass(frozen=True)
class ImpFunc(Derivation):
    contra: Derivation
    cova: Derivation
    label: str
    concl: Sequent


@dataclass(frozen=True)
class Exchange(Derivation):
    sub: Derivation
    pos: int
    concl: Sequent


@dataclass(frozen=True)
class ExchangeHyps(Derivation):
    sub: Derivation
    pos: int
    concl: Sequent


@dataclass(frozen=True)
class PairCtx(Derivation):
    sub: Derivation
    x: str
    y: str
    p: str
    concl: Sequent


@dataclass(frozen=True)
class UnpairCtx(Derivation):
    sub: Derivation
    p: str
    x: str
    y: str
    concl: Sequent


@dataclass(frozen=True)
class SplitAnd(Derivation):
    sub: Derivation
    label: str
    left: str
    right: str
    concl: Sequent


@dataclass(frozen=True)
class JoinAnd(Derivation):
    sub: Derivation
    left: str
    right: str
    label: str
    concl: Sequent


@dataclass(frozen=True)
class OpRelabel(Derivation):
    """Identity step recording a change of variable presentation.

    Re-reading a variable as ranging over the opposite category is pure
    notation once contexts are normalized; the node keeps the step visible
    in derivations that use it.
    """

    sub: Derivation
    var: str
    concl: Sequent


# -- macros -----------------------------------------------------------------


@dataclass(frozen=True)
class MYoneda(Derivation):
    cat: CatExpr
    atom: str
    direction: str  # "intro" | "elim"
    concl: Sequent
    a: str = "a"
    binder: str = "x"
    opened: str = "y"
    fresh: str = "z"
    eq: str = "e"
    hyp: str = "p"


@dataclass(frozen=True)
class MCoYoneda(Derivation):
    cat: CatExpr
    atom: str
    direction: str
    concl: Sequent
    a: str = "a"
    binder: str = "x"
    opened: str = "y"
    fresh: str = "z"
    eq: str = "e"
    hyp: str = "p"


@dataclass(frozen=True)
class MFubini(Derivation):
    cat1: CatExpr
    cat2: CatExpr
    atom: str
    form: str  # "exchange" | "combine"
    concl: Sequent
    x: str = "x"
    y: str = "y"
    p: str = "p"
    hyp: str = "w"


@dataclass(frozen=True)
class MCoendFrobenius(Derivation):
    sub: Derivation
    direction: str  # "split" (coend of product -> product of coend) | "join"
    label: str  # the coend hypothesis (split) / the bare factor hypothesis (join)
    other: str  # label of the coend hypothesis in the "join" premise
    concl: Sequent
    opened: str = "x'"


@dataclass(frozen=True)
class MHomRelAdj(Derivation):
    sub: Derivation
    direction: str  # "intro" (add equality in context) | "elim"
    source: str
    target: str
    fresh: str
    eq: str
    concl: Sequent


MACRO_TYPES = (MYoneda, MCoYoneda, MFubini, MCoendFrobenius, MHomRelAdj)


# ---------------------------------------------------------------------------
# Helpers


def _require(cond: bool, node: str, reason: str) -> None:
    if not cond:
        raise SchemaMismatch(node, reason)


def _hyps_insert(hyps, pos: int, item):
    hyps = list(hyps)
    _require(0 <= pos <= len(hyps), "weaken", f"position {pos} out of range")
    hyps.insert(pos, item)
    return tuple(hyps)


def _hyps_without(hyps, label: str):
    return tuple((l, f) for l, f in hyps if l != label)


def check_hom_elim_side_condition(
    seq: Sequent, source: str, target: str, eq: str
) -> bool:
    """Do the variance side conditions for eliminating ``eq`` hold?

    ``source`` fills the contravariant slot of the equality, ``target`` the
    covariant one.  Contraction transports hypotheses forward along the
    equality and the goal backward, so in the goal the source may only be
    read on its negative side and the target on its positive side; in the
    other hypotheses the two roles swap.
    """
    try:
        _hom_elim_side_condition(seq, source, target, eq, "side-condition")
    except VarianceViolation:
        return False
    return True


def _hom_elim_side_condition(
    seq: Sequent, source: str, target: str, eq: str, node: str
) -> None:
    e = seq.hyp(eq)
    _require(
        isinstance(e, FHom)
        and e.src == TVar(source, NEG)
        and e.dst == TVar(target, POS),
        node,
        f"hypothesis {eq} is not an equality from ~{source} to {target}",
    )
    for label, f in seq.hyps:
        if label == eq:
            continue
        for path, pol in occurrences(f, source):
            if pol is not POS:
                raise VarianceViolation(node, source, f"hyp {label}: {'/'.join(path)}")
        for path, pol in occurrences(f, target):
            if pol is not NEG:
                raise VarianceViolation(node, target, f"hyp {label}: {'/'.join(path)}")
    for path, pol in occurrences(seq.goal, source):
        if pol is not NEG:
            raise VarianceViolation(node, source, f"goal: {'/'.join(path)}")
    for path, pol in occurrences(seq.goal, target):
        if pol is not POS:
            raise VarianceViolation(node, target, f"goal: {'/'.join(path)}")


def contract_sequent(
    seq: Sequent, source: str, target: str, fresh: str, eq: str, node: str
) -> Sequent:
    """The premise matching a J conclusion: drop ``eq``, identify the endpoints."""
    cat_s = normalize(seq.ctx_cat(source))
    cat_t = normalize(seq.ctx_cat(target))
    _require(cat_s == cat_t, node, f"{source} and {target} live in different categories")
    e = seq.hyp(eq)
    _require(isinstance(e, FHom) and normalize(e.cat) == cat_s, node,
             f"equality {eq} is over the wrong category")
    _require(source != target, node, "source and target must be distinct")
    taken = set(seq.ctx_names()) - {source, target}
    _require(fresh not in taken, node, f"fresh variable {fresh} clashes with the context")
    _hom_elim_side_condition(seq, source, target, eq, node)
    ctx = []
    for v, c in seq.ctx:
        if v == source:
            ctx.append((fresh, c))
        elif v == target:
            continue
        else:
            ctx.append((v, c))
    hyps = tuple(
        (l, rename_var(rename_var(f, source, fresh), target, fresh))
        for l, f in seq.hyps
        if l != eq
    )
    goal = rename_var(rename_var(seq.goal, source, fresh), target, fresh)
    return Sequent(tuple(ctx), hyps, goal)


def expand_sequent(
    seq: Sequent, source: str, target: str, fresh: str, eq: str, node: str
) -> Sequent:
    """The J conclusion canonically rebuilt from a premise sequent.

    The fresh variable splits into source (its positive reads) and target
    (its negative reads) in the hypotheses, and the other way around in the
    goal; the new equality hypothesis lands in front.
    """
    cat = normalize(seq.ctx_cat(fresh))
    taken = set(seq.ctx_names()) - {fresh}
    for v in (source, target):
        _require(v not in taken, node, f"variable {v} clashes with the context")
    _require(source != target, node, "source and target must be distinct")
    _require(eq not in seq.hyp_labels(), node, f"label {eq} already used")
    ctx = []
    for v, c in seq.ctx:
        if v == fresh:
            ctx.append((source, c))
            ctx.append((target, c))
        else:
            ctx.append((v, c))
    hyps = tuple(
        (l, split_rename(f, fresh, neg_target=target, pos_target=source))
        for l, f in seq.hyps
    )
    goal = split_rename(seq.goal, fresh, neg_target=source, pos_target=target)
    e = FHom(cat, TVar(source, NEG), TVar(target, POS))
    return Sequent(tuple(ctx), ((eq, e),) + hyps, goal)


# ---------------------------------------------------------------------------
# Conclusion computation per rule


def _infer(d: Derivation, sig: SignatureTable, premises: list[Sequent]) -> Sequent:
    name = d.rule_name()
    match d:
        case Id(concl=c):
            _require(len(c.hyps) == 1, name, "id takes a single hypothesis")
            _require(alpha_equal(c.hyps[0][1], c.goal), name,
                     "hypothesis and goal differ")
            return c
        case TopIntro(concl=c):
            _require(isinstance(c.goal, FTop), name, "goal must be top")
            return c
        case Refl(var=v, concl=c):
            _require(len(c.hyps) == 0, name, "refl takes no hypotheses")
            g = c.goal
            _require(
                isinstance(g, FHom)
                and g.src == TVar(v, NEG)
                and g.dst == TVar(v, POS),
                name,
                f"goal must be an equality from ~{v} to {v}",
            )
            _require(normalize(g.cat) == normalize(c.ctx_cat(v)), name,
                     "equality over the wrong category")
            return c
        case Assume(concl=c):
            return c
        case Pair(concl=c):
            l, r = premises
            _require(l.ctx == r.ctx and l.hyps == r.hyps, name,
                     "premises must share context and hypotheses")
            return Sequent(l.ctx, l.hyps, FAnd(l.goal, r.goal))
        case Proj1(concl=c) | Proj2(concl=c):
            (p,) = premises
            _require(isinstance(p.goal, FAnd), name, "premise goal must be a product")
            goal = p.goal.left if isinstance(d, Proj1) else p.goal.right
            return Sequent(p.ctx, p.hyps, goal)
        case Weaken(label=lb, formula=f, pos=pos):
            (p,) = premises
            _require(lb not in p.hyp_labels(), name, f"label {lb} already used")
            return Sequent(p.ctx, _hyps_insert(p.hyps, pos, (lb, f)), p.goal)
        case CtxWeaken(var=v, cat=cat, pos=pos):
            (p,) = premises
            _require(v not in p.ctx_names(), name, f"variable {v} already bound")
            ctx = list(p.ctx)
            _require(0 <= pos <= len(ctx), name, f"position {pos} out of range")
            ctx.insert(pos, (v, normalize(cat)))
            return Sequent(tuple(ctx), p.hyps, p.goal)
        case Curry(label=lb):
            (p,) = premises
            f = p.hyp(lb)
            return Sequent(p.ctx, _hyps_without(p.hyps, lb), FImp(f, p.goal))
        case Uncurry(label=lb, pos=pos):
            (p,) = premises
            _require(isinstance(p.goal, FImp), name, "premise goal must be an implication")
            _require(lb not in p.hyp_labels(), name, f"label {lb} already used")
            return Sequent(
                p.ctx, _hyps_insert(p.hyps, pos, (lb, p.goal.left)), p.goal.right
            )
        case Reindex(var=v, functor=fn, newvar=nv):
            (p,) = premises
            dom, cod = sig.functor_sig(fn)
            _require(normalize(p.ctx_cat(v)) == cod, name,
                     f"context variable {v} does not match the functor codomain")
            _require(isinstance(dom, CBase) and isinstance(cod, CBase), name,
                     "reindexing functors run between base categories")
            _require(nv == v or nv not in p.ctx_names(), name,
                     f"variable {nv} already bound")
            ctx = tuple((nv, dom) if w == v else (w, c) for w, c in p.ctx)
            t = TApp(fn, TVar(nv, POS))
            hyps = tuple((l, substitute(f, v, t)) for l, f in p.hyps)
            return Sequent(ctx, hyps, substitute(p.goal, v, t))
        case J(source=a, target=b, fresh=z, eq=e, concl=c):
            (p,) = premises
            expected = contract_sequent(c, a, b, z, e, name)
            _require(sequents_equal(p, expected), name,
                     f"premise is {p}, conclusion needs {expected}")
            return c
        case JInv(source=a, target=b, fresh=z, eq=e):
            (p,) = premises
            return contract_sequent(p, a, b, z, e, name)
        case JWithEq(source=a, target=b, fresh=z):
            m, ed = premises
            expected_eq_ctxhyps = expand_sequent(m, a, b, z, "@eq", name)
            eq_goal = expected_eq_ctxhyps.hyps[0][1]
            expected_eq = Sequent(
                expected_eq_ctxhyps.ctx, expected_eq_ctxhyps.hyps[1:], eq_goal
            )
            _require(sequents_equal(ed, expected_eq), name,
                     f"equality premise is {ed}, rule needs {expected_eq}")
            return Sequent(
                expected_eq_ctxhyps.ctx,
                expected_eq_ctxhyps.hyps[1:],
                expected_eq_ctxhyps.goal,
            )
        case EndIntro(var=v):
            (p,) = premises
            cat = p.ctx_cat(v)
            for l, f in p.hyps:
                _require(v not in free_vars(f), name,
                         f"hypothesis {l} mentions the bound variable {v}")
            ctx = tuple((w, c) for w, c in p.ctx if w != v)
            return Sequent(ctx, p.hyps, FEnd(v, cat, p.goal))
        case EndElim(var=v, pos=pos):
            (p,) = premises
            g = p.goal
            _require(isinstance(g, FEnd), name, "premise goal must be an end")
            _require(v not in p.ctx_names(), name, f"variable {v} already bound")
            ctx = list(p.ctx)
            _require(0 <= pos <= len(ctx), name, f"position {pos} out of range")
            ctx.insert(pos, (v, normalize(g.cat)))
            return Sequent(tuple(ctx), p.hyps, rename_var(g.body, g.var, v))
        case CoendIntro(var=v, label=lb):
            (p,) = premises
            cat = p.ctx_cat(v)
            for l, f in p.hyps:
                if l != lb:
                    _require(v not in free_vars(f), name,
                             f"hypothesis {l} mentions the bound variable {v}")
            _require(v not in free_vars(p.goal), name,
                     f"goal mentions the bound variable {v}")
            ctx = tuple((w, c) for w, c in p.ctx if w != v)
            hyps = tuple(
                (l, FCoend(v, cat, f) if l == lb else f) for l, f in p.hyps
            )
            return Sequent(ctx, hyps, p.goal)
        case CoendElim(var=v, label=lb, pos=pos):
            (p,) = premises
            f = p.hyp(lb)
            _require(isinstance(f, FCoend), name, f"hypothesis {lb} must be a coend")
            _require(v not in p.ctx_names(), name, f"variable {v} already bound")
            ctx = list(p.ctx)
            _require(0 <= pos <= len(ctx), name, f"position {pos} out of range")
            ctx.insert(pos, (v, normalize(f.cat)))
            hyps = tuple(
                (l, rename_var(f.body, f.var, v) if l == lb else g) for l, g in p.hyps
            )
            return Sequent(tuple(ctx), hyps, p.goal)
        case ImpFunc(label=lb):
            cp, cq = premises
            _require(cp.ctx == cq.ctx, name, "premises must share the context")
            _require(len(cp.hyps) == 1 and len(cq.hyps) == 1, name,
                     "premises take a single hypothesis each")
            return Sequent(
                cp.ctx,
                ((lb, FImp(cp.goal, cq.hyps[0][1])),),
                FImp(cp.hyps[0][1], cq.goal),
            )
        case Exchange(pos=pos):
            (p,) = premises
            ctx = list(p.ctx)
            _require(0 <= pos < len(ctx) - 1, name, f"position {pos} out of range")
            ctx[pos], ctx[pos + 1] = ctx[pos + 1], ctx[pos]
            return Sequent(tuple(ctx), p.hyps, p.goal)
        case ExchangeHyps(pos=pos):
            (p,) = premises
            hyps = list(p.hyps)
            _require(0 <= pos < len(hyps) - 1, name, f"position {pos} out of range")
            hyps[pos], hyps[pos + 1] = hyps[pos + 1], hyps[pos]
            return Sequent(p.ctx, tuple(hyps), p.goal)
        case PairCtx(x=x, y=y, p=pv):
            (p,) = premises
            i = p.ctx_index(x)
            _require(i + 1 < len(p.ctx) and p.ctx[i + 1][0] == y, name,
                     f"{x} and {y} must be adjacent")
            _require(pv not in set(p.ctx_names()) - {x, y}, name,
                     f"variable {pv} already bound")
            from .syntax import CProd
            cat = CProd(p.ctx[i][1], p.ctx[i + 1][1])
            ctx = p.ctx[:i] + ((pv, cat),) + p.ctx[i + 2:]
            hyps = tuple((l, _pair_vars(f, x, y, pv)) for l, f in p.hyps)
            return Sequent(ctx, hyps, _pair_vars(p.goal, x, y, pv))
        case UnpairCtx(p=pv, x=x, y=y):
            (p,) = premises
            from .syntax import CProd
            i = p.ctx_index(pv)
            cat = p.ctx[i][1]
            _require(isinstance(cat, CProd), name,
                     f"variable {pv} is not of product category")
            taken = set(p.ctx_names()) - {pv}
            _require(x not in taken and y not in taken and x != y, name,
                     "unpaired variable names clash")
            ctx = p.ctx[:i] + ((x, cat.left), (y, cat.right)) + p.ctx[i + 1:]
            hyps = tuple((l, _unpair_vars(f, pv, x, y, name)) for l, f in p.hyps)
            return Sequent(ctx, hyps, _unpair_vars(p.goal, pv, x, y, name))
        case SplitAnd(label=lb, left=l1, right=l2):
            (p,) = premises
            f = p.hyp(lb)
            _require(isinstance(f, FAnd), name, f"hypothesis {lb} must be a product")
            taken = set(p.hyp_labels()) - {lb}
            _require(l1 not in taken and l2 not in taken and l1 != l2, name,
                     "split labels clash")
            i = p.hyp_index(lb)
            hyps = p.hyps[:i] + ((l1, f.left), (l2, f.right)) + p.hyps[i + 1:]
            return Sequent(p.ctx, hyps, p.goal)
        case JoinAnd(left=l1, right=l2, label=lb):
            (p,) = premises
            i = p.hyp_index(l1)
            _require(i + 1 < len(p.hyps) and p.hyps[i + 1][0] == l2, name,
                     f"{l1} and {l2} must be adjacent")
            _require(lb not in set(p.hyp_labels()) - {l1, l2}, name,
                     f"label {lb} already used")
            hyps = p.hyps[:i] + ((lb, FAnd(p.hyps[i][1], p.hyps[i + 1][1])),) + p.hyps[i + 2:]
            return Sequent(p.ctx, hyps, p.goal)
        case OpRelabel(var=v):
            (p,) = premises
            _require(v in p.ctx_names(), name, f"unknown variable {v}")
            return p
    raise SchemaMismatch(name, "unknown rule")


def _pair_vars(f: Formula, x: str, y: str, p: str) -> Formula:
    g = substitute(f, x, TFst(TVar(p, POS)))
    return substitute(g, y, TSnd(TVar(p, POS)))


def _unpair_vars(f: Formula, p: str, x: str, y: str, node: str) -> Formula:
    def go_t(t: TermExpr) -> TermExpr:
        match t:
            case TFst(TVar(name, pol)) if name == p:
                return TVar(x, pol)
            case TSnd(TVar(name, pol)) if name == p:
                return TVar(y, pol)
            case TVar(name, _):
                _require(name != p, node,
                         f"{p} occurs unprojected; cannot unpair")
                return t
            case TApp(fn, a):
                return TApp(fn, go_t(a))
            case TPair(l, r):
                return TPair(go_t(l), go_t(r))
            case TFst(a):
                return TFst(go_t(a))
            case TSnd(a):
                return TSnd(go_t(a))
        raise TypeError(f"not a TermExpr: {t!r}")

    def go_f(g: Formula) -> Formula:
        match g:
            case FTop():
                return g
            case FHom(cat, s, d):
                return FHom(cat, go_t(s), go_t(d))
            case FAtom(name, args):
                return FAtom(name, tuple(go_t(a) for a in args))
            case FAnd(l, r):
                return FAnd(go_f(l), go_f(r))
            case FImp(l, r):
                return FImp(go_f(l), go_f(r))
            case FEnd(v, c, b):
                return g if v == p else FEnd(v, c, go_f(b))
            case FCoend(v, c, b):
                return g if v == p else FCoend(v, c, go_f(b))
        raise TypeError(f"not a Formula: {g!r}")

    return go_f(f)


# ---------------------------------------------------------------------------
# Checking


def check_derivation(d: Derivation, sig: SignatureTable) -> Sequent:
    """Verify every node against its rule schema; returns the conclusion."""
    if isinstance(d, MACRO_TYPES):
        expansion = expand_macro(d)
        computed = check_derivation(expansion, sig)
        _require(sequents_equal(computed, d.concl), d.rule_name(),
                 f"macro expands to {computed}, claimed {d.concl}")
        check_sequent(d.concl, sig)
        return d.concl
    premises = [check_derivation(s, sig) for s in d.subderivations()]
    computed = _infer(d, sig, premises)
    _require(
        sequents_equal(computed, d.concl),
        d.rule_name(),
        f"rule gives {computed}, node claims {d.concl}",
    )
    check_sequent(d.concl, sig)
    return d.concl


# ---------------------------------------------------------------------------
# Factories: build nodes with computed conclusions


def _mk(cls, sig: SignatureTable, *args, **kw):
    subs = [a for a in args if isinstance(a, Derivation)]
    probe = cls(*args, **kw, concl=None)
    concl = _infer(probe, sig, [s.concl for s in subs])
    return cls(*args, **kw, concl=concl)


def mk_id(sig, ctx, label, formula) -> Id:
    return Id(Sequent(tuple(ctx), ((label, formula),), formula))


def mk_top(sig, ctx, hyps) -> TopIntro:
    return TopIntro(Sequent(tuple(ctx), tuple(hyps), FTop()))


def mk_refl(sig, ctx, var, label_goal_cat=None) -> Refl:
    ctx = tuple(ctx)
    cat = dict(ctx)[var]
    return Refl(var, Sequent(ctx, (), FHom(cat, TVar(var, NEG), TVar(var, POS))))


def mk_assume(sig, key, seq) -> Assume:
    return Assume(key, seq)


def mk_pair(sig, l, r) -> Pair:
    return _mk(Pair, sig, l, r)


def mk_proj1(sig, s) -> Proj1:
    return _mk(Proj1, sig, s)


def mk_proj2(sig, s) -> Proj2:
    return _mk(Proj2, sig, s)


def mk_weaken(sig, s, label, formula, pos) -> Weaken:
    return _mk(Weaken, sig, s, label, formula, pos)


def mk_ctx_weaken(sig, s, var, cat, pos) -> CtxWeaken:
    return _mk(CtxWeaken, sig, s, var, cat, pos)


def mk_curry(sig, s, label) -> Curry:
    return _mk(Curry, sig, s, label)


def mk_uncurry(sig, s, label, pos) -> Uncurry:
    return _mk(Uncurry, sig, s, label, pos)


def mk_reindex(sig, s, var, functor, newvar) -> Reindex:
    return _mk(Reindex, sig, s, var, functor, newvar)


def mk_j(sig, s, source, target, fresh, eq) -> J:
    concl = expand_sequent(s.concl, source, target, fresh, eq, "j")
    node = J(s, source, target, fresh, eq, concl)
    _infer(node, sig, [s.concl])  # re-checks the side conditions
    return node


def mk_jinv(sig, s, source, target, fresh, eq) -> JInv:
    return _mk(JInv, sig, s, source, target, fresh, eq)


def mk_jwitheq(sig, main, eq_deriv, source, target, fresh) -> JWithEq:
    return _mk(JWithEq, sig, main, eq_deriv, source, target, fresh)


def mk_end_intro(sig, s, var) -> EndIntro:
    return _mk(EndIntro, sig, s, var)


def mk_end_elim(sig, s, var, pos) -> EndElim:
    return _mk(EndElim, sig, s, var, pos)


def mk_coend_intro(sig, s, var, label) -> CoendIntro:
    return _mk(CoendIntro, sig, s, var, label)


def mk_coend_elim(sig, s, var, label, pos) -> CoendElim:
    return _mk(CoendElim, sig, s, var, label, pos)


def mk_imp_func(sig, contra, cova, label) -> ImpFunc:
    return _mk(ImpFunc, sig, contra, cova, label)


def mk_exchange(sig, s, pos) -> Exchange:
    return _mk(Exchange, sig, s, pos)


def mk_exchange_hyps(sig, s, pos) -> ExchangeHyps:
    return _mk(ExchangeHyps, sig, s, pos)


def mk_pair_ctx(sig, s, x, y, p) -> PairCtx:
    return _mk(PairCtx, sig, s, x, y, p)


def mk_unpair_ctx(sig, s, p, x, y) -> UnpairCtx:
    return _mk(UnpairCtx, sig, s, p, x, y)


def mk_split_and(sig, s, label, left, right) -> SplitAnd:
    return _mk(SplitAnd, sig, s, label, left, right)


def mk_join_and(sig, s, left, right, label) -> JoinAnd:
    return _mk(JoinAnd, sig, s, left, right, label)


def mk_op_relabel(sig, s, var) -> OpRelabel:
    return _mk(OpRelabel, sig, s, var)


# ---------------------------------------------------------------------------
# Macro expansion


def expand_macro(d: Derivation) -> Derivation:
    """Rewrite a macro node into the primitive tree it abbreviates."""
    sig = _MACRO_SIG
    match d:
        case MYoneda(cat=c, atom=P, direction=dr, a=a, binder=x, opened=y,
                     fresh=z, eq=e, hyp=h):
            atom = lambda v: FAtom(P, (TVar(v, POS),))
            hom = lambda s, t: FHom(c, TVar(s, NEG), TVar(t, POS))
            if dr == "intro":
                base = mk_id(sig, ((z, c),), h, atom(z))
                jj = mk_j(sig, base, a, y, z, e)
                cu = mk_curry(sig, jj, e)
                return mk_end_intro(sig, cu, y)
            if dr == "elim":
                w = FEnd(x, c, FImp(hom(a, x), atom(x)))
                base = mk_id(sig, ((a, c),), h, w)
                ee = mk_end_elim(sig, base, y, 1)
                uc = mk_uncurry(sig, ee, e, 0)
                # contract back onto the advertised outer variable
                return mk_jinv(sig, uc, a, y, a, e)
            raise MacroError(f"yoneda: unknown direction {dr!r}")
        case MCoYoneda(cat=c, atom=P, direction=dr, a=a, binder=x, opened=y,
                       fresh=z, eq=e, hyp=h):
            atom = lambda v: FAtom(P, (TVar(v, POS),))
            if dr == "intro":
                w = FCoend(x, c, FAnd(FHom(c, TVar(x, NEG), TVar(a, POS)), atom(x)))
                base = mk_id(sig, ((a, c),), h, w)
                ce = mk_coend_elim(sig, base, y, h, 1)
                sp = mk_split_and(sig, ce, h, e, "k")
                return mk_jinv(sig, sp, y, a, a, e)
            if dr == "elim":
                base = mk_id(sig, ((z, c),), "k", atom(z))
                jj = mk_j(sig, base, y, a, z, e)
                ja = mk_join_and(sig, jj, e, "k", h)
                ci = mk_coend_intro(sig, ja, y, h)
                return ci
            raise MacroError(f"coyoneda: unknown direction {dr!r}")
        case MFubini(cat1=c1, cat2=c2, atom=Q, form=form, x=x, y=y, p=p, hyp=h):
            body = FAtom(Q, (TVar(x, NEG), TVar(x, POS), TVar(y, NEG), TVar(y, POS)))
            inner = FEnd(x, c1, FEnd(y, c2, body))
            x1, y1 = x + "1", y + "1"
            base = mk_id(sig, (), h, inner)
            e1 = mk_end_elim(sig, base, x1, 0)
            e2 = mk_end_elim(sig, e1, y1, 1)
            if form == "exchange":
                ex = mk_exchange(sig, e2, 0)
                i1 = mk_end_intro(sig, ex, x1)
                return mk_end_intro(sig, i1, y1)
            if form == "combine":
                pc = mk_pair_ctx(sig, e2, x1, y1, p)
                return mk_end_intro(sig, pc, p)
            raise MacroError(f"fubini: unknown form {form!r}")
        case MCoendFrobenius(sub=s, direction=dr, label=lb, other=ot, opened=xo):
            if dr == "split":
                coend = s.concl.hyp(lb)
                if not (isinstance(coend, FCoend) and isinstance(coend.body, FAnd)):
                    raise MacroError(
                        f"coend-frobenius: hypothesis {lb} is not a coend of a product"
                    )
                m1 = mk_coend_elim(sig, s, xo, lb, len(s.concl.ctx))
                m2 = mk_split_and(sig, m1, lb, "@p", "@g")
                m3 = mk_curry(sig, m2, "@p")
                m4 = mk_coend_intro(sig, m3, xo, "@g")
                m5 = mk_uncurry(sig, m4, lb, 0)
                return _relabel(m5, {"@g": ot})
            if dr == "join":
                coend = s.concl.hyp(ot)
                if not isinstance(coend, FCoend):
                    raise MacroError(f"coend-frobenius: hypothesis {ot} is not a coend")
                r1 = mk_curry(sig, s, lb)
                r2 = mk_coend_elim(sig, r1, xo, ot, len(r1.concl.ctx))
                r3 = mk_uncurry(sig, r2, lb, r2.concl.hyp_index(ot))
                r4 = mk_join_and(sig, r3, lb, ot, "@c")
                r5 = mk_coend_intro(sig, r4, xo, "@c")
                return _relabel(r5, {"@c": lb})
            raise MacroError(f"coend-frobenius: unknown direction {dr!r}")
        case MHomRelAdj(sub=s, direction=dr, source=a, target=b, fresh=z, eq=e):
            if dr == "intro":
                for l, f in s.concl.hyps:
                    if z in free_vars(f):
                        raise MacroError(
                            f"hom-rel-adj: hypothesis {l} depends on the equality "
                            f"variable {z}"
                        )
                return mk_j(sig, s, a, b, z, e)
            if dr == "elim":
                for l, f in s.concl.hyps:
                    if l == e:
                        continue
                    bad = free_vars(f) & {a, b}
                    if bad:
                        raise MacroError(
                            f"hom-rel-adj: hypothesis {l} depends on the equality "
                            f"variable {sorted(bad)[0]}"
                        )
                return mk_jinv(sig, s, a, b, z, e)
            raise MacroError(f"hom-rel-adj: unknown direction {dr!r}")
    raise MacroError(f"not a macro: {d!r}")


_MACRO_SIG = SignatureTable()  # reindex-free expansions never consult it


def _relabel(d: Derivation, mapping: dict) -> Derivation:
    """Rename internal ``@``-reserved hypothesis labels across a tree."""
    if not mapping:
        return d

    def fix_field(v):
        if isinstance(v, Derivation):
            return go(v)
        if isinstance(v, Sequent):
            return Sequent(
                v.ctx, tuple((mapping.get(l, l), f) for l, f in v.hyps), v.goal
            )
        if isinstance(v, str) and v in mapping:
            return mapping[v]
        return v

    def go(node: Derivation) -> Derivation:
        kw = {f.name: fix_field(getattr(node, f.name)) for f in fields(node)}
        return dataclasses.replace(node, **kw)

    return go(d)


def mk_macro(sig: SignatureTable, cls, *args, **kw) -> Derivation:
    """Build a macro node, computing its conclusion by expansion."""
    probe = cls(*args, concl=None, **kw)
    concl = check_derivation(expand_macro(probe), sig)
    return dataclasses.replace(probe, concl=concl)


# ---------------------------------------------------------------------------
# Equality judgements


@dataclass(frozen=True)
class EqJudgement:
    """Two derivations claimed extensionally equal, same conclusion sequent."""

    left: Derivation
    right: Derivation

    def conclusion(self, sig: SignatureTable) -> Sequent:
        lc = check_derivation(self.left, sig)
        rc = check_derivation(self.right, sig)
        if not sequents_equal(lc, rc):
            raise SchemaMismatch("eq-judgement", f"sides conclude {lc} vs {rc}")
        return lc


@dataclass(frozen=True)
class Direct:
    """Hand the judgement to the semantics for extensional discharge."""


@dataclass(frozen=True)
class JEqStrategy:
    """Contract a hom hypothesis on both sides: it is enough to prove the
    diagonal case with the equality replaced by the identity."""

    source: str
    target: str
    fresh: str
    eq: str


def check_eq_judgement(j: EqJudgement, sig: SignatureTable, strategy) -> list[EqJudgement]:
    """Reduce a judgement to the obligations the chosen strategy leaves open.

    ``JEqStrategy`` precomposes both sides with the identity equality and
    identifies the endpoint indices (failing if the eliminated hypothesis
    does not satisfy the hom-elimination side conditions); ``Direct`` leaves
    the judgement for extensional checking.  Syntactically identical sides
    discharge immediately.
    """
    j.conclusion(sig)
    if j.left == j.right:
        return []
    match strategy:
        case Direct():
            return [j]
        case JEqStrategy(source=a, target=b, fresh=z, eq=e):
            left = mk_jinv(sig, j.left, a, b, z, e)
            right = mk_jinv(sig, j.right, a, b, z, e)
            return [EqJudgement(left, right)]
    raise SchemaMismatch("eq-judgement", f"unknown strategy {strategy!r}")


# ---------------------------------------------------------------------------
# Bounded backward proof search (used by the directedness regression)


def search_proofs(seq: Sequent, sig: SignatureTable, depth: int,
                  _seen: frozenset = frozenset()) -> list[Derivation]:
    """All derivations of ``seq`` of height <= depth over the closed rules.

    The search inverts every rule whose premise is determined by the
    conclusion and its parameters; projection premises draw their unknown
    factor from the sequent's own subformulas plus top.  This is the
    bounded root-rule search behind the negative symmetry property.
    """
    if depth <= 0:
        return []
    key = str(seq)
    if key in _seen:
        return []
    seen = _seen | {key}
    found: list[Derivation] = []

    def attempt(build):
        try:
            return build()
        except (SchemaMismatch, VarianceViolation, Exception):
            return None

    # closing rules
    if len(seq.hyps) == 1 and alpha_equal(seq.hyps[0][1], seq.goal):
        found.append(Id(seq))
    if isinstance(seq.goal, FTop):
        found.append(TopIntro(seq))
    g = seq.goal
    if (
        isinstance(g, FHom)
        and not seq.hyps
        and isinstance(g.src, TVar)
        and isinstance(g.dst, TVar)
        and g.src.pol is NEG
        and g.dst.pol is POS
        and g.src.name == g.dst.name
    ):
        found.append(Refl(g.src.name, seq))

    def recurse(premise: Sequent, wrap):
        for sub in search_proofs(premise, sig, depth - 1, seen):
            node = attempt(lambda: wrap(sub))
            if node is not None:
                found.append(node)

    # J backward: determined premise when the side conditions hold
    for label, f in seq.hyps:
        if (
            isinstance(f, FHom)
            and isinstance(f.src, TVar)
            and isinstance(f.dst, TVar)
            and f.src.pol is NEG
            and f.dst.pol is POS
            and f.src.name != f.dst.name
            and f.src.name in seq.ctx_names()
            and f.dst.name in seq.ctx_names()
        ):
            a, b = f.src.name, f.dst.name
            z = fresh_name("z", set(seq.ctx_names()))
            try:
                premise = contract_sequent(seq, a, b, z, label, "search")
            except (SchemaMismatch, VarianceViolation):
                continue
            recurse(premise, lambda s, a=a, b=b, z=z, label=label:
                    J(s, a, b, z, label, seq))

    # JInv backward: split any context variable
    for v, _ in seq.ctx:
        taken = set(seq.ctx_names()) | {l for l, _ in seq.hyps}
        a = fresh_name(v + "l", taken)
        b = fresh_name(v + "r", taken | {a})
        e = fresh_name("e", set(seq.hyp_labels()))
        try:
            premise = expand_sequent(seq, a, b, v, e, "search")
        except SchemaMismatch:
            continue
        recurse(premise, lambda s, a=a, b=b, v=v, e=e: JInv(s, a, b, v, e, seq))

    # structural / connective rules with determined premises
    for i, (label, f) in enumerate(seq.hyps):
        premise = Sequent(seq.ctx, seq.hyps[:i] + seq.hyps[i + 1:], seq.goal)
        recurse(premise, lambda s, label=label, f=f, i=i:
                Weaken(s, label, f, i, seq))
        premise = Sequent(seq.ctx, seq.hyps[:i] + seq.hyps[i + 1:],
                          FImp(f, seq.goal))
        recurse(premise, lambda s, label=label, i=i: Uncurry(s, label, i, seq))
    if isinstance(seq.goal, FImp):
        lbl = fresh_name("h", set(seq.hyp_labels()))
        premise = Sequent(seq.ctx, ((lbl, seq.goal.left),) + seq.hyps,
                          seq.goal.right)
        recurse(premise, lambda s, lbl=lbl: Curry(s, lbl, seq))
    if isinstance(seq.goal, FAnd):
        lefts = search_proofs(Sequent(seq.ctx, seq.hyps, seq.goal.left),
                              sig, depth - 1, seen)
        rights = search_proofs(Sequent(seq.ctx, seq.hyps, seq.goal.right),
                               sig, depth - 1, seen)
        for l in lefts:
            for r in rights:
                found.append(Pair(l, r, seq))
    pool = _subformula_pool(seq)
    for x in pool:
        premise = Sequent(seq.ctx, seq.hyps, FAnd(seq.goal, x))
        recurse(premise, lambda s: Proj1(s, seq))
        premise = Sequent(seq.ctx, seq.hyps, FAnd(x, seq.goal))
        recurse(premise, lambda s: Proj2(s, seq))

    # quantifier rules
    if isinstance(seq.goal, FEnd):
        v2 = fresh_name(seq.goal.var, set(seq.ctx_names()))
        premise = Sequent(
            seq.ctx + ((v2, normalize(seq.goal.cat)),),
            seq.hyps,
            rename_var(seq.goal.body, seq.goal.var, v2),
        )
        recurse(premise, lambda s, v2=v2: EndIntro(s, v2, seq))
    for i, (v, c) in enumerate(seq.ctx):
        if any(v in free_vars(f) for _, f in seq.hyps):
            continue
        premise = Sequent(
            seq.ctx[:i] + seq.ctx[i + 1:], seq.hyps, FEnd(v, c, seq.goal)
        )
        recurse(premise, lambda s, v=v, i=i: EndElim(s, v, i, seq))
    for label, f in seq.hyps:
        if isinstance(f, FCoend):
            v2 = fresh_name(f.var, set(seq.ctx_names()))
            hyps = tuple(
                (l, rename_var(f.body, f.var, v2) if l == label else g)
                for l, g in seq.hyps
            )
            premise = Sequent(seq.ctx + ((v2, normalize(f.cat)),), hyps, seq.goal)
            recurse(premise, lambda s, v2=v2, label=label:
                    CoendIntro(s, v2, label, seq))
    for i, (v, c) in enumerate(seq.ctx):
        for label, f in seq.hyps:
            if v in free_vars(seq.goal):
                continue
            if any(v in free_vars(g) for l, g in seq.hyps if l != label):
                continue
            premise = Sequent(
                seq.ctx[:i] + seq.ctx[i + 1:],
                tuple((l, FCoend(v, c, g) if l == label else g)
                      for l, g in seq.hyps),
                seq.goal,
            )
            recurse(premise, lambda s, v=v, i=i, label=label:
                    CoendElim(s, v, label, i, seq))

    # hypothesis product structure
    for i in range(len(seq.hyps) - 1):
        (l1, f1), (l2, f2) = seq.hyps[i], seq.hyps[i + 1]
        lbl = fresh_name("h", set(seq.hyp_labels()))
        premise = Sequent(
            seq.ctx, seq.hyps[:i] + ((lbl, FAnd(f1, f2)),) + seq.hyps[i + 2:],
            seq.goal,
        )
        recurse(premise, lambda s, l1=l1, l2=l2, lbl=lbl:
                SplitAnd(s, lbl, l1, l2, seq))
    for i, (label, f) in enumerate(seq.hyps):
        if isinstance(f, FAnd):
            l1 = fresh_name("hl", set(seq.hyp_labels()))
            l2 = fresh_name("hr", set(seq.hyp_labels()) | {l1})
            premise = Sequent(
                seq.ctx,
                seq.hyps[:i] + ((l1, f.left), (l2, f.right)) + seq.hyps[i + 1:],
                seq.goal,
            )
            recurse(premise, lambda s, l1=l1, l2=l2, label=label:
                    JoinAnd(s, l1, l2, label, seq))

    # context and hypothesis exchange
    for i in range(len(seq.ctx) - 1):
        ctx = list(seq.ctx)
        ctx[i], ctx[i + 1] = ctx[i + 1], ctx[i]
        premise = Sequent(tuple(ctx), seq.hyps, seq.goal)
        recurse(premise, lambda s, i=i: Exchange(s, i, seq))
    for i in range(len(seq.hyps) - 1):
        hyps = list(seq.hyps)
        hyps[i], hyps[i + 1] = hyps[i + 1], hyps[i]
        premise = Sequent(seq.ctx, tuple(hyps), seq.goal)
        recurse(premise, lambda s, i=i: ExchangeHyps(s, i, seq))

    return found


def _subformula_pool(seq: Sequent) -> list[Formula]:
    pool: list[Formula] = [FTop()]
    stack: list[Formula] = [f for _, f in seq.hyps] + [seq.goal]
    while stack:
        f = stack.pop()
        if all(not alpha_equal(f, g) for g in pool):
            pool.append(f)
        match f:
            case FAnd(l, r) | FImp(l, r):
                stack.extend((l, r))
            case FEnd(_, _, b) | FCoend(_, _, b):
                stack.append(b)
            case _:
                pass
    return pool
