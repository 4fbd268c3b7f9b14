"""Derived notation and its expansion into the core language.

Each sugared node has a total expansion into core terms/formulas.  Fresh
reserved names are used for every binder an expansion introduces, so no
expansion can capture a variable of its operands or leak an unbound
reserved name.  Expansion is idempotent: core input comes back unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .syntax import (
    And,
    CondSingleton,
    Empty,
    Eq,
    ExistsIn,
    Expr,
    FalseF,
    ForallIn,
    Formula,
    FreshNames,
    Implies,
    In,
    IndexedUnion,
    IsSet,
    Or,
    Term,
    TrueF,
    UniqueElement,
    Var,
    free_vars,
    subst,
)


class SugarNode:
    """Mixin marking nodes that ``expand`` rewrites away."""

    def lower(self, fresh: FreshNames) -> Expr:
        raise NotImplementedError


@dataclass(frozen=True)
class Iff(SugarNode, Formula):
    left: Formula
    right: Formula

    _SHAPE = (((), "left"), ((), "right"))

    def lower(self, fresh: FreshNames) -> Formula:
        return And(Implies(self.left, self.right), Implies(self.right, self.left))


@dataclass(frozen=True)
class ExistsUnique(SugarNode, Formula):
    var: str
    domain: Term
    body: Formula

    _SHAPE = (((), "domain"), (("var",), "body"))

    def lower(self, fresh: FreshNames) -> Formula:
        y = fresh.fresh(free_vars(self.body) | free_vars(self.domain) | {self.var})
        other = subst(self.body, self.var, Var(y))
        return ExistsIn(
            self.var,
            self.domain,
            And(
                self.body,
                ForallIn(y, self.domain, Implies(other, Eq(Var(y), Var(self.var)))),
            ),
        )


@dataclass(frozen=True)
class Subseteq(SugarNode, Formula):
    left: Term
    right: Term

    _SHAPE = (((), "left"), ((), "right"))

    def lower(self, fresh: FreshNames) -> Formula:
        x = fresh.fresh(free_vars(self.left) | free_vars(self.right))
        return ForallIn(x, self.left, In(Var(x), self.right))


@dataclass(frozen=True)
class Separation(SugarNode, Term):
    """The set of ``var`` in ``domain`` satisfying ``predicate``."""

    var: str
    domain: Term
    predicate: Formula

    _SHAPE = (((), "domain"), (("var",), "predicate"))

    def lower(self, fresh: FreshNames) -> Term:
        return IndexedUnion(
            self.var, self.domain, CondSingleton(Var(self.var), self.predicate)
        )


@dataclass(frozen=True)
class Singleton(SugarNode, Term):
    item: Term

    _SHAPE = (((), "item"),)

    def lower(self, fresh: FreshNames) -> Term:
        return CondSingleton(self.item, TrueF())


@dataclass(frozen=True)
class FiniteSet(SugarNode, Term):
    items: tuple[Term, ...]

    def scoped_children(self):
        return tuple(((), item) for item in self.items)

    def with_parts(self, groups):
        return FiniteSet(tuple(child for _, child in groups))

    def lower(self, fresh: FreshNames) -> Term:
        return _left_union([CondSingleton(it, TrueF()) for it in self.items])


@dataclass(frozen=True)
class Replacement(SugarNode, Term):
    """Image set {body | binders...} with an optional filter predicate.

    ``binders`` is a telescope: each domain may mention the variables bound
    before it; ``body`` and ``filter`` may mention them all.
    """

    binders: tuple[tuple[str, Term], ...]
    body: Term
    filter: Optional[Formula] = None

    def __post_init__(self) -> None:
        if not self.binders:
            raise ValueError("replacement needs at least one binder")
        names = [x for x, _ in self.binders]
        if len(set(names)) != len(names):
            raise ValueError("replacement binders must be distinct")

    def scoped_children(self):
        out = []
        seen: tuple[str, ...] = ()
        for x, dom in self.binders:
            out.append((seen, dom))
            seen = seen + (x,)
        out.append((seen, self.body))
        if self.filter is not None:
            out.append((seen, self.filter))
        return tuple(out)

    def with_parts(self, groups):
        groups = list(groups)
        k = len(self.binders)
        # Binder i's final name is its first appearance as a scoping name,
        # i.e. position i+1 of the telescope (or the body group when i is
        # the last binder).
        new_names = list(groups[k][0])
        new_binders = tuple(
            (new_names[i], groups[i][1]) for i in range(k)
        )
        body = groups[k][1]
        filt = groups[k + 1][1] if self.filter is not None else None
        return Replacement(new_binders, body, filt)

    def _substitute_parts(self, var_map, ph_map, fresh):
        # A name equal to binder i may still occur free in domains 0..i,
        # so the map is thinned per child; renames of clashing binders are
        # decided once so every child in a binder's scope agrees.
        from .syntax import _substitute, free_vars as fv, placeholder_indices

        names = [x for x, _ in self.binders]
        node_fv = fv(self)
        live = {k: v for k, v in var_map.items() if k in node_fv}
        live_ph = {
            i: t for i, t in ph_map.items() if i in placeholder_indices(self)
        }
        if not live and not live_ph:
            return self
        incoming: frozenset[str] = frozenset()
        for image in (*live.values(), *live_ph.values()):
            incoming |= fv(image)
        renames: dict[str, Term] = {}
        new_names: list[str] = []
        for x in names:
            if x in incoming:
                avoid = incoming | node_fv | set(names) | set(new_names)
                nx = fresh.fresh(avoid)
                renames[x] = Var(nx)
                new_names.append(nx)
            else:
                new_names.append(x)

        def map_for(scoping: list[str]) -> dict[str, Term]:
            out = {k: v for k, v in live.items() if k not in scoping}
            for x in scoping:
                if x in renames:
                    out[x] = renames[x]
            return out

        out_binders = []
        for i, ((x, dom), nx) in enumerate(zip(self.binders, new_names)):
            dom_new = _substitute(dom, map_for(names[:i]), live_ph, fresh)
            out_binders.append((nx, dom_new))
        inner = map_for(names)
        body = _substitute(self.body, inner, live_ph, fresh)
        filt = (
            _substitute(self.filter, inner, live_ph, fresh)
            if self.filter is not None
            else None
        )
        return Replacement(tuple(out_binders), body, filt)

    def _canonize_parts(self, env, next_name):
        from .syntax import _canonize

        out_binders = []
        inner_env = dict(env)
        for x, dom in self.binders:
            dom_c = _canonize(dom, inner_env, next_name)
            nx = next_name()
            inner_env[x] = nx
            out_binders.append((nx, dom_c))
        body = _canonize(self.body, inner_env, next_name)
        filt = (
            _canonize(self.filter, inner_env, next_name)
            if self.filter is not None
            else None
        )
        return Replacement(tuple(out_binders), body, filt)

    def lower(self, fresh: FreshNames) -> Term:
        condition = self.filter if self.filter is not None else TrueF()
        core: Term = CondSingleton(self.body, condition)
        for x, dom in reversed(self.binders):
            core = IndexedUnion(x, dom, core)
        return core


@dataclass(frozen=True)
class Intersection(SugarNode, Term):
    left: Term
    right: Term

    _SHAPE = (((), "left"), ((), "right"))

    def lower(self, fresh: FreshNames) -> Term:
        x = fresh.fresh(free_vars(self.left) | free_vars(self.right))
        return IndexedUnion(
            x, self.left, CondSingleton(Var(x), In(Var(x), self.right))
        )


@dataclass(frozen=True)
class Iota(SugarNode, Term):
    """The unique element of ``domain`` satisfying ``predicate``.

    No definedness guard is added: a non-singleton selection denotes the
    empty set by the Nonsense Convention.
    """

    var: str
    domain: Term
    predicate: Formula

    _SHAPE = (((), "domain"), (("var",), "predicate"))

    def lower(self, fresh: FreshNames) -> Term:
        return UniqueElement(
            IndexedUnion(
                self.var, self.domain, CondSingleton(Var(self.var), self.predicate)
            )
        )


@dataclass(frozen=True)
class BigUnion(SugarNode, Term):
    family: Term

    _SHAPE = (((), "family"),)

    def lower(self, fresh: FreshNames) -> Term:
        x = fresh.fresh(free_vars(self.family))
        return IndexedUnion(x, self.family, Var(x))


@dataclass(frozen=True)
class NC(SugarNode, Formula):
    """``prerequisite`` is a Nonsense Convention prerequisite for ``item``:
    either it holds, or the item is a set whose inhabitation implies it."""

    prerequisite: Formula
    item: Term

    _SHAPE = (((), "prerequisite"), ((), "item"))

    def lower(self, fresh: FreshNames) -> Formula:
        x = fresh.fresh(free_vars(self.prerequisite) | free_vars(self.item))
        return Or(
            self.prerequisite,
            And(IsSet(self.item), ForallIn(x, self.item, self.prerequisite)),
        )


class _ItemTuple:
    """Shared machinery for the n-ary union/or/and nodes."""

    def scoped_children(self):
        return tuple(((), item) for item in self.items)

    def with_parts(self, groups):
        return type(self)(tuple(child for _, child in groups))


@dataclass(frozen=True)
class FiniteUnion(_ItemTuple, SugarNode, Term):
    items: tuple[Term, ...]

    def lower(self, fresh: FreshNames) -> Term:
        return _left_union(list(self.items))


@dataclass(frozen=True)
class FiniteOr(_ItemTuple, SugarNode, Formula):
    items: tuple[Formula, ...]

    def lower(self, fresh: FreshNames) -> Formula:
        return _left_fold(Or, FalseF(), list(self.items))


@dataclass(frozen=True)
class FiniteAnd(_ItemTuple, SugarNode, Formula):
    items: tuple[Formula, ...]

    def lower(self, fresh: FreshNames) -> Formula:
        return _left_fold(And, TrueF(), list(self.items))


def _left_union(items: list[Term]) -> Term:
    from .syntax import Union

    return _left_fold(Union, Empty(), items)


def _left_fold(pair, unit, items):
    if not items:
        return unit
    acc = items[0]
    for item in items[1:]:
        acc = pair(acc, item)
    return acc


# ---------------------------------------------------------------------------


def expand(e: Expr) -> Expr:
    """Rewrite every sugared node into the core language.

    Free variables are preserved exactly; introduced binders use fresh
    reserved names; n-ary union/or/and of zero operands become the empty
    set, False and True, and longer runs associate to the left.
    """
    return _expand(e, FreshNames())


def _expand(e: Expr, fresh: FreshNames) -> Expr:
    children = e.scoped_children()
    if children:
        e = e.with_parts(
            tuple((binders, _expand(child, fresh)) for binders, child in children)
        )
    if isinstance(e, SugarNode):
        return e.lower(fresh)
    return e


def is_core(e: Expr) -> bool:
    """True when no sugared node occurs anywhere in the expression."""
    if isinstance(e, SugarNode):
        return False
    return all(is_core(child) for _, child in e.scoped_children())
