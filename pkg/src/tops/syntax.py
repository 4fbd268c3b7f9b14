"""Core term and formula ASTs for TOPS, with binding-aware operations.

Every quantifier in the language is restricted: there is no way to write
"for all x" without naming a set the variable ranges over.  Terms and
formulas are mutually recursive immutable trees.  Binder discipline is
captured once, in each node's scope table, so that free-variable
computation, capture-avoiding substitution, alpha-equivalence and
well-formedness all share a single notion of scoping.

Names beginning with an underscore are reserved for machine-generated
variables (substitution renames, expansion binders, canonical forms);
the surface parser rejects them in user input.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import ClassVar, Iterable, Union as TyUnion

# ---------------------------------------------------------------------------
# Base classes and the scope protocol

# A scope table entry is (binder_field_names, child_field_name): the child
# expression is in the scope of exactly those binder fields.
ShapeEntry = tuple[tuple[str, ...], str]


class Expr:
    """Base class of terms and formulas (including sugared nodes)."""

    # Overridden per subclass; leaves keep the empty tuple.
    _SHAPE: ClassVar[tuple[ShapeEntry, ...]] = ()

    def scoped_children(self) -> tuple[tuple[tuple[str, ...], "Expr"], ...]:
        """Child expressions paired with the binder names scoping them."""
        return tuple(
            (tuple(getattr(self, b) for b in binders), getattr(self, field))
            for binders, field in self._SHAPE
        )

    def with_parts(
        self, groups: Iterable[tuple[tuple[str, ...], "Expr"]]
    ) -> "Expr":
        """Rebuild this node with new binder names and children.

        ``groups`` must align with ``scoped_children()``.
        """
        kwargs: dict[str, object] = {}
        for (binders, field), (new_binders, new_child) in zip(self._SHAPE, groups):
            for name, value in zip(binders, new_binders):
                kwargs[name] = value
            kwargs[field] = new_child
        return dataclasses.replace(self, **kwargs)


class Term(Expr):
    """Marker base class for set-denoting expressions."""


class Formula(Expr):
    """Marker base class for propositional expressions."""


def is_reserved_name(name: str) -> bool:
    """True for the machine-generated namespace (leading underscore)."""
    return name.startswith("_")


# ---------------------------------------------------------------------------
# Core terms


@dataclass(frozen=True)
class Var(Term):
    name: str


@dataclass(frozen=True)
class Placeholder(Term):
    """Numbered slot of an abstracted term/formula; never a variable.

    Placeholders exist only inside abstraction bodies (scheme and rule
    parameters); a checked sequent never contains one.
    """

    index: int


@dataclass(frozen=True)
class Empty(Term):
    pass


@dataclass(frozen=True)
class Union(Term):
    left: Term
    right: Term

    _SHAPE = (((), "left"), ((), "right"))


@dataclass(frozen=True)
class IndexedUnion(Term):
    """Union of the family ``body`` as ``var`` ranges over ``domain``."""

    var: str
    domain: Term
    body: Term

    _SHAPE = (((), "domain"), (("var",), "body"))


@dataclass(frozen=True)
class CondSingleton(Term):
    """{item} when the condition holds, the empty set otherwise."""

    item: Term
    condition: Formula

    _SHAPE = (((), "item"), ((), "condition"))


@dataclass(frozen=True)
class UniqueElement(Term):
    inner: Term

    _SHAPE = (((), "inner"),)


@dataclass(frozen=True)
class IterReach(Term):
    """Closure of ``start`` under the unary operation ``var . step``."""

    start: Term
    var: str
    step: Term

    _SHAPE = (((), "start"), (("var",), "step"))


@dataclass(frozen=True)
class WfRec(Term):
    """Well-founded recursion over ``carrier`` along ``relation``.

    ``relation`` is the binary relation abstracted over (rel_left,
    rel_right); ``body`` computes the result at ``rec_elem`` from the set
    ``rec_values`` of recursive results; ``start`` is the element the
    recursion is evaluated at.
    """

    carrier: Term
    rel_left: str
    rel_right: str
    relation: Formula
    rec_elem: str
    rec_values: str
    body: Term
    start: Term

    _SHAPE = (
        ((), "carrier"),
        (("rel_left", "rel_right"), "relation"),
        (("rec_elem", "rec_values"), "body"),
        ((), "start"),
    )

    def __post_init__(self) -> None:
        if self.rel_left == self.rel_right:
            raise ValueError("relation binder pair must use distinct names")
        if self.rec_elem == self.rec_values:
            raise ValueError("recursion binder pair must use distinct names")


@dataclass(frozen=True)
class Powerset(Term):
    inner: Term

    _SHAPE = (((), "inner"),)


# ---------------------------------------------------------------------------
# Core formulas


@dataclass(frozen=True)
class FalseF(Formula):
    pass


@dataclass(frozen=True)
class TrueF(Formula):
    pass


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula

    _SHAPE = (((), "left"), ((), "right"))


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula

    _SHAPE = (((), "left"), ((), "right"))


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula

    _SHAPE = (((), "left"), ((), "right"))


@dataclass(frozen=True)
class Not(Formula):
    operand: Formula

    _SHAPE = (((), "operand"),)


@dataclass(frozen=True)
class ExistsIn(Formula):
    var: str
    domain: Term
    body: Formula

    _SHAPE = (((), "domain"), (("var",), "body"))


@dataclass(frozen=True)
class ForallIn(Formula):
    var: str
    domain: Term
    body: Formula

    _SHAPE = (((), "domain"), (("var",), "body"))


@dataclass(frozen=True)
class Eq(Formula):
    left: Term
    right: Term

    _SHAPE = (((), "left"), ((), "right"))


@dataclass(frozen=True)
class IsSet(Formula):
    inner: Term

    _SHAPE = (((), "inner"),)


@dataclass(frozen=True)
class In(Formula):
    item: Term
    domain: Term

    _SHAPE = (((), "item"), ((), "domain"))


@dataclass(frozen=True)
class WfElem(Formula):
    """``item`` is a well-founded element of ``carrier`` along ``relation``."""

    item: Term
    carrier: Term
    rel_left: str
    rel_right: str
    relation: Formula

    _SHAPE = (
        ((), "item"),
        ((), "carrier"),
        (("rel_left", "rel_right"), "relation"),
    )

    def __post_init__(self) -> None:
        if self.rel_left == self.rel_right:
            raise ValueError("relation binder pair must use distinct names")


# ---------------------------------------------------------------------------
# Free variables and placeholders


def free_vars(e: Expr) -> frozenset[str]:
    """The free variables of a term or formula, respecting all binders."""
    if isinstance(e, Var):
        return frozenset((e.name,))
    out: frozenset[str] = frozenset()
    for binders, child in e.scoped_children():
        out |= free_vars(child) - frozenset(binders)
    return out


def placeholder_indices(e: Expr) -> frozenset[int]:
    """Indices of all placeholders occurring in the expression."""
    if isinstance(e, Placeholder):
        return frozenset((e.index,))
    out: frozenset[int] = frozenset()
    for _, child in e.scoped_children():
        out |= placeholder_indices(child)
    return out


# ---------------------------------------------------------------------------
# Well-formedness: the "term over gamma" / "formula over gamma" judgments

DeclContext = frozenset[str]


def is_term_over(gamma: Iterable[str], t: Term) -> bool:
    """Whether ``t`` is a term over the declaration context ``gamma``."""
    return _is_over(frozenset(gamma), t)


def is_formula_over(gamma: Iterable[str], phi: Formula) -> bool:
    """Whether ``phi`` is a formula over the declaration context ``gamma``."""
    return _is_over(frozenset(gamma), phi)


def _is_over(gamma: frozenset[str], e: Expr) -> bool:
    match e:
        case Var(name):
            return name in gamma
        case Placeholder() | Empty() | FalseF() | TrueF():
            return True
        case Union(a, b) | Or(a, b) | And(a, b) | Implies(a, b) | Eq(a, b) | In(a, b):
            return _is_over(gamma, a) and _is_over(gamma, b)
        case CondSingleton(r, phi):
            return _is_over(gamma, r) and _is_over(gamma, phi)
        case UniqueElement(a) | Powerset(a) | IsSet(a) | Not(a):
            return _is_over(gamma, a)
        case IndexedUnion(x, dom, body) | ExistsIn(x, dom, body) | ForallIn(x, dom, body):
            return _is_over(gamma, dom) and _is_over(gamma | {x}, body)
        case IterReach(start, x, step):
            return _is_over(gamma, start) and _is_over(gamma | {x}, step)
        case WfElem(s, carrier, x, y, rel):
            return (
                _is_over(gamma, s)
                and _is_over(gamma, carrier)
                and _is_over(gamma | {x, y}, rel)
            )
        case WfRec(carrier, x, y, rel, z, w, body, start):
            return (
                _is_over(gamma, carrier)
                and _is_over(gamma | {x, y}, rel)
                and _is_over(gamma | {z, w}, body)
                and _is_over(gamma, start)
            )
        case _:
            # Sugared nodes: derived judgment through the scope tables.
            return all(
                _is_over(gamma | frozenset(binders), child)
                for binders, child in e.scoped_children()
            )


# ---------------------------------------------------------------------------
# Fresh names


class FreshNames:
    """Deterministic source of reserved names, scoped to one operation."""

    def __init__(self, prefix: str = "_v") -> None:
        self.prefix = prefix
        self.counter = 0

    def fresh(self, avoid: frozenset[str] | set[str]) -> str:
        while True:
            name = f"{self.prefix}{self.counter}"
            self.counter += 1
            if name not in avoid:
                return name


# ---------------------------------------------------------------------------
# Capture-avoiding substitution

SubstMap = dict[str, Term]
PlaceholderMap = dict[int, Term]


def subst(e: Expr, var: str, replacement: Term) -> Expr:
    """Capture-avoiding substitution of ``replacement`` for ``var``.

    Bound variables are renamed to fresh reserved names exactly when they
    would capture a free variable of an incoming term; the result is
    alpha-equivalent regardless of the renaming strategy.
    """
    return _substitute(e, {var: replacement}, {}, FreshNames())


def subst_all(e: Expr, mapping: SubstMap) -> Expr:
    """Simultaneous capture-avoiding substitution of terms for variables."""
    return _substitute(e, dict(mapping), {}, FreshNames())


def _substitute(
    e: Expr, var_map: SubstMap, ph_map: PlaceholderMap, fresh: FreshNames
) -> Expr:
    if isinstance(e, Var):
        return var_map.get(e.name, e)
    if isinstance(e, Placeholder):
        return ph_map.get(e.index, e)
    if not e.scoped_children():
        return e
    return e._substitute_parts(var_map, ph_map, fresh)


def _default_substitute_parts(
    self: Expr, var_map: SubstMap, ph_map: PlaceholderMap, fresh: FreshNames
) -> Expr:
    groups = []
    for binders, child in self.scoped_children():
        groups.append(_subst_under(binders, child, var_map, ph_map, fresh))
    return self.with_parts(groups)


def _subst_under(
    binders: tuple[str, ...],
    child: Expr,
    var_map: SubstMap,
    ph_map: PlaceholderMap,
    fresh: FreshNames,
) -> tuple[tuple[str, ...], Expr]:
    """Substitute into one child, renaming its binders if they would capture."""
    child_fv = free_vars(child)
    live = {
        k: v
        for k, v in var_map.items()
        if k not in binders and k in child_fv
    }
    live_ph = (
        {i: t for i, t in ph_map.items() if i in placeholder_indices(child)}
        if ph_map
        else {}
    )
    if not live and not live_ph:
        return binders, child
    incoming: frozenset[str] = frozenset()
    for image in (*live.values(), *live_ph.values()):
        incoming |= free_vars(image)
    new_binders: list[str] = []
    renames: SubstMap = {}
    for b in binders:
        if b in incoming:
            avoid = incoming | child_fv | set(binders) | set(new_binders)
            nb = fresh.fresh(avoid)
            renames[b] = Var(nb)
            new_binders.append(nb)
        else:
            new_binders.append(b)
    live.update(renames)
    return tuple(new_binders), _substitute(child, live, live_ph, fresh)


# Installed as a method so sugar nodes with irregular scoping can override.
Expr._substitute_parts = _default_substitute_parts  # type: ignore[attr-defined]


# ---------------------------------------------------------------------------
# Alpha-equivalence via canonical renaming


def canonical(e: Expr) -> Expr:
    """Rename every binder to a traversal-ordered reserved name.

    Alpha-equivalent expressions have identical canonical forms, so the
    result doubles as a structural-equality and hash key.
    """
    taken = free_vars(e)
    counter = [0]

    def next_name() -> str:
        while True:
            name = f"_c{counter[0]}"
            counter[0] += 1
            if name not in taken:
                return name

    return _canonize(e, {}, next_name)


def _canonize(e: Expr, env: dict[str, str], next_name) -> Expr:
    if isinstance(e, Var):
        return Var(env.get(e.name, e.name))
    if not e.scoped_children():
        return e
    return e._canonize_parts(env, next_name)


def _default_canonize_parts(self: Expr, env: dict[str, str], next_name) -> Expr:
    groups = []
    for binders, child in self.scoped_children():
        child_env = dict(env)
        new_binders = []
        for b in binders:
            nb = next_name()
            child_env[b] = nb
            new_binders.append(nb)
        groups.append((tuple(new_binders), _canonize(child, child_env, next_name)))
    return self.with_parts(groups)


Expr._canonize_parts = _default_canonize_parts  # type: ignore[attr-defined]


def alpha_eq(a: Expr, b: Expr) -> bool:
    """Whether two expressions differ only in bound-variable names."""
    if a is b:
        return True
    if type(a) is not type(b):
        return False
    return canonical(a) == canonical(b)


# ---------------------------------------------------------------------------
# Abstracted terms and formulas


class ArityMismatch(ValueError):
    """An abstraction was applied to the wrong number of arguments."""


@dataclass(frozen=True)
class AbstractedTerm:
    """Term template whose placeholders stand for ``arity`` argument terms."""

    arity: int
    body: Term

    def __post_init__(self) -> None:
        _check_abstraction(self.arity, self.body)


@dataclass(frozen=True)
class AbstractedFormula:
    """Formula template whose placeholders stand for ``arity`` argument terms."""

    arity: int
    body: Formula

    def __post_init__(self) -> None:
        _check_abstraction(self.arity, self.body)


Abstraction = TyUnion[AbstractedTerm, AbstractedFormula]


def _check_abstraction(arity: int, body: Expr) -> None:
    if arity < 0:
        raise ValueError("abstraction arity must be nonnegative")
    indices = placeholder_indices(body)
    if indices and max(indices) >= arity:
        raise ValueError(
            f"placeholder index {max(indices)} out of range for arity {arity}"
        )


def apply_abstraction(f: Abstraction, args: list[Term] | tuple[Term, ...]) -> Expr:
    """Simultaneously substitute ``args`` for the placeholders of ``f``."""
    if len(args) != f.arity:
        raise ArityMismatch(
            f"abstraction of arity {f.arity} applied to {len(args)} arguments"
        )
    ph_map = {i: t for i, t in enumerate(args)}
    return _substitute(f.body, {}, ph_map, FreshNames())


def abstraction_alpha_eq(a: Abstraction, b: Abstraction) -> bool:
    return type(a) is type(b) and a.arity == b.arity and alpha_eq(a.body, b.body)


def abstraction_free_vars(f: Abstraction) -> frozenset[str]:
    return free_vars(f.body)
