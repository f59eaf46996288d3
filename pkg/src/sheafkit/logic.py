"""Internal first-order logic: formulas, forcing, and subobject semantics.

Two engines evaluate the same formula language.  ``forces`` is the
recursive local semantics: disjunction and existence pass to a covering
sieve, implication and universal quantification range over every
restriction.  ``interpret`` is compositional: connectives become the
Heyting operations on subobjects and quantifiers the adjoints to
pullback along a projection.  The two are cross-validated on fixtures.
"""

from __future__ import annotations

from dataclasses import dataclass

from .classifier import (
    Subobject,
    bottom_sub,
    closure,
    implies_sub,
    is_closed,
    join_sub,
    meet_sub,
    subobject,
    top_sub,
)
from .config import DEFAULT_FORMULA_DEPTH
from .errors import IllSorted, IntractableSize, ParseError, UnknownSubobject
from .fincat import Presheaf, presheaf
from .labels import Label
from .site import Site


# -- formulas -----------------------------------------------------------------

class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Bottom(Formula):
    pass


@dataclass(frozen=True)
class Mem(Formula):
    var: str
    pred: str


@dataclass(frozen=True)
class Eq(Formula):
    left: str
    right: str


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    sort: str
    body: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    sort: str
    body: Formula


def depth(phi: Formula) -> int:
    if isinstance(phi, (Top, Bottom, Mem, Eq)):
        return 0
    if isinstance(phi, Not):
        return 1 + depth(phi.body)
    if isinstance(phi, (And, Or, Implies)):
        return 1 + max(depth(phi.left), depth(phi.right))
    return 1 + depth(phi.body)


# -- parenthesized prefix syntax ----------------------------------------------------

def _tokenize(text: str):
    out = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "()":
            out.append((c, i))
            i += 1
        else:
            j = i
            while j < len(text) and not text[j].isspace() and text[j] not in "()":
                j += 1
            out.append((text[i:j], i))
            i = j
    return out


def parse_formula(text: str) -> Formula:
    """Parse e.g. ``(forall x F (implies (in x A) (in x B)))``."""
    tokens = _tokenize(text)
    pos = 0

    def fail(msg, at):
        raise ParseError(f"column {at + 1}: {msg}")

    def need(kind=None):
        nonlocal pos
        if pos >= len(tokens):
            fail("unexpected end of formula", len(text))
        tok, at = tokens[pos]
        if kind is not None and tok != kind:
            fail(f"expected {kind!r}, found {tok!r}", at)
        pos += 1
        return tok, at

    def atom_or_form():
        nonlocal pos
        if pos >= len(tokens):
            fail("unexpected end of formula", len(text))
        tok, at = tokens[pos]
        if tok == "(":
            return form()
        pos += 1
        if tok == "true":
            return Top()
        if tok == "false":
            return Bottom()
        fail(f"bare token {tok!r} is not a formula", at)

    def form():
        nonlocal pos
        _, at = need("(")
        head, hat = need()
        if head == "true":
            node = Top()
        elif head == "false":
            node = Bottom()
        elif head == "in":
            var, _ = need()
            pred, _ = need()
            node = Mem(var, pred)
        elif head in ("eq", "="):
            left, _ = need()
            right, _ = need()
            node = Eq(left, right)
        elif head == "and":
            node = And(atom_or_form(), atom_or_form())
        elif head == "or":
            node = Or(atom_or_form(), atom_or_form())
        elif head == "implies":
            node = Implies(atom_or_form(), atom_or_form())
        elif head == "not":
            node = Not(atom_or_form())
        elif head in ("exists", "forall"):
            var, _ = need()
            sort, _ = need()
            body = atom_or_form()
            node = (Exists if head == "exists" else Forall)(var, sort, body)
        else:
            fail(f"unknown connective {head!r}", hat)
        need(")")
        return node

    node = atom_or_form()
    if pos != len(tokens):
        fail("trailing input after the formula", tokens[pos][1])
    return node


def format_formula(phi: Formula) -> str:
    if isinstance(phi, Top):
        return "(true)"
    if isinstance(phi, Bottom):
        return "(false)"
    if isinstance(phi, Mem):
        return f"(in {phi.var} {phi.pred})"
    if isinstance(phi, Eq):
        return f"(eq {phi.left} {phi.right})"
    if isinstance(phi, And):
        return f"(and {format_formula(phi.left)} {format_formula(phi.right)})"
    if isinstance(phi, Or):
        return f"(or {format_formula(phi.left)} {format_formula(phi.right)})"
    if isinstance(phi, Implies):
        return f"(implies {format_formula(phi.left)} {format_formula(phi.right)})"
    if isinstance(phi, Not):
        return f"(not {format_formula(phi.body)})"
    head = "exists" if isinstance(phi, Exists) else "forall"
    return f"({head} {phi.var} {phi.sort} {format_formula(phi.body)})"


# -- models -------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LogicModel:
    site: Site
    sorts: dict[str, Presheaf]
    predicates: dict[str, tuple[str, Subobject]]   # name -> (sort name, subobject)


def logic_model(site: Site, sorts, predicates) -> LogicModel:
    sorts = dict(sorts)
    preds: dict[str, tuple[str, Subobject]] = {}
    for name, (sort_name, sub) in dict(predicates).items():
        if sort_name not in sorts:
            raise UnknownSubobject(f"predicate {name!r} names unknown sort {sort_name!r}")
        if not sub.ambient.same(sorts[sort_name]):
            raise IllSorted(f"predicate {name!r} does not live on sort {sort_name!r}")
        if not is_closed(site.topology, sub):
            raise IllSorted(
                f"predicate {name!r} is not closed for the topology; close it first"
            )
        preds[name] = (sort_name, sub)
    for s in sorts.values():
        if not s.base.same(site.category):
            raise IllSorted("sorts must live over the site's category")
    return LogicModel(site, sorts, preds)


def check_sorting(model: LogicModel, phi: Formula, context) -> None:
    """Variables bound once, atoms matching their variable's sort."""
    seen = [v for v, _ in context]
    if len(set(seen)) != len(seen):
        raise IllSorted("context binds a variable twice")
    for _, s in context:
        if s not in model.sorts:
            raise IllSorted(f"context names unknown sort {s!r}")

    def walk(node, scope):
        if isinstance(node, (Top, Bottom)):
            return
        if isinstance(node, Mem):
            if node.var not in scope:
                raise IllSorted(f"unbound variable {node.var!r}")
            if node.pred not in model.predicates:
                raise UnknownSubobject(f"unknown predicate {node.pred!r}")
            if model.predicates[node.pred][0] != scope[node.var]:
                raise IllSorted(
                    f"predicate {node.pred!r} lives on sort "
                    f"{model.predicates[node.pred][0]!r}, not {scope[node.var]!r}"
                )
            return
        if isinstance(node, Eq):
            for v in (node.left, node.right):
                if v not in scope:
                    raise IllSorted(f"unbound variable {v!r}")
            if scope[node.left] != scope[node.right]:
                raise IllSorted("equality between different sorts")
            return
        if isinstance(node, (And, Or, Implies)):
            walk(node.left, scope)
            walk(node.right, scope)
            return
        if isinstance(node, Not):
            walk(node.body, scope)
            return
        if node.var in scope:
            raise IllSorted(f"variable {node.var!r} bound twice")
        if node.sort not in model.sorts:
            raise IllSorted(f"quantifier names unknown sort {node.sort!r}")
        walk(node.body, {**scope, node.var: node.sort})

    walk(phi, dict(context))
    if depth(phi) > DEFAULT_FORMULA_DEPTH:
        raise IntractableSize(f"formula depth exceeds {DEFAULT_FORMULA_DEPTH}")


# -- forcing ------------------------------------------------------------------------

class Evaluator:
    """Kripke-Joyal forcing with memoization on the full query.

    Well-sortedness forbids rebinding, so a single variable-to-sort map
    covers the context and every quantifier in the formula.
    """

    def __init__(self, model: LogicModel, context, phi: Formula):
        self.model = model
        self.J = model.site.topology
        self.C = model.site.category
        self.sort_of: dict[str, str] = {**dict(context), **_collect_bound_sorts(phi)}
        self._memo: dict = {}

    def forces(self, u: Label, phi: Formula, env: dict) -> bool:
        key = (id(phi), u, tuple(sorted(env.items(), key=str)))
        hit = self._memo.get(key)
        if hit is None:
            hit = self._eval(u, phi, env)
            self._memo[key] = hit
        return hit

    def _restrict_env(self, env: dict, f: Label) -> dict:
        return {
            v: self.model.sorts[self.sort_of[v]].restrict[f][x] for v, x in env.items()
        }

    def _covers(self, u: Label, arrows: frozenset) -> bool:
        return self.J.covers_with(u, arrows)

    def _eval(self, u: Label, phi: Formula, env: dict) -> bool:
        if isinstance(phi, Top):
            return True
        if isinstance(phi, Bottom):
            return self._covers(u, frozenset())
        if isinstance(phi, Mem):
            sub = self.model.predicates[phi.pred][1]
            return env[phi.var] in sub.parts[u]
        if isinstance(phi, Eq):
            # locally equal: the agreement sieve must cover; on separated
            # sorts this is plain equality of sections
            ls = self.model.sorts[self.sort_of[phi.left]]
            rs = self.model.sorts[self.sort_of[phi.right]]
            agree = frozenset(
                f
                for f in self.C.into(u)
                if ls.restrict[f][env[phi.left]] == rs.restrict[f][env[phi.right]]
            )
            return self._covers(u, agree)
        if isinstance(phi, And):
            return self.forces(u, phi.left, env) and self.forces(u, phi.right, env)
        if isinstance(phi, Or):
            holds = frozenset(
                f
                for f in self.C.into(u)
                if self.forces(self.C.src[f], phi.left, self._restrict_env(env, f))
                or self.forces(self.C.src[f], phi.right, self._restrict_env(env, f))
            )
            return self._covers(u, holds)
        if isinstance(phi, Implies):
            for f in self.C.into(u):
                v = self.C.src[f]
                env_v = self._restrict_env(env, f)
                if self.forces(v, phi.left, env_v) and not self.forces(v, phi.right, env_v):
                    return False
            return True
        if isinstance(phi, Not):
            for f in self.C.into(u):
                v = self.C.src[f]
                if self.forces(v, phi.body, self._restrict_env(env, f)) and not self._covers(
                    v, frozenset()
                ):
                    return False
            return True
        if isinstance(phi, Exists):
            sort = self.model.sorts[phi.sort]
            witnessed = frozenset(
                f
                for f in self.C.into(u)
                if any(
                    self.forces(
                        self.C.src[f],
                        phi.body,
                        {**self._restrict_env(env, f), phi.var: a},
                    )
                    for a in sort.value[self.C.src[f]]
                )
            )
            return self._covers(u, witnessed)
        if isinstance(phi, Forall):
            sort = self.model.sorts[phi.sort]
            for f in self.C.into(u):
                v = self.C.src[f]
                env_v = self._restrict_env(env, f)
                for a in sort.value[v]:
                    if not self.forces(v, phi.body, {**env_v, phi.var: a}):
                        return False
            return True
        raise IllSorted(f"unknown formula node {phi!r}")


def forces(model: LogicModel, u: Label, phi: Formula, env: dict, context) -> bool:
    """U forces phi in the given environment."""
    check_sorting(model, phi, context)
    env = dict(env)
    names = {v for v, _ in context}
    if set(env) != names:
        raise IllSorted(f"environment must assign exactly the context variables {sorted(names)}")
    for v, s in context:
        if env[v] not in set(model.sorts[s].value[u]):
            raise IllSorted(f"environment value for {v!r} is not a section of {s!r} over {u!r}")
    return Evaluator(model, context, phi).forces(u, phi, env)


def _collect_bound_sorts(phi: Formula) -> dict:
    out = {}

    def walk(node):
        if isinstance(node, (And, Or, Implies)):
            walk(node.left)
            walk(node.right)
        elif isinstance(node, Not):
            walk(node.body)
        elif isinstance(node, (Exists, Forall)):
            out[node.var] = node.sort
            walk(node.body)

    walk(phi)
    return out


# -- compositional subobject semantics ---------------------------------------------------

def context_product(model: LogicModel, context) -> Presheaf:
    """Product of the context sorts, elements ordered as the context lists them."""
    C = model.site.category
    sorts = [model.sorts[s] for _, s in context]
    value = {}
    for u in C.objects:
        tuples = [()]
        for s in sorts:
            tuples = [t + (x,) for t in tuples for x in s.value[u]]
        value[u] = tuple(tuples)
    restrict = {}
    for f in C.morphisms:
        if C.is_identity(f):
            continue
        u = C.tgt[f]
        restrict[f] = {
            t: tuple(s.restrict[f][x] for s, x in zip(sorts, t)) for t in value[u]
        }
    return presheaf(C, value, restrict)


def interpret(model: LogicModel, phi: Formula, context) -> Subobject:
    """The subobject of the context product carved out by the formula."""
    check_sorting(model, phi, context)
    return _interpret(model, phi, tuple(context))


def _interpret(model: LogicModel, phi: Formula, context) -> Subobject:
    J = model.site.topology
    C = model.site.category
    Pctx = context_product(model, context)
    index = {v: i for i, (v, _) in enumerate(context)}

    if isinstance(phi, Top):
        return top_sub(Pctx)
    if isinstance(phi, Bottom):
        return bottom_sub(J, Pctx)
    if isinstance(phi, Mem):
        sub = model.predicates[phi.pred][1]
        i = index[phi.var]
        parts = {
            u: frozenset(t for t in Pctx.value[u] if t[i] in sub.parts[u])
            for u in C.objects
        }
        return subobject(Pctx, parts)
    if isinstance(phi, Eq):
        i, j = index[phi.left], index[phi.right]
        strict = subobject(
            Pctx,
            {u: frozenset(t for t in Pctx.value[u] if t[i] == t[j]) for u in C.objects},
        )
        return closure(J, strict)
    if isinstance(phi, And):
        return meet_sub(_interpret(model, phi.left, context), _interpret(model, phi.right, context))
    if isinstance(phi, Or):
        return join_sub(J, _interpret(model, phi.left, context), _interpret(model, phi.right, context))
    if isinstance(phi, Implies):
        return implies_sub(_interpret(model, phi.left, context), _interpret(model, phi.right, context))
    if isinstance(phi, Not):
        return implies_sub(_interpret(model, phi.body, context), bottom_sub(J, Pctx))
    if isinstance(phi, (Exists, Forall)):
        inner_ctx = context + ((phi.var, phi.sort),)
        body = _interpret(model, phi.body, inner_ctx)
        sort = model.sorts[phi.sort]
        if isinstance(phi, Exists):
            image = {
                u: frozenset(
                    t
                    for t in Pctx.value[u]
                    if any(t + (a,) in body.parts[u] for a in sort.value[u])
                )
                for u in C.objects
            }
            return closure(J, subobject(Pctx, image))
        parts = {}
        for u in C.objects:
            keep = []
            for t in Pctx.value[u]:
                ok = True
                for f in C.into(u):
                    v = C.src[f]
                    t_v = Pctx.restrict[f][t]
                    if any(t_v + (a,) not in body.parts[v] for a in sort.value[v]):
                        ok = False
                        break
                if ok:
                    keep.append(t)
            parts[u] = frozenset(keep)
        result = subobject(Pctx, parts)
        assert is_closed(J, result), "universal quantification left a non-closed subobject"
        return result
    raise IllSorted(f"unknown formula node {phi!r}")
