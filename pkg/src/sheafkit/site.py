"""Sieves, Grothendieck topologies, finite spaces, and their open-cover sites.

Topologies are stored extensionally: every covering sieve is listed, so
the transitivity axiom can be checked by full enumeration.  A generator
form (covering families per object) is accepted and saturated on load.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from .config import enumeration_bound
from .errors import (
    ApexMismatch,
    CodomainMismatch,
    DanglingReference,
    IntractableSize,
    SemanticError,
)
from .fincat import FinCategory, poset_category
from .labels import Label, canon, label_key


@dataclass(frozen=True, eq=False)
class Sieve:
    category: FinCategory
    apex: Label
    arrows: frozenset

    def __eq__(self, other):
        return isinstance(other, Sieve) and self.apex == other.apex and self.arrows == other.arrows

    def __hash__(self):
        return hash((self.apex, self.arrows))

    def key(self) -> tuple:
        return (len(self.arrows),) + tuple(sorted((label_key(a) for a in self.arrows)))

    def is_maximal(self) -> bool:
        return self.category.identity[self.apex] in self.arrows


def sieve(category: FinCategory, apex: Label, arrows) -> Sieve:
    """Validate precomposition closure and build the sieve."""
    if apex not in set(category.objects):
        raise DanglingReference(f"no object {apex!r}")
    arrows = frozenset(arrows)
    for f in arrows:
        if f not in set(category.morphisms):
            raise DanglingReference(f"sieve names unknown morphism {f!r}")
        if category.tgt[f] != apex:
            raise CodomainMismatch(f"{f!r} does not end at {apex!r}")
    for f in arrows:
        for g in category.morphisms:
            if category.tgt[g] != category.src[f]:
                continue
            if category.compose(f, g) not in arrows:
                raise SemanticError(
                    f"not a sieve: contains {f!r} but not {f!r}∘{g!r}"
                )
    return Sieve(category, apex, arrows)


def generate_sieve(category: FinCategory, apex: Label, family) -> Sieve:
    """Smallest precomposition-closed set of arrows into apex containing the family."""
    family = list(family)
    for f in family:
        if f not in set(category.morphisms):
            raise DanglingReference(f"unknown morphism {f!r}")
        if category.tgt[f] != apex:
            raise CodomainMismatch(f"{f!r} does not end at {apex!r}")
    closed = set()
    for f in family:
        for g in category.morphisms:
            if category.tgt[g] == category.src[f]:
                closed.add(category.compose(f, g))
    return Sieve(category, apex, frozenset(closed))


def maximal_sieve(category: FinCategory, apex: Label) -> Sieve:
    return sieve(category, apex, category.into(apex))


def empty_sieve(category: FinCategory, apex: Label) -> Sieve:
    return Sieve(category, apex, frozenset())


def pullback_sieve(category: FinCategory, f: Label, S: Sieve) -> Sieve:
    """f*S = {g into src(f) | f∘g ∈ S} for f: V -> U and S on U."""
    if category.tgt[f] != S.apex:
        raise ApexMismatch(f"{f!r} does not end at the sieve's apex {S.apex!r}")
    v = category.src[f]
    arrows = frozenset(g for g in category.into(v) if category.compose(f, g) in S.arrows)
    return Sieve(category, v, arrows)


def all_sieves(category: FinCategory, apex: Label, bound: int | None = None) -> tuple[Sieve, ...]:
    """Every sieve on apex, canonically ordered."""
    incoming = category.into(apex)
    limit_ = enumeration_bound(bound)
    if 2 ** len(incoming) > limit_:
        raise IntractableSize(
            f"{len(incoming)} arrows into {apex!r}: sieve enumeration exceeds bound"
        )
    found = []
    for mask in range(2 ** len(incoming)):
        arrows = frozenset(m for i, m in enumerate(incoming) if mask >> i & 1)
        ok = True
        for f in arrows:
            for g in category.morphisms:
                if category.tgt[g] != category.src[f]:
                    continue
                if category.compose(f, g) not in arrows:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            found.append(Sieve(category, apex, arrows))
    return tuple(sorted(found, key=Sieve.key))


# -- topologies -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GrothendieckTopology:
    category: FinCategory
    covers: dict[Label, tuple[Sieve, ...]]

    def covering(self, u: Label) -> tuple[Sieve, ...]:
        return self.covers[u]

    def has(self, S: Sieve) -> bool:
        return S in set(self.covers[S.apex])

    def covers_with(self, u: Label, arrows: frozenset) -> bool:
        """Does the (upward-closed) family of covering sieves reach below ``arrows``?

        Since a sieve containing a covering sieve is covering, this is the
        membership test for any sieve given by its arrow set.
        """
        return any(S.arrows <= arrows for S in self.covers[u])


@dataclass(frozen=True)
class TopologyViolation:
    axiom: str
    at: Label
    detail: str


@dataclass(frozen=True)
class TopologyReport:
    ok: bool
    violations: tuple[TopologyViolation, ...]
    sieves_checked: int


def validate_topology(J: GrothendieckTopology, bound: int | None = None) -> TopologyReport:
    """Check maximality, pullback stability, and transitivity by enumeration.

    Violations are report content, not exceptions.
    """
    C = J.category
    violations = []
    checked = 0
    for u in C.objects:
        if u not in J.covers:
            violations.append(TopologyViolation("maximality", u, "object missing from the cover table"))
            continue
        if maximal_sieve(C, u) not in set(J.covers[u]):
            violations.append(TopologyViolation("maximality", u, "maximal sieve is not covering"))
    for u in C.objects:
        for S in J.covers.get(u, ()):
            if S.apex != u:
                violations.append(TopologyViolation("well-formed", u, f"sieve with apex {S.apex!r} listed at {u!r}"))
                continue
            for f in C.into(u):
                checked += 1
                pb = pullback_sieve(C, f, S)
                if pb not in set(J.covers.get(C.src[f], ())):
                    violations.append(
                        TopologyViolation(
                            "stability", u,
                            f"pullback of a covering sieve along {f!r} is not covering",
                        )
                    )
    for u in C.objects:
        listed = set(J.covers.get(u, ()))
        for S in all_sieves(C, u, bound):
            if S in listed:
                continue
            for R in J.covers.get(u, ()):
                checked += 1
                if all(
                    pullback_sieve(C, f, S) in set(J.covers.get(C.src[f], ()))
                    for f in R.arrows
                ):
                    violations.append(
                        TopologyViolation(
                            "transitivity", u,
                            f"sieve {sorted(map(str, S.arrows))} is locally covering via "
                            f"{sorted(map(str, R.arrows))} but not listed",
                        )
                    )
                    break
    return TopologyReport(not violations, tuple(violations), checked)


def trivial_topology(category: FinCategory) -> GrothendieckTopology:
    covers = {u: (maximal_sieve(category, u),) for u in category.objects}
    return GrothendieckTopology(category, covers)


def saturate_topology(category: FinCategory, families, bound: int | None = None) -> GrothendieckTopology:
    """Close generating covering families under the three axioms.

    ``families`` maps objects to iterables of morphism families; each
    family generates a covering sieve.
    """
    sieves_at = {u: all_sieves(category, u, bound) for u in category.objects}
    covering: dict[Label, set] = {u: {maximal_sieve(category, u)} for u in category.objects}
    for u, fams in families.items():
        if u not in set(category.objects):
            raise DanglingReference(f"covering family at unknown object {u!r}")
        for fam in fams:
            covering[u].add(generate_sieve(category, u, fam))
    changed = True
    while changed:
        changed = False
        for u in category.objects:
            for S in list(covering[u]):
                for f in category.into(u):
                    pb = pullback_sieve(category, f, S)
                    if pb not in covering[category.src[f]]:
                        covering[category.src[f]].add(pb)
                        changed = True
        for u in category.objects:
            for S in sieves_at[u]:
                if S in covering[u]:
                    continue
                for R in list(covering[u]):
                    if all(
                        pullback_sieve(category, f, S) in covering[category.src[f]]
                        for f in R.arrows
                    ):
                        covering[u].add(S)
                        changed = True
                        break
    covers = {u: tuple(sorted(covering[u], key=Sieve.key)) for u in category.objects}
    return GrothendieckTopology(category, covers)


# -- finite spaces ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FiniteSpace:
    points: tuple[Label, ...]
    opens: tuple[frozenset, ...]


def finite_space(points, opens) -> FiniteSpace:
    pts = canon(points)
    fam = {frozenset(o) for o in opens}
    for o in fam:
        for p in o:
            if p not in set(pts):
                raise DanglingReference(f"open set names unknown point {p!r}")
    if frozenset() not in fam:
        raise SemanticError("opens must contain the empty set")
    if frozenset(pts) not in fam:
        raise SemanticError("opens must contain the full point set")
    for a, b in combinations(fam, 2):
        if a | b not in fam:
            raise SemanticError(f"opens not closed under union: {sorted(a)} ∪ {sorted(b)}")
        if a & b not in fam:
            raise SemanticError(f"opens not closed under intersection: {sorted(a)} ∩ {sorted(b)}")
    ordered = tuple(sorted(fam, key=lambda o: (len(o), tuple(sorted(o, key=label_key)))))
    return FiniteSpace(pts, ordered)


def open_label(o: frozenset) -> str:
    return "{" + ",".join(str(p) for p in sorted(o, key=label_key)) + "}"


def inclusion_label(v: frozenset, u: frozenset) -> str:
    return f"{open_label(v)}<{open_label(u)}"


# -- sites ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Site:
    category: FinCategory
    topology: GrothendieckTopology
    space: FiniteSpace | None = None
    open_of: dict[Label, frozenset] | None = field(default=None)

    def is_open_cover_site(self) -> bool:
        return self.space is not None


def open_cover_topology(X: FiniteSpace, bound: int | None = None) -> Site:
    """The inclusion poset of opens with the covering-by-unions topology.

    A sieve covers U exactly when the union of its arrow domains is U;
    this extensional description is already saturated for the axioms.
    """
    labels = {o: open_label(o) for o in X.opens}
    by_label = {labels[o]: o for o in X.opens}
    category = poset_category(
        list(labels.values()),
        lambda a, b: by_label[a] <= by_label[b],
        name=lambda a, b: f"{a}<{b}",
    )
    covers: dict[Label, list[Sieve]] = {}
    for u in category.objects:
        uset = by_label[u]
        chosen = []
        for S in all_sieves(category, u, bound):
            union = set()
            for f in S.arrows:
                union |= by_label[category.src[f]]
            if union == uset:
                chosen.append(S)
        covers[u] = tuple(sorted(chosen, key=Sieve.key))
    topology = GrothendieckTopology(category, covers)
    return Site(category, topology, X, dict(by_label))


def presheaf_site(category: FinCategory) -> Site:
    """A category with its trivial topology: the ambient presheaf topos."""
    return Site(category, trivial_topology(category))


def slice_site(site: Site, u: Label, bound: int | None = None) -> Site:
    """The open-cover site of the open u, viewed as a space in its own right."""
    if not site.is_open_cover_site():
        raise SemanticError("slicing needs an open-cover site")
    uset = site.open_of[u]
    opens = [o for o in site.space.opens if o <= uset]
    return open_cover_topology(finite_space(tuple(sorted(uset, key=label_key)), opens), bound)


def overlap(site: Site, a: Label, b: Label) -> Label:
    """The pullback object U_a ×_U U_b, realized as the intersection of opens."""
    if not site.is_open_cover_site():
        raise SemanticError("overlaps are computed in open-cover sites")
    inter = site.open_of[a] & site.open_of[b]
    return open_label(inter)
