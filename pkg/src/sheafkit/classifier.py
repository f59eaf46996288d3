"""The subobject classifier, characteristic maps, and Heyting structure.

Omega is realized by J-closed sieves, so one construction serves both
presheaf topoi (trivial topology: every sieve is closed) and sheaf
topoi.  Subobjects are restriction-stable pointwise subsets that are
additionally J-closed; for the trivial topology the closedness condition
is vacuous, and over a sheaf it picks out exactly the subsheaves.
"""

from __future__ import annotations

from dataclasses import dataclass

from .config import enumeration_bound
from .errors import (
    DanglingReference,
    IntractableSize,
    NotClosedSubobject,
    NotRestrictionStable,
)
from .fincat import NaturalTransformation, Presheaf, natural_transformation, presheaf
from .labels import Label, label_key
from .limits import is_pullback, pullback, set_fun
from .sheaf import terminal_presheaf
from .site import GrothendieckTopology, Sieve, Site, all_sieves, maximal_sieve, pullback_sieve


# -- subobjects -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Subobject:
    ambient: Presheaf
    parts: dict[Label, frozenset]

    def key(self) -> tuple:
        return tuple(
            (u, tuple(sorted(self.parts[u], key=label_key)))
            for u in self.ambient.base.objects
        )

    def same(self, other: "Subobject") -> bool:
        return self.parts == other.parts

    def leq(self, other: "Subobject") -> bool:
        return all(self.parts[u] <= other.parts[u] for u in self.ambient.base.objects)


def subobject(F: Presheaf, parts) -> Subobject:
    """Validate restriction stability."""
    base = F.base
    full: dict[Label, frozenset] = {}
    for u in base.objects:
        chosen = frozenset(parts.get(u, ()))
        for x in chosen:
            if x not in set(F.value[u]):
                raise DanglingReference(f"part at {u!r} names unknown section {x!r}")
        full[u] = chosen
    for u in parts:
        if u not in set(base.objects):
            raise DanglingReference(f"part at unknown object {u!r}")
    for f in base.morphisms:
        u, v = base.tgt[f], base.src[f]
        for x in full[u]:
            if F.restrict[f][x] not in full[v]:
                raise NotRestrictionStable(
                    f"{x!r} lies in the part at {u!r} but its restriction along {f!r} escapes"
                )
    return Subobject(F, full)


def truth_sieve(J: GrothendieckTopology, A: Subobject, u: Label, x: Label) -> frozenset:
    """The sieve of arrows pulling x into A; the characteristic value."""
    F = A.ambient
    return frozenset(
        f for f in F.base.into(u) if F.restrict[f][x] in A.parts[F.base.src[f]]
    )


def is_closed(J: GrothendieckTopology, A: Subobject) -> bool:
    F = A.ambient
    for u in F.base.objects:
        for x in F.value[u]:
            if x in A.parts[u]:
                continue
            if J.covers_with(u, truth_sieve(J, A, u, x)):
                return False
    return True


def closure(J: GrothendieckTopology, A: Subobject) -> Subobject:
    """J-closure.  A single pass suffices; a fixpoint assertion guards it."""
    F = A.ambient
    grown = {
        u: frozenset(
            x for x in F.value[u] if J.covers_with(u, truth_sieve(J, A, u, x))
        )
        for u in F.base.objects
    }
    result = subobject(F, grown)
    assert is_closed(J, result), "closure is not idempotent; topology not saturated?"
    return result


def top_sub(F: Presheaf) -> Subobject:
    return subobject(F, {u: frozenset(F.value[u]) for u in F.base.objects})


def bottom_sub(J: GrothendieckTopology, F: Presheaf) -> Subobject:
    return closure(J, subobject(F, {}))


def meet_sub(A: Subobject, B: Subobject) -> Subobject:
    F = A.ambient
    return subobject(F, {u: A.parts[u] & B.parts[u] for u in F.base.objects})


def join_sub(J: GrothendieckTopology, A: Subobject, B: Subobject) -> Subobject:
    F = A.ambient
    return closure(J, subobject(F, {u: A.parts[u] | B.parts[u] for u in F.base.objects}))


def implies_sub(A: Subobject, B: Subobject) -> Subobject:
    """Largest C with C ∧ A <= B: sections whose every restriction into A lands in B."""
    F = A.ambient
    base = F.base
    parts = {}
    for u in base.objects:
        keep = []
        for x in F.value[u]:
            ok = True
            for f in base.into(u):
                y = F.restrict[f][x]
                if y in A.parts[base.src[f]] and y not in B.parts[base.src[f]]:
                    ok = False
                    break
            if ok:
                keep.append(x)
        parts[u] = frozenset(keep)
    return subobject(F, parts)


def neg_sub(J: GrothendieckTopology, A: Subobject) -> Subobject:
    return implies_sub(A, bottom_sub(J, A.ambient))


def enumerate_subobjects(
    J: GrothendieckTopology, F: Presheaf, bound: int | None = None
) -> tuple[Subobject, ...]:
    """All J-closed restriction-stable subobjects, canonically ordered."""
    base = F.base
    limit_ = enumeration_bound(bound)
    count = 1
    for u in base.objects:
        count *= 2 ** len(F.value[u])
        if count > limit_:
            raise IntractableSize("subobject enumeration exceeds bound")

    objs = base.objects
    pos = {u: i for i, u in enumerate(objs)}
    stage_mors = [[] for _ in objs]
    for f in base.morphisms:
        if base.is_identity(f):
            continue
        a, b = pos[base.src[f]], pos[base.tgt[f]]
        stage_mors[max(a, b)].append(f)

    found = []
    chosen: list = [None] * len(objs)

    def stable(stage):
        for f in stage_mors[stage]:
            u, v = base.tgt[f], base.src[f]
            cu, cv = chosen[pos[u]], chosen[pos[v]]
            if any(F.restrict[f][x] not in cv for x in cu):
                return False
        return True

    def rec(stage):
        if stage == len(objs):
            found.append({objs[i]: chosen[i] for i in range(len(objs))})
            return
        elems = F.value[objs[stage]]
        for mask in range(2 ** len(elems)):
            chosen[stage] = frozenset(x for i, x in enumerate(elems) if mask >> i & 1)
            if stable(stage):
                rec(stage + 1)
        chosen[stage] = None

    rec(0)
    subs = [Subobject(F, parts) for parts in found]
    subs = [A for A in subs if is_closed(J, A)]
    return tuple(sorted(subs, key=Subobject.key))


# -- Omega ------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class OmegaObject:
    site: Site
    presheaf: Presheaf
    terminal: Presheaf
    truth: NaturalTransformation
    sieves: dict[Label, dict[Label, Sieve]]   # object -> element label -> closed sieve

    def truth_label(self, u: Label) -> Label:
        return self.truth.components[u][()]


def _sieve_label(S: Sieve) -> tuple:
    return tuple(sorted(S.arrows, key=label_key))


def _is_j_closed_sieve(J: GrothendieckTopology, S: Sieve) -> bool:
    C = J.category
    for f in C.into(S.apex):
        if f in S.arrows:
            continue
        if pullback_sieve(C, f, S) in set(J.covers[C.src[f]]):
            return False
    return True


def omega(site: Site, bound: int | None = None) -> OmegaObject:
    """Omega(U) = J-closed sieves on U; restriction is sieve pullback;
    true picks the maximal sieve."""
    C = site.category
    J = site.topology
    closed: dict[Label, dict[Label, Sieve]] = {}
    for u in C.objects:
        here = [S for S in all_sieves(C, u, bound) if _is_j_closed_sieve(J, S)]
        closed[u] = {_sieve_label(S): S for S in here}
    value = {u: tuple(sorted(closed[u], key=label_key)) for u in C.objects}
    restrict = {}
    for f in C.morphisms:
        if C.is_identity(f):
            continue
        u = C.tgt[f]
        tab = {}
        for lbl in value[u]:
            pulled = pullback_sieve(C, f, closed[u][lbl])
            tab[lbl] = _sieve_label(pulled)
        restrict[f] = tab
    om = presheaf(C, value, restrict)
    one = terminal_presheaf(C)
    truth = natural_transformation(
        one, om, {u: {(): _sieve_label(maximal_sieve(C, u))} for u in C.objects}
    )
    return OmegaObject(site, om, one, truth, closed)


@dataclass(frozen=True)
class OmegaOpenIso:
    ok: bool
    table: dict[Label, tuple[tuple[Label, str], ...]]  # object -> (truth value, open) pairs
    detail: str


def omega_open_iso(om: OmegaObject) -> OmegaOpenIso:
    """Certified order-isomorphism Omega(U) ≅ {opens contained in U} on open-cover sites."""
    site = om.site
    if not site.is_open_cover_site():
        return OmegaOpenIso(False, {}, "not an open-cover site")
    from .site import open_label

    C = site.category
    table = {}
    for u in C.objects:
        uset = site.open_of[u]
        opens_below = {open_label(o) for o in site.space.opens if o <= uset}
        assigned = {}
        for lbl in om.presheaf.value[u]:
            S = om.sieves[u][lbl]
            union = set()
            for f in S.arrows:
                union |= site.open_of[C.src[f]]
            assigned[lbl] = open_label(frozenset(union))
        if set(assigned.values()) != opens_below or len(set(assigned.values())) != len(assigned):
            return OmegaOpenIso(False, {}, f"not a bijection at {u!r}")
        for l1, S1 in om.sieves[u].items():
            for l2, S2 in om.sieves[u].items():
                o1 = site.open_of.get(_label_to_obj(site, assigned[l1]))
                o2 = site.open_of.get(_label_to_obj(site, assigned[l2]))
                if (S1.arrows <= S2.arrows) != (o1 <= o2):
                    return OmegaOpenIso(False, {}, f"order not preserved at {u!r}")
        table[u] = tuple(sorted(assigned.items(), key=lambda kv: label_key(kv[0])))
    return OmegaOpenIso(True, table, "")


def _label_to_obj(site: Site, lbl: str) -> Label:
    return lbl  # open labels are the object labels of the opens poset


# -- classification -----------------------------------------------------------------

def characteristic(om: OmegaObject, A: Subobject) -> NaturalTransformation:
    """chi_A(x) = the sieve of arrows pulling x into A; requires A closed."""
    J = om.site.topology
    if not is_closed(J, A):
        raise NotClosedSubobject("characteristic maps classify J-closed subobjects")
    F = A.ambient
    comps = {}
    for u in F.base.objects:
        comps[u] = {x: tuple(sorted(truth_sieve(J, A, u, x), key=label_key)) for x in F.value[u]}
    return natural_transformation(F, om.presheaf, comps)


def pullback_of_truth(om: OmegaObject, chi: NaturalTransformation) -> Subobject:
    F = chi.source
    parts = {
        u: frozenset(x for x in F.value[u] if chi.components[u][x] == om.truth_label(u))
        for u in F.base.objects
    }
    return subobject(F, parts)


def characteristic_square_is_pullback(om: OmegaObject, A: Subobject, chi: NaturalTransformation) -> bool:
    """Pointwise: A(U) with (inclusion, !) is the pullback of chi against true."""
    F = A.ambient
    for u in F.base.objects:
        chi_u = set_fun(F.value[u], om.presheaf.value[u], dict(chi.components[u]))
        true_u = set_fun(((),), om.presheaf.value[u], {(): om.truth_label(u)})
        apex = tuple(sorted(A.parts[u], key=label_key))
        pa = set_fun(apex, F.value[u], {x: x for x in apex})
        pb = set_fun(apex, ((),), {x: () for x in apex})
        if not is_pullback(apex, pa, pb, chi_u, true_u):
            return False
    return True


@dataclass(frozen=True)
class ClassifyReport:
    ok: bool
    subobjects: int
    arrows: int
    failures: tuple[str, ...]


def classify_round_trip(site: Site, X: Presheaf, bound: int | None = None) -> ClassifyReport:
    """Sub(X) ≅ Hom(X, Omega) by characteristic / pullback-of-true, exhaustively."""
    from .fincat import enumerate_naturals

    om = omega(site, bound)
    J = site.topology
    subs = enumerate_subobjects(J, X, bound)
    homs = enumerate_naturals(X, om.presheaf, bound)
    failures = []
    seen = {}
    for A in subs:
        chi = characteristic(om, A)
        back = pullback_of_truth(om, chi)
        if not back.same(A):
            failures.append(f"pullback of true does not recover the subobject {A.key()}")
        if not characteristic_square_is_pullback(om, A, chi):
            failures.append(f"characteristic square is not a pullback for {A.key()}")
        hits = [phi for phi in homs if pullback_of_truth(om, phi).same(A)]
        if len(hits) != 1:
            failures.append(f"{len(hits)} arrows classify {A.key()}; expected exactly one")
        seen[chi.key()] = A
    for phi in homs:
        back = pullback_of_truth(om, phi)
        chi = characteristic(om, back)
        if not chi.same(phi):
            failures.append("an arrow into Omega is not the characteristic of its pullback")
    if len(subs) != len(homs):
        failures.append(f"|Sub(X)| = {len(subs)} but |Hom(X, Omega)| = {len(homs)}")
    return ClassifyReport(not failures, len(subs), len(homs), tuple(failures))


# -- the Heyting algebra of subobjects ----------------------------------------------

@dataclass(frozen=True)
class SubobjectLattice:
    site: Site
    ambient: Presheaf
    elements: tuple[Subobject, ...]
    index: dict[tuple, int]
    masks: tuple[int, ...]
    node_index: dict[tuple, int]

    def locate(self, A: Subobject) -> int:
        return self.index[A.key()]

    def meet(self, i: int, j: int) -> int:
        return self.locate(meet_sub(self.elements[i], self.elements[j]))

    def join(self, i: int, j: int) -> int:
        return self.locate(join_sub(self.site.topology, self.elements[i], self.elements[j]))

    def implies(self, i: int, j: int) -> int:
        return self.locate(implies_sub(self.elements[i], self.elements[j]))

    def neg(self, i: int) -> int:
        return self.locate(neg_sub(self.site.topology, self.elements[i]))

    def leq(self, i: int, j: int) -> bool:
        return self.masks[i] & ~self.masks[j] == 0

    @property
    def top(self) -> int:
        return self.locate(top_sub(self.ambient))

    @property
    def bottom(self) -> int:
        return self.locate(bottom_sub(self.site.topology, self.ambient))


def heyting(site: Site, F: Presheaf, bound: int | None = None) -> SubobjectLattice:
    subs = enumerate_subobjects(site.topology, F, bound)
    node_index = {}
    for u in F.base.objects:
        for x in F.value[u]:
            node_index[(u, x)] = len(node_index)
    masks = []
    for A in subs:
        m = 0
        for u in F.base.objects:
            for x in A.parts[u]:
                m |= 1 << node_index[(u, x)]
        masks.append(m)
    index = {A.key(): i for i, A in enumerate(subs)}
    return SubobjectLattice(site, F, subs, index, tuple(masks), node_index)


@dataclass(frozen=True)
class HeytingReport:
    ok: bool
    size: int
    checks: tuple[tuple[str, bool], ...]
    excluded_middle_fails: bool
    double_negation_strict: bool
    witnesses: tuple[str, ...]


def heyting_report(site: Site, F: Presheaf, bound: int | None = None) -> HeytingReport:
    """All Heyting axioms by enumeration, plus the intuitionistic witnesses."""
    lat = heyting(site, F, bound)
    n = len(lat.elements)
    limit_ = enumeration_bound(bound)
    if n ** 3 > limit_:
        raise IntractableSize(f"|Sub(F)| = {n}: triple enumeration exceeds bound")
    rng = range(n)
    meet = [[lat.meet(i, j) for j in rng] for i in rng]
    join = [[lat.join(i, j) for j in rng] for i in rng]
    imp = [[lat.implies(i, j) for j in rng] for i in rng]
    top, bot = lat.top, lat.bottom

    checks = []
    checks.append(("commutativity", all(meet[i][j] == meet[j][i] and join[i][j] == join[j][i] for i in rng for j in rng)))
    checks.append(("idempotence", all(meet[i][i] == i and join[i][i] == i for i in rng)))
    checks.append(("absorption", all(meet[i][join[i][j]] == i and join[i][meet[i][j]] == i for i in rng for j in rng)))
    checks.append(("associativity", all(
        meet[meet[i][j]][k] == meet[i][meet[j][k]] and join[join[i][j]][k] == join[i][join[j][k]]
        for i in rng for j in rng for k in rng
    )))
    checks.append(("bounds", all(meet[i][top] == i and join[i][bot] == i for i in rng)))
    checks.append(("distributivity", all(
        meet[i][join[j][k]] == join[meet[i][j]][meet[i][k]]
        for i in rng for j in rng for k in rng
    )))
    checks.append(("adjunction", all(
        (lat.leq(meet[c][a], b)) == (lat.leq(c, imp[a][b]))
        for a in rng for b in rng for c in rng
    )))
    checks.append(("implication-self", all(imp[i][i] == top for i in rng)))
    checks.append(("negation-definition", all(lat.neg(i) == imp[i][bot] for i in rng)))
    checks.append(("double-negation-inflation", all(lat.leq(i, lat.neg(lat.neg(i))) for i in rng)))

    em_fails = [i for i in rng if join[i][lat.neg(i)] != top]
    dn_strict = [i for i in rng if lat.neg(lat.neg(i)) != i]
    witnesses = []
    if em_fails:
        witnesses.append(f"A ∨ ¬A ≠ ⊤ at subobject #{em_fails[0]}")
    if dn_strict:
        witnesses.append(f"¬¬A > A at subobject #{dn_strict[0]}")
    ok = all(flag for _, flag in checks)
    return HeytingReport(ok, n, tuple(checks), bool(em_fails), bool(dn_strict), tuple(witnesses))
