"""Sheaves of groups, torsors, cocycles, descent gluing, and the
internal characterization of torsors.

Covers are finite families of opens; overlaps are intersections, which
in the opens poset are the pullbacks.  The change-of-trivialization
relation is g'_ij = h_i^-1 · g_ij · h_j, the unique relation compatible
with the section-change calculation for s_j = s_i · g_ij.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .config import enumeration_bound
from .errors import (
    CoverMismatch,
    DanglingReference,
    IntractableSize,
    InvalidCocycle,
    NotUniquelyTransitive,
    SemanticError,
)
from .fincat import Presheaf, presheaf
from .labels import Label, label_key
from .sheaf import is_sheaf
from .site import Site, slice_site, open_label


# -- groups --------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GroupSheaf:
    sections: Presheaf
    mult: dict[Label, dict[tuple[Label, Label], Label]]
    unit: dict[Label, Label]
    inverse: dict[Label, dict[Label, Label]]

    def mul(self, u: Label, a: Label, b: Label) -> Label:
        return self.mult[u][(a, b)]

    def inv(self, u: Label, a: Label) -> Label:
        return self.inverse[u][a]


def group_sheaf(G: Presheaf, mult, unit=None, inverse=None) -> GroupSheaf:
    """Validate per-object group axioms and homomorphy of restrictions."""
    base = G.base
    mult = {u: dict(tab) for u, tab in mult.items()}
    for u in base.objects:
        elems = G.value[u]
        if u not in mult:
            if len(elems) <= 1:
                mult[u] = {(a, b): a for a in elems for b in elems}
            else:
                raise DanglingReference(f"group table missing at {u!r}")
        tab = mult[u]
        for a in elems:
            for b in elems:
                if (a, b) not in tab:
                    raise DanglingReference(f"product {a!r}·{b!r} missing at {u!r}")
                if tab[(a, b)] not in set(elems):
                    raise DanglingReference(f"product {a!r}·{b!r} escapes the section set at {u!r}")
        for a in elems:
            for b in elems:
                for c in elems:
                    if tab[(tab[(a, b)], c)] != tab[(a, tab[(b, c)])]:
                        raise SemanticError(f"associativity fails at {u!r} on ({a!r},{b!r},{c!r})")

    units: dict[Label, Label] = dict(unit or {})
    for u in base.objects:
        elems = G.value[u]
        if u not in units:
            found = [e for e in elems if all(
                mult[u][(e, a)] == a and mult[u][(a, e)] == a for a in elems
            )]
            if len(found) != 1:
                raise SemanticError(f"no unique unit at {u!r}")
            units[u] = found[0]
        else:
            e = units[u]
            if any(mult[u][(e, a)] != a or mult[u][(a, e)] != a for a in elems):
                raise SemanticError(f"declared unit at {u!r} is not a unit")

    invs: dict[Label, dict[Label, Label]] = {u: dict(tab) for u, tab in (inverse or {}).items()}
    for u in base.objects:
        elems = G.value[u]
        tab = invs.setdefault(u, {})
        for a in elems:
            if a not in tab:
                found = [b for b in elems if mult[u][(a, b)] == units[u] and mult[u][(b, a)] == units[u]]
                if len(found) != 1:
                    raise SemanticError(f"no unique inverse for {a!r} at {u!r}")
                tab[a] = found[0]
            else:
                b = tab[a]
                if mult[u][(a, b)] != units[u] or mult[u][(b, a)] != units[u]:
                    raise SemanticError(f"declared inverse of {a!r} at {u!r} is wrong")

    for f in base.morphisms:
        u, v = base.tgt[f], base.src[f]
        r = G.restrict[f]
        for a in G.value[u]:
            for b in G.value[u]:
                if r[mult[u][(a, b)]] != mult[v][(r[a], r[b])]:
                    raise SemanticError(f"restriction along {f!r} is not a homomorphism")
        if G.value[u] and r[units[u]] != units[v]:
            raise SemanticError(f"restriction along {f!r} moves the unit")
    return GroupSheaf(G, mult, units, invs)


# -- torsor candidates ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TorsorCandidate:
    space: Presheaf
    group: GroupSheaf
    action: dict[Label, dict[tuple[Label, Label], Label]]

    def act(self, u: Label, p: Label, g: Label) -> Label:
        return self.action[u][(p, g)]


def torsor_candidate(P: Presheaf, G: GroupSheaf, action) -> TorsorCandidate:
    """Validate the right-action laws and equivariance of restrictions."""
    if not P.base.same(G.sections.base):
        raise SemanticError("space and group live over different categories")
    base = P.base
    action = {u: dict(tab) for u, tab in action.items()}
    for u in base.objects:
        tab = action.setdefault(u, {})
        for p in P.value[u]:
            for g in G.sections.value[u]:
                if (p, g) not in tab:
                    raise DanglingReference(f"action misses ({p!r}, {g!r}) at {u!r}")
                if tab[(p, g)] not in set(P.value[u]):
                    raise DanglingReference(f"action escapes the section set at {u!r}")
        for p in P.value[u]:
            if tab[(p, G.unit[u])] != p:
                raise SemanticError(f"unit law fails at {u!r} on {p!r}")
            for g in G.sections.value[u]:
                for h in G.sections.value[u]:
                    if tab[(tab[(p, g)], h)] != tab[(p, G.mul(u, g, h))]:
                        raise SemanticError(
                            f"compatibility fails at {u!r} on ({p!r},{g!r},{h!r})"
                        )
    for f in base.morphisms:
        u, v = base.tgt[f], base.src[f]
        for p in P.value[u]:
            for g in G.sections.value[u]:
                lhs = P.restrict[f][action[u][(p, g)]]
                rhs = action[v][(P.restrict[f][p], G.sections.restrict[f][g])]
                if lhs != rhs:
                    raise SemanticError(f"action does not commute with restriction along {f!r}")
    return TorsorCandidate(P, G, action)


@dataclass(frozen=True)
class TorsorReport:
    ok: bool
    locally_nonempty: bool
    uniquely_transitive: bool
    failures: tuple[str, ...]


def is_torsor(
    T: TorsorCandidate,
    site: Site,
    nonempty_everywhere: bool = True,
) -> TorsorReport:
    """Local nonemptiness plus unique transitivity, with named witnesses.

    The universal reading checks a covering family with nonempty local
    sections at every object; ``nonempty_everywhere=False`` checks only
    the objects that no non-identity arrow leaves (the whole space, in an
    opens poset).
    """
    C = site.category
    J = site.topology
    P, G = T.space, T.group
    failures = []
    targets = list(C.objects)
    if not nonempty_everywhere:
        targets = [
            u for u in C.objects
            if all(C.is_identity(f) for f in C.morphisms if C.src[f] == u)
        ]
    nonempty_ok = True
    for u in targets:
        good = any(
            all(P.value[C.src[f]] for f in S.arrows)
            for S in J.covers[u]
        )
        if not good:
            nonempty_ok = False
            failures.append(f"no covering sieve of {u!r} has nonempty sections on every piece")
    transitive_ok = True
    for u in C.objects:
        for p in P.value[u]:
            for q in P.value[u]:
                carriers = [g for g in G.sections.value[u] if T.act(u, p, g) == q]
                if len(carriers) != 1:
                    transitive_ok = False
                    failures.append(
                        f"{len(carriers)} group elements carry {p!r} to {q!r} over {u!r}"
                    )
    return TorsorReport(nonempty_ok and transitive_ok, nonempty_ok, transitive_ok, tuple(failures))


@dataclass(frozen=True)
class CanonicalMapReport:
    ok: bool
    map_bijective: bool
    locally_surjective: bool
    failures: tuple[str, ...]


def canonical_map_check(T: TorsorCandidate, site: Site) -> CanonicalMapReport:
    """(p, g) -> (p, p·g) bijective where sections exist, and P -> 1 locally epi."""
    C = site.category
    P, G = T.space, T.group
    failures = []
    bij = True
    for u in C.objects:
        if not P.value[u]:
            continue
        image = {}
        for p in P.value[u]:
            for g in G.sections.value[u]:
                key = (p, T.act(u, p, g))
                if key in image:
                    bij = False
                    failures.append(f"canonical map not injective at {u!r}: {key!r} hit twice")
                image[key] = (p, g)
        expected = {(p, q) for p in P.value[u] for q in P.value[u]}
        missing = expected - set(image)
        if missing:
            bij = False
            failures.append(f"canonical map not surjective at {u!r}: misses {sorted(missing, key=label_key)[0]!r}")
    epi = True
    for u in C.objects:
        if not any(all(P.value[C.src[f]] for f in S.arrows) for S in site.topology.covers[u]):
            epi = False
            failures.append(f"P -> 1 is not locally surjective at {u!r}")
    return CanonicalMapReport(bij and epi, bij, epi, tuple(failures))


# -- cocycles ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Cocycle:
    site: Site
    group: GroupSheaf
    target: Label
    cover: tuple[Label, ...]
    values: dict[tuple[int, int], Label]   # (i, j) -> g_ij in G(U_i ∩ U_j)

    def overlap(self, i: int, j: int) -> Label:
        from .site import overlap as _overlap

        return _overlap(self.site, self.cover[i], self.cover[j])


def cocycle(site: Site, G: GroupSheaf, target: Label, cover, values) -> Cocycle:
    """Shape-check a cocycle; fill g_ii = unit and g_ji = g_ij^-1 when missing."""
    if not site.is_open_cover_site():
        raise SemanticError("cocycles live on open-cover sites")
    cover = tuple(cover)
    for u in cover + (target,):
        if u not in set(site.category.objects):
            raise DanglingReference(f"cover names unknown open {u!r}")
        if u != target and not site.open_of[u] <= site.open_of[target]:
            raise CoverMismatch(f"cover member {u!r} is not contained in {target!r}")
    union = frozenset().union(*(site.open_of[u] for u in cover)) if cover else frozenset()
    if union != site.open_of[target]:
        raise CoverMismatch(f"cover does not exhaust {target!r}")

    from .site import overlap as _overlap

    def ov(i: int, j: int) -> Label:
        return _overlap(site, cover[i], cover[j])

    vals: dict[tuple[int, int], Label] = {}
    for key, g in dict(values).items():
        i, j = key
        vals[(int(i), int(j))] = g
    n = len(cover)
    for i in range(n):
        vals.setdefault((i, i), G.unit[ov(i, i)])
    for i in range(n):
        for j in range(n):
            uij = ov(i, j)
            if (i, j) not in vals and (j, i) in vals:
                vals[(i, j)] = G.inv(uij, vals[(j, i)])
            if (i, j) not in vals:
                raise DanglingReference(f"cocycle misses the pair ({i}, {j})")
            if vals[(i, j)] not in set(G.sections.value[uij]):
                raise DanglingReference(
                    f"g_{i}{j} is not a section of the group over {uij!r}"
                )
    return Cocycle(site, G, target, cover, vals)


@dataclass(frozen=True)
class CocycleReport:
    ok: bool
    failures: tuple[str, ...]
    triples_checked: int


def check_cocycle(c: Cocycle) -> CocycleReport:
    """g_ii = unit and g_ij·g_jk = g_ik after restriction to triple overlaps."""
    site, G = c.site, c.group
    C = site.category
    failures = []
    checked = 0
    n = len(c.cover)
    for i in range(n):
        uii = c.overlap(i, i)
        if c.values[(i, i)] != G.unit[uii]:
            failures.append(f"g_{i}{i} is not the unit over {uii!r}")
    for i in range(n):
        for j in range(n):
            for k in range(n):
                checked += 1
                uij, ujk, uik = c.overlap(i, j), c.overlap(j, k), c.overlap(i, k)
                triple = open_label(
                    site.open_of[c.cover[i]] & site.open_of[c.cover[j]] & site.open_of[c.cover[k]]
                )
                rij = C.hom(triple, uij)[0]
                rjk = C.hom(triple, ujk)[0]
                rik = C.hom(triple, uik)[0]
                gij = G.sections.restrict[rij][c.values[(i, j)]]
                gjk = G.sections.restrict[rjk][c.values[(j, k)]]
                gik = G.sections.restrict[rik][c.values[(i, k)]]
                if G.mul(triple, gij, gjk) != gik:
                    failures.append(
                        f"g_{i}{j}·g_{j}{k} != g_{i}{k} on the triple overlap {triple!r}"
                    )
    return CocycleReport(not failures, tuple(failures), checked)


# -- torsors from sections, sections from torsors ------------------------------------------

@dataclass(frozen=True)
class LocalSections:
    cover: tuple[Label, ...]
    sections: dict[int, Label]   # cover index -> section of P over that member


def extract_cocycle(T: TorsorCandidate, site: Site, target: Label, L: LocalSections) -> Cocycle:
    """The unique g_ij with s_j = s_i · g_ij on each overlap."""
    C = site.category
    P, G = T.space, T.group
    for i, u in enumerate(L.cover):
        if L.sections[i] not in set(P.value[u]):
            raise DanglingReference(f"chosen section over {u!r} does not exist")
    values: dict[tuple[int, int], Label] = {}
    n = len(L.cover)
    from .site import overlap as _overlap

    for i in range(n):
        for j in range(n):
            uij = _overlap(site, L.cover[i], L.cover[j])
            ri = C.hom(uij, L.cover[i])[0]
            rj = C.hom(uij, L.cover[j])[0]
            si = P.restrict[ri][L.sections[i]]
            sj = P.restrict[rj][L.sections[j]]
            carriers = [g for g in G.sections.value[uij] if T.act(uij, si, g) == sj]
            if len(carriers) != 1:
                raise NotUniquelyTransitive(
                    f"{len(carriers)} elements carry {si!r} to {sj!r} over {uij!r}"
                )
            values[(i, j)] = carriers[0]
    return cocycle(site, G, target, L.cover, values)


def restrict_group(G: GroupSheaf, sub: Site) -> GroupSheaf:
    """The group sheaf restricted to the opens of a slice site."""
    base = sub.category
    value = {u: G.sections.value[u] for u in base.objects}
    restrict = {
        f: dict(G.sections.restrict[_lift_arrow(G.sections.base, f)])
        for f in base.morphisms
        if not base.is_identity(f)
    }
    P = presheaf(base, value, restrict)
    return GroupSheaf(
        P,
        {u: dict(G.mult[u]) for u in base.objects},
        {u: G.unit[u] for u in base.objects},
        {u: dict(G.inverse[u]) for u in base.objects},
    )


def _lift_arrow(big, f):
    # slice arrows carry the same labels as in the full opens poset
    if f in set(big.morphisms):
        return f
    raise DanglingReference(f"arrow {f!r} not found in the ambient site")


@dataclass(frozen=True)
class GluedTorsor:
    site: Site                      # the slice over the cocycle's target
    torsor: TorsorCandidate
    canonical_sections: LocalSections


def glue_torsor(site: Site, G: GroupSheaf, c: Cocycle, bound: int | None = None) -> GluedTorsor:
    """Glue trivial torsors along the cocycle.

    A section over V is a tuple (t_i) with t_i in G(V ∩ U_i) satisfying
    t_i = g_ij · t_j on V ∩ U_ij; the right action is componentwise.
    The canonical sections s_i = (g_ki)_k trivialize each piece and
    extract back to the input cocycle on the nose.
    """
    report = check_cocycle(c)
    if not report.ok:
        raise InvalidCocycle("; ".join(report.failures))
    if not is_sheaf(G.sections, site.topology).ok:
        raise SemanticError("the coefficient presheaf is not a sheaf for the topology")
    limit_ = enumeration_bound(bound)

    sl = slice_site(site, c.target)
    Gs = restrict_group(G, sl)
    C = sl.category
    n = len(c.cover)
    from .site import overlap as _overlap

    def meet_label(v: Label, u: Label) -> Label:
        return open_label(sl.open_of[v] & site.open_of[u])

    value: dict[Label, tuple] = {}
    for v in C.objects:
        pieces = [meet_label(v, c.cover[i]) for i in range(n)]
        count = 1
        for lbl in pieces:
            count *= max(1, len(G.sections.value[lbl]))
            if count > limit_:
                raise IntractableSize("glued-section enumeration exceeds bound")
        sections = []
        for combo in product(*(G.sections.value[lbl] for lbl in pieces)):
            ok = True
            for i in range(n):
                for j in range(n):
                    uij = _overlap(site, c.cover[i], c.cover[j])
                    w = open_label(sl.open_of[v] & site.open_of[uij])
                    ri = C.hom(w, pieces[i])[0]
                    rj = C.hom(w, pieces[j])[0]
                    rij = site.category.hom(w, uij)[0]
                    ti = G.sections.restrict[ri][combo[i]]
                    tj = G.sections.restrict[rj][combo[j]]
                    gij = G.sections.restrict[rij][c.values[(i, j)]]
                    if ti != G.mul(w, gij, tj):
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                sections.append(combo)
        value[v] = tuple(sections)

    restrict = {}
    for f in C.morphisms:
        if C.is_identity(f):
            continue
        u, v = C.tgt[f], C.src[f]
        tab = {}
        for t in value[u]:
            image = tuple(
                G.sections.restrict[
                    site.category.hom(meet_label(v, c.cover[i]), meet_label(u, c.cover[i]))[0]
                ][t[i]]
                for i in range(n)
            )
            tab[t] = image
        restrict[f] = tab
    P = presheaf(C, value, restrict)

    action = {}
    for v in C.objects:
        tab = {}
        for t in value[v]:
            for g in Gs.sections.value[v]:
                moved = tuple(
                    G.mul(
                        meet_label(v, c.cover[i]),
                        t[i],
                        G.sections.restrict[
                            site.category.hom(meet_label(v, c.cover[i]), v)[0]
                        ][g],
                    )
                    for i in range(n)
                )
                tab[(t, g)] = moved
        action[v] = tab
    T = torsor_candidate(P, Gs, action)

    canonical = {}
    for i in range(n):
        ui = c.cover[i]
        # g_ki already lives on U_k ∩ U_i, which is the k-th piece of a
        # section over U_i
        s_i = tuple(c.values[(k, i)] for k in range(n))
        if s_i not in set(P.value[ui]):
            raise SemanticError(f"canonical section over {ui!r} is not a glued section")
        canonical[i] = s_i
    return GluedTorsor(sl, T, LocalSections(c.cover, canonical))


# -- cocycle equivalence ----------------------------------------------------------------------

@dataclass(frozen=True)
class EquivalenceResult:
    equivalent: bool
    witness: dict[int, Label] | None


def cocycles_equivalent(c1: Cocycle, c2: Cocycle, bound: int | None = None) -> EquivalenceResult:
    """Search for h_i with g'_ij = h_i^-1 · g_ij · h_j after restriction."""
    if c1.cover != c2.cover or c1.target != c2.target:
        raise CoverMismatch("cocycles live on different covers")
    if not c1.group.sections.same(c2.group.sections):
        raise CoverMismatch("cocycles have different coefficient groups")
    site, G = c1.site, c1.group
    C = site.category
    n = len(c1.cover)
    limit_ = enumeration_bound(bound)
    count = 1
    for u in c1.cover:
        count *= max(1, len(G.sections.value[u]))
        if count > limit_:
            raise IntractableSize("trivialization search exceeds bound")
    for combo in product(*(G.sections.value[u] for u in c1.cover)):
        good = True
        for i in range(n):
            for j in range(n):
                uij = c1.overlap(i, j)
                ri = C.hom(uij, c1.cover[i])[0]
                rj = C.hom(uij, c1.cover[j])[0]
                hi = G.sections.restrict[ri][combo[i]]
                hj = G.sections.restrict[rj][combo[j]]
                expected = G.mul(uij, G.mul(uij, G.inv(uij, hi), c1.values[(i, j)]), hj)
                if c2.values[(i, j)] != expected:
                    good = False
                    break
            if not good:
                break
        if good:
            return EquivalenceResult(True, {i: combo[i] for i in range(n)})
    return EquivalenceResult(False, None)
