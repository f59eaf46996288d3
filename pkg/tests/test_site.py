"""Sieves, topologies, and open-cover sites."""

import pytest

from sheafkit.errors import ApexMismatch, CodomainMismatch, SemanticError
from sheafkit.fincat import yoneda_presheaf
from sheafkit.gallery import (
    chain3_site,
    discrete2_site,
    discrete3_site,
    pseudocircle_site,
    sierpinski_site,
)
from sheafkit.limits import pullback, set_fun
from sheafkit.site import (
    GrothendieckTopology,
    Sieve,
    all_sieves,
    empty_sieve,
    generate_sieve,
    maximal_sieve,
    open_label,
    overlap,
    pullback_sieve,
    sieve,
    trivial_topology,
    validate_topology,
)


EMPTY = "{}"
TOP_S = "{b,t}"
OPEN_T = "{t}"


def test_identity_generates_maximal_sieve():
    site = sierpinski_site()
    C = site.category
    S = generate_sieve(C, TOP_S, [C.identity[TOP_S]])
    assert S == maximal_sieve(C, TOP_S)


def test_generated_sieve_on_sierpinski():
    site = sierpinski_site()
    C = site.category
    S = generate_sieve(C, TOP_S, [f"{OPEN_T}<{TOP_S}"])
    assert S.arrows == {f"{EMPTY}<{TOP_S}", f"{OPEN_T}<{TOP_S}"}


def test_empty_family_generates_empty_sieve():
    site = sierpinski_site()
    S = generate_sieve(site.category, TOP_S, [])
    assert S.arrows == frozenset()


def test_generate_rejects_wrong_codomain():
    site = sierpinski_site()
    with pytest.raises(CodomainMismatch):
        generate_sieve(site.category, OPEN_T, [f"{OPEN_T}<{TOP_S}"])


def test_sieve_closure_validated():
    site = sierpinski_site()
    with pytest.raises(SemanticError):
        sieve(site.category, TOP_S, [f"{OPEN_T}<{TOP_S}"])  # misses the precomposite


def test_pullback_along_identity_is_same_sieve():
    site = sierpinski_site()
    C = site.category
    S = generate_sieve(C, TOP_S, [f"{OPEN_T}<{TOP_S}"])
    assert pullback_sieve(C, C.identity[TOP_S], S) == S


def test_pullback_along_member_is_maximal():
    site = sierpinski_site()
    C = site.category
    S = generate_sieve(C, TOP_S, [f"{OPEN_T}<{TOP_S}"])
    assert pullback_sieve(C, f"{OPEN_T}<{TOP_S}", S) == maximal_sieve(C, OPEN_T)
    assert pullback_sieve(C, f"{EMPTY}<{TOP_S}", S) == maximal_sieve(C, EMPTY)


def test_pullback_apex_mismatch():
    site = sierpinski_site()
    C = site.category
    S = maximal_sieve(C, OPEN_T)
    with pytest.raises(ApexMismatch):
        pullback_sieve(C, f"{OPEN_T}<{TOP_S}", S)


def test_trivial_topology_is_valid():
    site = sierpinski_site()
    J = trivial_topology(site.category)
    assert validate_topology(J).ok


@pytest.mark.parametrize(
    "make",
    [sierpinski_site, discrete2_site, chain3_site, pseudocircle_site, discrete3_site],
)
def test_open_cover_topology_is_valid(make):
    site = make()
    report = validate_topology(site.topology)
    assert report.ok, report.violations


def test_sierpinski_covering_sieves():
    site = sierpinski_site()
    J = site.topology
    # the only covering sieve on the whole space is the maximal one
    assert J.covers[TOP_S] == (maximal_sieve(site.category, TOP_S),)
    # the empty open is covered by the empty sieve
    assert empty_sieve(site.category, EMPTY) in set(J.covers[EMPTY])


def test_discrete2_pieces_cover_the_space():
    site = discrete2_site()
    C = site.category
    D = "{a,b}"
    S = generate_sieve(C, D, [f"{{a}}<{D}", f"{{b}}<{D}"])
    assert S in set(site.topology.covers[D])


def test_removing_a_transitivity_forced_sieve_is_reported():
    site = discrete3_site()
    C = site.category
    D = "{a,b,c}"
    singles = generate_sieve(C, D, [f"{{a}}<{D}", f"{{b}}<{D}", f"{{c}}<{D}"])
    mutated = {
        u: tuple(S for S in sieves if not (u == D and S == singles))
        for u, sieves in site.topology.covers.items()
    }
    report = validate_topology(GrothendieckTopology(C, mutated))
    assert not report.ok
    assert any(v.axiom == "transitivity" and v.at == D for v in report.violations)


def test_generated_sieves_satisfy_closure_invariant():
    site = pseudocircle_site()
    C = site.category
    for u in C.objects:
        for S in all_sieves(C, u):
            for f in S.arrows:
                for g in C.morphisms:
                    if C.tgt[g] == C.src[f]:
                        assert C.compose(f, g) in S.arrows


def test_pullback_of_maximal_is_maximal_everywhere():
    site = chain3_site()
    C = site.category
    for u in C.objects:
        M = maximal_sieve(C, u)
        for f in C.into(u):
            assert pullback_sieve(C, f, M) == maximal_sieve(C, C.src[f])


def test_poset_pullback_is_intersection_via_hom_functors():
    site = pseudocircle_site()
    C = site.category
    ux, uy, whole = "{a,b,x}", "{a,b,y}", "{a,b,x,y}"
    assert overlap(site, ux, uy) == "{a,b}"
    hx = yoneda_presheaf(C, ux)
    hy = yoneda_presheaf(C, uy)
    hu = yoneda_presheaf(C, whole)
    hmeet = yoneda_presheaf(C, overlap(site, ux, uy))
    for w in C.objects:
        f = set_fun(hx.value[w], hu.value[w], {m: f"{w}<{whole}" for m in hx.value[w]})
        g = set_fun(hy.value[w], hu.value[w], {m: f"{w}<{whole}" for m in hy.value[w]})
        P, _, _ = pullback(f, g)
        assert len(P) == len(hmeet.value[w])


def test_open_labels_are_canonical():
    site = discrete2_site()
    assert open_label(frozenset()) == "{}"
    assert set(site.category.objects) == {"{}", "{a}", "{b}", "{a,b}"}
