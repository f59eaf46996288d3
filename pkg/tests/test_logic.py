"""Kripke-Joyal forcing and compositional subobject semantics."""

import pytest

from sheafkit.classifier import enumerate_subobjects, subobject
from sheafkit.errors import IllSorted, ParseError, UnknownSubobject
from sheafkit.fincat import presheaf
from sheafkit.gallery import discrete2_site, sierpinski_site
from sheafkit.logic import (
    Bottom,
    Eq,
    Exists,
    Implies,
    Mem,
    Top,
    check_sorting,
    forces,
    format_formula,
    interpret,
    logic_model,
    parse_formula,
)
from sheafkit.sheaf import terminal_presheaf

from formula_corpus import (
    CONTEXT,
    excluded_middle,
    full_corpus,
    standard_model,
    tautology_list,
)


def all_environments(model, context, u):
    envs = [{}]
    for v, s in context:
        envs = [{**e, v: x} for e in envs for x in model.sorts[s].value[u]]
    return envs


# -- parsing ------------------------------------------------------------------

def test_parse_round_trip():
    texts = [
        "(forall x F (implies (in x A) (in x B)))",
        "(or (in x A) (not (in x A)))",
        "(exists y F (and (eq x y) true))",
        "(true)",
        "false",
    ]
    for text in texts:
        phi = parse_formula(text)
        assert parse_formula(format_formula(phi)) == phi


def test_parse_errors_carry_positions():
    with pytest.raises(ParseError, match="column"):
        parse_formula("(and (in x A)")
    with pytest.raises(ParseError):
        parse_formula("(frob x)")
    with pytest.raises(ParseError):
        parse_formula("(true) (true)")


# -- sorting ------------------------------------------------------------------------

def test_sorting_discipline():
    model = standard_model(sierpinski_site())
    with pytest.raises(IllSorted):
        check_sorting(model, Mem("z", "A"), CONTEXT)
    with pytest.raises(UnknownSubobject):
        check_sorting(model, Mem("x", "Z"), CONTEXT)
    with pytest.raises(IllSorted):
        check_sorting(model, Exists("x", "F", Mem("x", "A")), CONTEXT)  # rebinding
    with pytest.raises(IllSorted):
        check_sorting(model, Exists("y", "G", Top()), CONTEXT)  # unknown sort


# -- base clauses ----------------------------------------------------------------------

def test_top_is_forced_everywhere_and_bottom_only_over_the_empty_open():
    site = sierpinski_site()
    model = standard_model(site)
    for u in site.category.objects:
        for env in all_environments(model, CONTEXT, u):
            assert forces(model, u, Top(), env, CONTEXT)
            expected = not site.open_of[u]  # empty sieve covers exactly the empty open
            assert forces(model, u, Bottom(), env, CONTEXT) == expected


def test_local_equality_of_distinct_sections():
    # a non-separated presheaf: two sections over D that agree on the cover
    site = discrete2_site()
    C = site.category
    D2 = "{a,b}"
    P = presheaf(
        C,
        {D2: ("u", "v"), "{a}": ("s",), "{b}": ("t",), "{}": ("*",)},
        {
            f"{{a}}<{D2}": {"u": "s", "v": "s"},
            f"{{b}}<{D2}": {"u": "t", "v": "t"},
            f"{{}}<{D2}": {"u": "*", "v": "*"},
            "{}<{a}": {"s": "*"},
            "{}<{b}": {"t": "*"},
        },
    )
    model = logic_model(site, {"P": P}, {})
    ctx = (("x", "P"), ("y", "P"))
    phi = Eq("x", "y")
    assert forces(model, D2, phi, {"x": "u", "y": "v"}, ctx)
    meaning = interpret(model, phi, ctx)
    assert ("u", "v") in meaning.parts[D2]


def test_existence_forced_locally_without_a_global_section():
    site = discrete2_site()
    C = site.category
    D2 = "{a,b}"
    Q = presheaf(
        C,
        {D2: (), "{a}": ("s",), "{b}": ("t",), "{}": ("*",)},
        {
            f"{{a}}<{D2}": {}, f"{{b}}<{D2}": {}, f"{{}}<{D2}": {},
            "{}<{a}": {"s": "*"}, "{}<{b}": {"t": "*"},
        },
    )
    one = terminal_presheaf(C)
    model = logic_model(site, {"Q": Q, "F": one}, {})
    phi = Exists("y", "Q", Top())
    assert len(Q.value[D2]) == 0
    assert forces(model, D2, phi, {}, ())
    meaning = interpret(model, phi, ())
    assert () in meaning.parts[D2]


# -- the three headline properties -----------------------------------------------------

@pytest.mark.parametrize("make_site", [sierpinski_site, discrete2_site])
def test_monotonicity_on_the_corpus(make_site):
    site = make_site()
    model = standard_model(site)
    C = site.category
    for phi in full_corpus():
        for u in C.objects:
            for env in all_environments(model, CONTEXT, u):
                if not forces(model, u, phi, env, CONTEXT):
                    continue
                for f in C.into(u):
                    v = C.src[f]
                    env_v = {
                        w: model.sorts[dict(CONTEXT)[w]].restrict[f][x]
                        for w, x in env.items()
                    }
                    assert forces(model, v, phi, env_v, CONTEXT), format_formula(phi)


@pytest.mark.parametrize("make_site", [sierpinski_site, discrete2_site])
def test_local_character_on_the_corpus(make_site):
    site = make_site()
    model = standard_model(site)
    C = site.category
    for phi in full_corpus():
        for u in C.objects:
            for env in all_environments(model, CONTEXT, u):
                for S in site.topology.covers[u]:
                    locally = all(
                        forces(
                            model,
                            C.src[f],
                            phi,
                            {
                                w: model.sorts[dict(CONTEXT)[w]].restrict[f][x]
                                for w, x in env.items()
                            },
                            CONTEXT,
                        )
                        for f in S.arrows
                    )
                    if locally:
                        assert forces(model, u, phi, env, CONTEXT), format_formula(phi)


@pytest.mark.parametrize("make_site", [sierpinski_site, discrete2_site])
def test_engine_equivalence_on_the_corpus(make_site):
    site = make_site()
    model = standard_model(site)
    C = site.category
    for phi in full_corpus():
        meaning = interpret(model, phi, CONTEXT)
        for u in C.objects:
            for env in all_environments(model, CONTEXT, u):
                forced = forces(model, u, phi, env, CONTEXT)
                member = (env["x"],) in meaning.parts[u]
                assert forced == member, format_formula(phi)


# -- intuitionistic soundness -----------------------------------------------------------

def valuations(site):
    one = terminal_presheaf(site.category)
    subs = enumerate_subobjects(site.topology, one)
    for P in subs:
        for Q in subs:
            for R in subs:
                yield logic_model(
                    site, {"F": one},
                    {"P": ("F", P), "Q": ("F", Q), "R": ("F", R)},
                )


@pytest.mark.parametrize("make_site", [sierpinski_site, discrete2_site])
def test_intuitionistic_tautologies_forced_everywhere(make_site):
    site = make_site()
    for model in valuations(site):
        for phi in tautology_list():
            for u in site.category.objects:
                for env in all_environments(model, CONTEXT, u):
                    assert forces(model, u, phi, env, CONTEXT), format_formula(phi)


def test_excluded_middle_fails_on_sierpinski():
    site = sierpinski_site()
    one = terminal_presheaf(site.category)
    subs = enumerate_subobjects(site.topology, one)
    top_open = "{b,t}"
    failures = 0
    for P in subs:
        model = logic_model(site, {"F": one}, {"P": ("F", P)})
        if not forces(model, top_open, excluded_middle(), {"x": ()}, CONTEXT):
            failures += 1
    assert failures > 0


def test_interpretation_of_atoms_and_connectives_is_definitional():
    site = sierpinski_site()
    model = standard_model(site)
    A = model.predicates["A"][1]
    B = model.predicates["B"][1]
    mem = interpret(model, Mem("x", "A"), CONTEXT)
    assert {u: {t[0] for t in mem.parts[u]} for u in site.category.objects} == {
        u: set(A.parts[u]) for u in site.category.objects
    }
    from sheafkit.classifier import implies_sub

    imp = interpret(model, Implies(Mem("x", "A"), Mem("x", "B")), CONTEXT)
    direct = implies_sub(A, B)
    assert {u: {t[0] for t in imp.parts[u]} for u in site.category.objects} == {
        u: set(direct.parts[u]) for u in site.category.objects
    }
    top = interpret(model, Top(), CONTEXT)
    assert all(len(top.parts[u]) == len(model.sorts["F"].value[u]) for u in site.category.objects)
