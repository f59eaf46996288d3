"""Pure-Python enumeration kernel.

Enumerates all component families satisfying a set of commuting-square
constraints over integer-encoded tables.  This is the hot inner loop of
the whole workbench: natural-transformation enumeration, matching
families, Hom(X, Omega), and exponentials all reduce to it.

Contract shared with the compiled backend (sheafkit._natcore):

    natural_families(f_sizes, g_sizes, morphisms) -> list of families

    f_sizes[k], g_sizes[k]: sizes of the source and target value sets at
        slot k.  A family assigns to each slot k a function
        {0..f_sizes[k]-1} -> {0..g_sizes[k]-1}, encoded as a tuple.
    morphisms: list of (p, q, ftab, gtab) constraints meaning
        for all x < f_sizes[p]:  family[q][ftab[x]] == gtab[family[p][x]]
        where ftab maps slot-p source indices to slot-q source indices
        and gtab maps slot-p target indices to slot-q target indices.

Families are produced in lexicographic order of the concatenated
function tuples; both backends must agree on this order exactly.
"""

from __future__ import annotations

from itertools import product

BACKEND = "pure"


def natural_families(f_sizes, g_sizes, morphisms):
    n = len(f_sizes)
    if n == 0:
        return [()]
    by_stage = [[] for _ in range(n)]
    for p, q, ftab, gtab in morphisms:
        by_stage[max(p, q)].append((p, q, ftab, gtab))

    out = []
    assign: list = [None] * n

    def consistent(stage: int) -> bool:
        for p, q, ftab, gtab in by_stage[stage]:
            fp, fq = assign[p], assign[q]
            for x in range(f_sizes[p]):
                if fq[ftab[x]] != gtab[fp[x]]:
                    return False
        return True

    def rec(stage: int) -> None:
        if stage == n:
            out.append(tuple(assign))
            return
        for func in product(range(g_sizes[stage]), repeat=f_sizes[stage]):
            assign[stage] = func
            if consistent(stage):
                rec(stage + 1)
        assign[stage] = None

    rec(0)
    return out
