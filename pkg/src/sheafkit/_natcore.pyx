# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled enumeration kernel.

Same contract and output order as sheafkit._natcore_py; see that module
for the specification.  The backtracking walks slot functions as an
odometer over integer-encoded tables, checking each commuting-square
constraint as soon as both of its slots are assigned.
"""

from cpython.ref cimport Py_INCREF
from cpython.tuple cimport PyTuple_New, PyTuple_SET_ITEM
from libc.stdlib cimport malloc, free

BACKEND = "compiled"


cdef struct KernelData:
    Py_ssize_t n
    int* fs
    int* gs
    int* offs          # n+1 prefix offsets into assign
    int* assign
    Py_ssize_t mcount
    int* mp
    int* mq
    int* ft_off
    int* gt_off
    int* ft
    int* gt
    int* stage_begin   # per stage, range into the stage-sorted morphism order
    int* stage_end
    int* stage_mor


cdef bint _stage_ok(KernelData* kd, Py_ssize_t stage) noexcept:
    cdef Py_ssize_t s, m, x
    cdef int p, q
    for s in range(kd.stage_begin[stage], kd.stage_end[stage]):
        m = kd.stage_mor[s]
        p = kd.mp[m]
        q = kd.mq[m]
        for x in range(kd.fs[p]):
            if kd.assign[kd.offs[q] + kd.ft[kd.ft_off[m] + x]] != \
                    kd.gt[kd.gt_off[m] + kd.assign[kd.offs[p] + x]]:
                return False
    return True


cdef object _stage_tuple(KernelData* kd, Py_ssize_t stage):
    # one fresh tuple per candidate visit, shared by all deeper recursion
    cdef Py_ssize_t i, base = kd.offs[stage]
    cdef object inner, val
    inner = PyTuple_New(kd.fs[stage])
    for i in range(kd.fs[stage]):
        val = <object> kd.assign[base + i]
        Py_INCREF(val)
        PyTuple_SET_ITEM(inner, i, val)
    return inner


cdef void _rec(KernelData* kd, Py_ssize_t stage, list current, list out):
    cdef int f, g
    cdef Py_ssize_t base, i
    if stage == kd.n:
        out.append(tuple(current))
        return
    f = kd.fs[stage]
    g = kd.gs[stage]
    if f == 0:
        current[stage] = ()
        if _stage_ok(kd, stage):
            _rec(kd, stage + 1, current, out)
        return
    if g == 0:
        return
    base = kd.offs[stage]
    for i in range(f):
        kd.assign[base + i] = 0
    while True:
        if _stage_ok(kd, stage):
            current[stage] = _stage_tuple(kd, stage)
            _rec(kd, stage + 1, current, out)
        i = f - 1
        while i >= 0:
            kd.assign[base + i] += 1
            if kd.assign[base + i] < g:
                break
            kd.assign[base + i] = 0
            i -= 1
        if i < 0:
            return


def natural_families(f_sizes, g_sizes, morphisms):
    cdef Py_ssize_t n = len(f_sizes)
    if n == 0:
        return [()]
    cdef KernelData kd
    cdef Py_ssize_t i, k, m, pos
    cdef Py_ssize_t mcount = len(morphisms)
    cdef Py_ssize_t ft_total = 0, gt_total = 0

    stages = [[] for _ in range(n)]
    for m in range(mcount):
        p, q, ftab, gtab = morphisms[m]
        stages[max(p, q)].append(m)
        ft_total += len(ftab)
        gt_total += len(gtab)

    kd.n = n
    kd.mcount = mcount
    kd.fs = <int*> malloc(n * sizeof(int))
    kd.gs = <int*> malloc(n * sizeof(int))
    kd.offs = <int*> malloc((n + 1) * sizeof(int))
    kd.mp = <int*> malloc((mcount or 1) * sizeof(int))
    kd.mq = <int*> malloc((mcount or 1) * sizeof(int))
    kd.ft_off = <int*> malloc((mcount or 1) * sizeof(int))
    kd.gt_off = <int*> malloc((mcount or 1) * sizeof(int))
    kd.ft = <int*> malloc((ft_total or 1) * sizeof(int))
    kd.gt = <int*> malloc((gt_total or 1) * sizeof(int))
    kd.stage_begin = <int*> malloc(n * sizeof(int))
    kd.stage_end = <int*> malloc(n * sizeof(int))
    kd.stage_mor = <int*> malloc((mcount or 1) * sizeof(int))
    kd.assign = NULL

    out: list = []
    try:
        total = 0
        for k in range(n):
            kd.fs[k] = f_sizes[k]
            kd.gs[k] = g_sizes[k]
            kd.offs[k] = total
            total += f_sizes[k]
        kd.offs[n] = total
        kd.assign = <int*> malloc((total or 1) * sizeof(int))

        ft_pos = 0
        gt_pos = 0
        for m in range(mcount):
            p, q, ftab, gtab = morphisms[m]
            kd.mp[m] = p
            kd.mq[m] = q
            kd.ft_off[m] = ft_pos
            for i in range(len(ftab)):
                kd.ft[ft_pos + i] = ftab[i]
            ft_pos += len(ftab)
            kd.gt_off[m] = gt_pos
            for i in range(len(gtab)):
                kd.gt[gt_pos + i] = gtab[i]
            gt_pos += len(gtab)

        pos = 0
        for k in range(n):
            kd.stage_begin[k] = pos
            for m in stages[k]:
                kd.stage_mor[pos] = m
                pos += 1
            kd.stage_end[k] = pos

        _rec(&kd, 0, [None] * n, out)
    finally:
        free(kd.fs)
        free(kd.gs)
        free(kd.offs)
        free(kd.mp)
        free(kd.mq)
        free(kd.ft_off)
        free(kd.gt_off)
        free(kd.ft)
        free(kd.gt)
        free(kd.stage_begin)
        free(kd.stage_end)
        free(kd.stage_mor)
        if kd.assign != NULL:
            free(kd.assign)
    return out
