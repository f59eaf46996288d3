#!/usr/bin/env python3
"""Benchmark the compiled enumeration kernel against the pure-Python twin.

The workload is the workbench's hot loop: enumerate all natural families
between two presheaves on a small category, pruning by the commuting
squares.  Cases are sized so the pure backend takes a visible fraction
of a second; both backends must return identical output.

Run:  python3 benchmarks/bench_kernel.py [--repeat N]
"""

import argparse

import time

from sheafkit.kernel import backends


def square_case(size):
    # two slots, one shifted commuting-square constraint
    shift = [(i + 1) % size for i in range(size)]
    fold = [i // 2 for i in range(size)]
    return [size, size], [size, size], [(0, 1, shift, fold)]


def triangle_case(size):
    # three slots in a row of constraints
    shift = [(i + 1) % size for i in range(size)]
    swap = [size - 1 - i for i in range(size)]
    return (
        [size] * 3,
        [size] * 3,
        [(0, 1, shift, swap), (1, 2, swap, shift)],
    )


def chain_case(size, length):
    # an identity-restriction chain: heavy pruning, large candidate space
    fs = [size] * length
    gs = [size] * length
    ident = list(range(size))
    mors = [(k + 1, k, ident, ident) for k in range(length - 1)]
    return fs, gs, mors


def bench(fn, case, repeat):
    fs, gs, mors = case
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn(fs, gs, mors)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    impls = backends()
    if "compiled" not in impls:
        print("compiled backend unavailable; build the extension first")
    cases = [
        # unconstrained: output-dominated, both backends converge on
        # allocator speed since every family must be materialized
        ("free product 5^4", ([2, 2], [5, 5], [])),
        # constrained: search-dominated, the kernel's actual regime
        ("chain pruning 4^8", chain_case(4, 8)),
        ("square 5^10", square_case(5)),
        ("triangle 4^12", triangle_case(4)),
    ]

    width = max(len(name) for name, _ in cases)
    print(f"{'case':<{width}}  {'families':>9}  " + "  ".join(f"{n:>10}" for n in impls))
    for name, case in cases:
        times = {}
        outputs = {}
        for impl_name, fn in impls.items():
            times[impl_name], outputs[impl_name] = bench(fn, case, args.repeat)
        baseline = outputs["pure"]
        for impl_name, out in outputs.items():
            assert out == baseline, f"{impl_name} disagrees with pure on {name}"
        row = f"{name:<{width}}  {len(baseline):>9}  "
        row += "  ".join(f"{times[n] * 1000:>8.2f}ms" for n in impls)
        if "compiled" in times:
            row += f"  ({times['pure'] / times['compiled']:.1f}x)"
        print(row)


if __name__ == "__main__":
    main()
