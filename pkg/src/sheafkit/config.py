"""Enumeration bounds.

Every exhaustive search is guarded by a candidate-count bound; exceeding
it raises IntractableSize rather than truncating silently.  The default
can be overridden with the WORKBENCH_BOUND environment variable or a
``bound=`` argument at any call site.
"""

from __future__ import annotations

import os

DEFAULT_BOUND = 2_000_000

# Hom-sets larger than this make category validation itself intractable.
DEFAULT_HOM_BOUND = 64

# Recursion guard for formula evaluation.
DEFAULT_FORMULA_DEPTH = 32


def enumeration_bound(override: int | None = None) -> int:
    if override is not None:
        return override
    env = os.environ.get("WORKBENCH_BOUND")
    if env:
        return int(env)
    return DEFAULT_BOUND
