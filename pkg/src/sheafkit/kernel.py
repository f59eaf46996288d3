"""Backend selection for the enumeration kernel.

Prefers the compiled extension, falls back to the pure-Python twin.
Set SHEAFKIT_PURE=1 to force the fallback (used by the benchmark and by
tests that compare the two backends).
"""

from __future__ import annotations

import os

from . import _natcore_py

if os.environ.get("SHEAFKIT_PURE"):
    _impl = _natcore_py
else:
    try:
        from . import _natcore as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _natcore_py

natural_families = _impl.natural_families
BACKEND: str = _impl.BACKEND


def backends():
    """All importable backends, for cross-checking and benchmarks."""
    found = {"pure": _natcore_py.natural_families}
    try:
        from . import _natcore
    except ImportError:
        pass
    else:
        found["compiled"] = _natcore.natural_families
    return found
