"""Kernel backend selection.

The compiled twin is preferred when importable; FOLWERK_KERNEL=pure|c forces
a choice. Everything downstream imports the three kernel callables from here
and never from a twin directly.
"""

from __future__ import annotations

import os

_choice = os.environ.get("FOLWERK_KERNEL", "").strip().lower()

if _choice == "pure":
    from . import pure as _impl
elif _choice == "c":
    from . import _speedups as _impl  # type: ignore[attr-defined]
else:
    try:
        from . import _speedups as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import pure as _impl

BACKEND: str = _impl.BACKEND
merge_mul = _impl.merge_mul
rank_int = _impl.rank_int
rank_nullspace_int = _impl.rank_nullspace_int

__all__ = ["BACKEND", "merge_mul", "rank_int", "rank_nullspace_int"]
