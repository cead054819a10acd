"""Simplex kernel selection.

Prefers the compiled Cython kernel when it is built; falls back to the
pure-Python twin otherwise.  Set RVLINE_PURE_PYTHON=1 to force the
fallback (used by the benchmark to compare both lanes).
"""

import os

from . import _simplex_py

if os.environ.get("RVLINE_PURE_PYTHON") == "1":
    impl = _simplex_py
else:
    try:
        from . import _simplex_cy as impl
    except ImportError:
        impl = _simplex_py

KERNEL_NAME = impl.KERNEL_NAME
OPTIMAL = impl.OPTIMAL
UNBOUNDED = impl.UNBOUNDED
run = impl.run
pivot = impl.pivot
