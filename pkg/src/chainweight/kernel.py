"""Backend selection for the Smith normal form kernel.

Prefers the compiled Cython extension and falls back to the pure-Python
twin.  Set CHAINWEIGHT_KERNEL=py to force the fallback (used by the
benchmark and by tests that compare the two backends).
"""

import os

if os.environ.get("CHAINWEIGHT_KERNEL") == "py":
    from ._kernel_py import snf_raw
    KERNEL_BACKEND = "python"
else:
    try:
        from ._kernel_cy import snf_raw  # type: ignore[no-redef]
        KERNEL_BACKEND = "cython"
    except ImportError:
        from ._kernel_py import snf_raw  # type: ignore[no-redef]
        KERNEL_BACKEND = "python"

__all__ = ["snf_raw", "KERNEL_BACKEND"]
