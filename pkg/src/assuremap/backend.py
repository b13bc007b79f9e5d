"""Selects the compiled kernel extension or the NumPy fallback at import.

Set ASSUREMAP_BACKEND=python or =native to force a choice; the default
("auto") prefers the compiled extension and falls back silently. The two
implementations agree to floating-point round-off (see tests/test_backends).
"""

import os

from assuremap import _kernels_py

_requested = os.environ.get("ASSUREMAP_BACKEND", "auto")
if _requested not in ("auto", "native", "python"):
    raise ValueError(
        f"ASSUREMAP_BACKEND must be auto, native, or python, got {_requested!r}"
    )

HAVE_NATIVE = False
try:
    from assuremap import _kernels as _native
    HAVE_NATIVE = True
except ImportError:
    _native = None
    if _requested == "native":
        raise ImportError(
            "ASSUREMAP_BACKEND=native but the compiled extension is not built; "
            "reinstall with a working C toolchain or unset the variable"
        )

if _requested == "python" or _native is None:
    BACKEND = "python"
    _impl = _kernels_py
else:
    BACKEND = "native"
    _impl = _native

warp_bilinear = _impl.warp_bilinear
rbf_cross = _impl.rbf_cross
