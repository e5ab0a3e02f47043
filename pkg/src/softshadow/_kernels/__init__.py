"""Kernel backend selection.

The compiled Cython core is used when its extension built successfully;
``SOFTSHADOW_PURE_PYTHON=1`` forces the NumPy fallback. Both backends expose
the same four entry points with identical numerics.
"""

from __future__ import annotations

import os

from . import _purepy

if os.environ.get("SOFTSHADOW_PURE_PYTHON"):
    impl = _purepy
    COMPILED = False
else:
    try:
        from . import _core as impl  # type: ignore[attr-defined]

        COMPILED = True
    except ImportError:
        impl = _purepy
        COMPILED = False

BACKEND = "compiled" if COMPILED else "python"

closest_hit = impl.closest_hit
any_hit = impl.any_hit
occlusion_matrix = impl.occlusion_matrix
ao_hemisphere = impl.ao_hemisphere


def get_backend(name: str):
    """Fetch a backend module by name ('compiled' or 'python')."""
    if name == "python":
        return _purepy
    if name == "compiled":
        from . import _core  # noqa: F811  raises ImportError if not built

        return _core
    raise ValueError(f"unknown kernel backend {name!r}")
