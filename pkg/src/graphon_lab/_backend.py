"""Selects the compiled core when available, the numpy fallback otherwise.

Set ``GRAPHON_LAB_PURE=1`` to force the fallback.
"""
import os

if os.environ.get("GRAPHON_LAB_PURE", "") not in ("", "0"):
    from . import _pycore as core
else:
    try:
        from . import _core as core
    except ImportError:
        from . import _pycore as core

BACKEND = core.BACKEND

__all__ = ["core", "BACKEND"]
