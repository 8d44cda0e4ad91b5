"""Numeric engine selection.

The compiled kernel is preferred when its extension module imported
cleanly; the pure-Python mirror is always available.  Setting the
environment variable SAFEBLEND_PURE to a non-empty value forces the
pure kernel even when the compiled one is present.
"""

from __future__ import annotations

import os

from . import _pure

try:
    from . import _fastcore
except ImportError:  # the extension was not built on this install
    _fastcore = None

COMPILED_AVAILABLE = _fastcore is not None


def get_engine(name: str = "auto"):
    """Resolve an engine name to (run_closed_loop, resolved_name).

    Names: "auto" (compiled when available), "compiled", "pure".
    """
    if name == "auto":
        if COMPILED_AVAILABLE and not os.environ.get("SAFEBLEND_PURE"):
            return _fastcore.run_closed_loop, "compiled"
        return _pure.run_closed_loop, "pure"
    if name == "compiled":
        if not COMPILED_AVAILABLE:
            raise RuntimeError("compiled engine is not available in this install")
        return _fastcore.run_closed_loop, "compiled"
    if name == "pure":
        return _pure.run_closed_loop, "pure"
    raise ValueError(f"unknown engine {name!r}")
