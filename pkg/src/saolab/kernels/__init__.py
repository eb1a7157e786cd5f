"""Kernel backend selection.

The compiled extension is used when it imported cleanly; otherwise the
numpy fallback takes over. Both produce bit-identical integer results.
Set SAOLAB_PURE_PYTHON=1 to force the fallback (benchmarks and the
cross-backend tests rely on this).
"""

import os

from . import pyfallback

try:
    from . import _core
except ImportError:
    _core = None

if os.environ.get("SAOLAB_PURE_PYTHON", "0") not in ("", "0"):
    _impl = pyfallback
else:
    _impl = _core if _core is not None else pyfallback

HAVE_COMPILED = _core is not None
BACKEND = "compiled" if _impl is _core and _core is not None else "python"

conv3x3_int = _impl.conv3x3_int
conv3x3_float = _impl.conv3x3_float


def backends():
    """Importable backends by name, for benchmarks and equivalence tests."""
    found = {"python": pyfallback}
    if _core is not None:
        found["compiled"] = _core
    return found
