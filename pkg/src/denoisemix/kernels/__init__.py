"""Decision kernels for the noising hot loops.

Imports the compiled extension when available and falls back to the pure
Python twin otherwise.  Both backends produce identical outputs; pick one
explicitly with DENOISEMIX_KERNELS=python|cython to override.
"""

import os

from . import _decisions_py

try:
    from . import _speedups
except ImportError:  # extension not built
    _speedups = None

_forced = os.environ.get("DENOISEMIX_KERNELS")
if _forced == "python":
    _impl = _decisions_py
elif _forced == "cython":
    if _speedups is None:
        raise ImportError("DENOISEMIX_KERNELS=cython but the extension is not built")
    _impl = _speedups
else:
    _impl = _speedups if _speedups is not None else _decisions_py

BACKEND = _impl.BACKEND
draw_replacements = _impl.draw_replacements
draw_span_mask = _impl.draw_span_mask
