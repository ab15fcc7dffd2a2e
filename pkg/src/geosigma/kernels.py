"""Backend selection for the fast sweeping kernel.

The compiled extension is used when it imports; set ``GEOSIGMA_PURE=1`` to
force the numpy implementation.
"""
import os

from . import _sweep_py

try:
    from . import _sweep as _compiled
except ImportError:  # extension not built
    _compiled = None

if _compiled is not None and os.environ.get("GEOSIGMA_PURE", "") != "1":
    BACKEND = "compiled"
    sweep_half = _compiled.sweep_half
else:
    BACKEND = "python"
    sweep_half = _sweep_py.sweep_half

sweep_half_python = _sweep_py.sweep_half
sweep_half_compiled = _compiled.sweep_half if _compiled is not None else None
