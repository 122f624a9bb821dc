"""Backend selection for the solver loops.

The compiled extension ``_kernels`` is used when importable; otherwise, or
when ``TENSEIG_PURE_PYTHON=1`` is set, the numpy fallback is used. Both
expose the same functions.
"""
import os

from . import _fallback

STATUS_NAMES = {0: "converged", 1: "iteration-cap", 2: "step-failure"}

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKENDS = {"python": _fallback}
if _compiled is not None:
    BACKENDS["compiled"] = _compiled

if _compiled is not None and os.environ.get("TENSEIG_PURE_PYTHON", "") not in ("1", "true", "yes"):
    DEFAULT_BACKEND = "compiled"
else:
    DEFAULT_BACKEND = "python"


def get_backend(name=None):
    """Return the kernel module for ``name`` (``"compiled"``, ``"python"`` or the default)."""
    name = name or DEFAULT_BACKEND
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(BACKENDS)}") from None
