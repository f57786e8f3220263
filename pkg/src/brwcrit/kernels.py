"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise the pure-Python
twin is used.  Set ``BRWCRIT_PURE_PYTHON=1`` to force the fallback.
"""

import logging
import os

from . import _pykernels

logger = logging.getLogger(__name__)

_BACKENDS = {"python": _pykernels}

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None
else:
    _BACKENDS["cython"] = _ckernels

if _ckernels is not None and os.environ.get("BRWCRIT_PURE_PYTHON", "") != "1":
    BACKEND = "cython"
else:
    BACKEND = "python"

_impl = _BACKENDS[BACKEND]
logger.debug("kernel backend: %s", BACKEND)

REACHED = _pykernels.REACHED
NEED_UNIFORMS = _pykernels.NEED_UNIFORMS
GROW = _pykernels.GROW
CAPPED = _pykernels.CAPPED
EXTINCT = _pykernels.EXTINCT


def available_backends():
    return sorted(_BACKENDS)


def get_backend(name=None):
    """Return the kernel module for ``name`` (default: the active backend)."""
    if name is None:
        return _impl
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(
            f"kernel backend {name!r} not available; have {available_backends()}"
        ) from None


sturm_count = _impl.sturm_count
largest_eigenvalue = _impl.largest_eigenvalue
solve_shifted = _impl.solve_shifted
advance = _impl.advance
