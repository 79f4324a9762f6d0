"""Kernel selection.

The compiled kernel is used when it imports; otherwise the numpy fallback.
``SCIENET_BACKEND=python`` forces the fallback.
"""

import logging
import os

from . import _kernel_py

log = logging.getLogger(__name__)

try:
    from . import _kernel as _kernel_c
except ImportError:  # extension not built
    _kernel_c = None

BACKENDS = {"python": _kernel_py}
if _kernel_c is not None:
    BACKENDS["cython"] = _kernel_c


def _default():
    forced = os.environ.get("SCIENET_BACKEND", "").strip().lower()
    if forced:
        if forced not in BACKENDS:
            log.warning("backend %r unavailable; using %s", forced, next(reversed(BACKENDS)))
        else:
            return BACKENDS[forced]
    return _kernel_c or _kernel_py


kernel = _default()


def get(name=None):
    if name is None:
        return kernel
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown or unavailable backend {name!r}; have {sorted(BACKENDS)}") from None


def compiled_available() -> bool:
    return _kernel_c is not None
