"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the numpy
fallback is. Both expose the same functions with bit-identical results.
Setting ``APFRRT_KERNELS=python`` forces the fallback.
"""

import logging
import os

from apfrrt import _pykernels

log = logging.getLogger(__name__)

try:
    from apfrrt import _ckernels
except ImportError:  # pragma: no cover - depends on the build
    _ckernels = None

_BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    _BACKENDS["cython"] = _ckernels

_active = _BACKENDS.get("cython", _pykernels)
if os.environ.get("APFRRT_KERNELS", "").lower() == "python":
    _active = _pykernels

FUNCTIONS = ("nearest", "within_radius", "classify_groups", "clearance_groups", "clearance_grad")


def available_backends():
    return sorted(_BACKENDS)


def backend_name():
    return "cython" if _active is _ckernels and _ckernels is not None else "python"


def use_backend(name):
    """Switch the active backend ("cython" or "python") for this process."""
    global _active
    try:
        _active = _BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} not available; have {available_backends()}") from None
    log.debug("kernel backend set to %s", name)


def nearest(X, n, q, wrap):
    return _active.nearest(X, n, q, wrap)


def within_radius(X, n, q, wrap, r):
    return _active.within_radius(X, n, q, wrap, r)


def classify_groups(P, kind, geom, imp, cost):
    return _active.classify_groups(P, kind, geom, imp, cost)


def clearance_groups(P, kind, geom, imp):
    return _active.clearance_groups(P, kind, geom, imp)


def clearance_grad(x, y, kind, geom, imp):
    return _active.clearance_grad(x, y, kind, geom, imp)
