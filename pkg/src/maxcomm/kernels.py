"""Kernel backend selection.

The compiled extension ``maxcomm._ckernels`` is used when it imports; the numpy
implementations in ``maxcomm._kernels_py`` are the fallback.  Library code
calls through :func:`get` so the backend can be switched at runtime (tests run
both)::

    from maxcomm import kernels
    with kernels.using("python"):
        ...
"""
from __future__ import annotations

import contextlib
import threading

from . import _kernels_py

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_BACKENDS = {"python": _kernels_py}
if _ckernels is not None:
    _BACKENDS["compiled"] = _ckernels

_lock = threading.Lock()
_active = _BACKENDS.get("compiled", _kernels_py)


def available():
    return sorted(_BACKENDS)


def has_compiled():
    return "compiled" in _BACKENDS


def get():
    return _active


def active_name():
    return _active.BACKEND


def use(name):
    """Select the backend by name (``"compiled"`` or ``"python"``)."""
    global _active
    try:
        mod = _BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} not available; have {available()}") from None
    with _lock:
        _active = mod


@contextlib.contextmanager
def using(name):
    prev = active_name()
    use(name)
    try:
        yield get()
    finally:
        use(prev)
