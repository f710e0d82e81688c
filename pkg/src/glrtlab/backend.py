"""Kernel backend selection.

The compiled extension is preferred when importable; the numpy
implementation is the fallback.  ``GLRTLAB_BACKEND=python|compiled``
forces a choice (useful for the parity tests and the benchmark).
Both backends generate bit-identical random streams.
"""

import importlib
import os

from . import _purekern

_FORCED = os.environ.get("GLRTLAB_BACKEND", "").strip().lower()


def _load():
    if _FORCED == "python":
        return _purekern
    try:
        fast = importlib.import_module("glrtlab._fastkern")
    except ImportError:
        if _FORCED == "compiled":
            raise ImportError(
                "GLRTLAB_BACKEND=compiled but the glrtlab._fastkern extension "
                "is not built; reinstall with a C compiler available"
            )
        return _purekern
    return fast


kernels = _load()


def active_backend():
    """Name of the kernel backend in use ('compiled' or 'python')."""
    return kernels.BACKEND_NAME


def get_backend(name):
    """Fetch a backend module by name, independent of the active one."""
    if name == "python":
        return _purekern
    if name == "compiled":
        return importlib.import_module("glrtlab._fastkern")
    raise ValueError(f"unknown backend {name!r}")
