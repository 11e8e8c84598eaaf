"""Pick the kernel implementation at import time.

The compiled ``_ckernels`` extension is preferred. Set ``LCSPERM_BACKEND=python``
to force the numpy fallback (useful for benchmarking and for checking that the
two agree).
"""
import importlib
import logging
import os

logger = logging.getLogger(__name__)

BACKENDS = ("cython", "python")


def load(name=None):
    """Return the kernel module for ``name`` ("cython" or "python")."""
    if name == "cython":
        return importlib.import_module("lcsperm._ckernels")
    if name == "python":
        return importlib.import_module("lcsperm._pykernels")
    raise ValueError(f"unknown backend {name!r}")


def available():
    names = []
    for name in BACKENDS:
        try:
            load(name)
        except ImportError:
            continue
        names.append(name)
    return names


def _select():
    requested = os.environ.get("LCSPERM_BACKEND", "").strip().lower()
    if requested:
        return requested, load(requested)
    try:
        return "cython", load("cython")
    except ImportError:
        logger.info("compiled kernels unavailable; using numpy fallback")
        return "python", load("python")


BACKEND, kernels = _select()
