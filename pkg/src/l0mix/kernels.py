"""Run-loop backend selection.

The compiled kernel is used when the extension imports; otherwise the
pure-Python loop is. Both share one call signature and result layout.
"""
from __future__ import annotations

from . import _pykernel

try:
    from ._kernel import run_kernel as _compiled_kernel
except ImportError:  # extension not built
    _compiled_kernel = None

BACKENDS = ("cython", "python") if _compiled_kernel is not None else ("python",)
DEFAULT_BACKEND = BACKENDS[0]


def get_kernel(backend: str | None = None):
    name = backend or DEFAULT_BACKEND
    if name == "python":
        return _pykernel.run_kernel
    if name == "cython":
        if _compiled_kernel is None:
            raise RuntimeError("compiled kernel is not available; rebuild the package")
        return _compiled_kernel
    raise ValueError(f"unknown backend {name!r}; available: {', '.join(BACKENDS)}")
