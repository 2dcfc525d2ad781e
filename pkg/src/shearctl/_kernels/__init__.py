"""Backend selection for the Newmark stepping kernel.

Two interchangeable implementations exist: a Cython extension
(``_newmark_c``) and a pure-numpy fallback (``_newmark_py``).  The active
one is chosen at import time from the ``SHEARCTL_BACKEND`` environment
variable (``auto`` | ``c`` | ``python``, default ``auto``) and can be
switched later with :func:`set_backend`.  Results agree to floating-point
noise; see ``benchmarks/bench_newmark.py`` for the speed comparison.
"""

import os

from . import _newmark_py

try:
    from . import _newmark_c
except ImportError:  # extension not built; numpy path carries the load
    _newmark_c = None

HAVE_COMPILED = _newmark_c is not None

_BACKENDS = {"python": _newmark_py}
if HAVE_COMPILED:
    _BACKENDS["c"] = _newmark_c

_active_name = None
run_newmark = None


def available_backends():
    return sorted(_BACKENDS)


def get_backend():
    return _active_name


def set_backend(name):
    """Select the stepping backend; ``auto`` prefers the compiled kernel."""
    global _active_name, run_newmark
    if name == "auto":
        name = "c" if HAVE_COMPILED else "python"
    if name not in _BACKENDS:
        raise ValueError(
            f"unknown backend {name!r}; available: {available_backends()}"
        )
    _active_name = name
    run_newmark = _BACKENDS[name].run_newmark
    return name


set_backend(os.environ.get("SHEARCTL_BACKEND", "auto"))
