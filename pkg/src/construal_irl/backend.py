"""Import-time selection of the Bellman-backup backend.

The compiled Cython kernels are used when the extension built; otherwise the
numpy fallback takes over transparently. Set ``CONSTRUAL_IRL_BACKEND`` to
``python`` or ``compiled`` to force a choice (the benchmark does this to
compare the two).
"""

import os

from . import kernels_py

try:
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

_requested = os.environ.get("CONSTRUAL_IRL_BACKEND", "").strip().lower()
if _requested in ("", "auto"):
    _active = _compiled if _compiled is not None else kernels_py
elif _requested == "python":
    _active = kernels_py
elif _requested == "compiled":
    if _compiled is None:
        raise ImportError(
            "CONSTRUAL_IRL_BACKEND=compiled, but construal_irl._kernels is not built"
        )
    _active = _compiled
else:
    raise ImportError(f"unknown CONSTRUAL_IRL_BACKEND value: {_requested!r}")


def backend_name():
    """Name of the active backend: 'compiled' or 'python'."""
    return _active.BACKEND_NAME


def available_backends():
    """Mapping of backend name to kernel module, for tests and benchmarks."""
    out = {"python": kernels_py}
    if _compiled is not None:
        out["compiled"] = _compiled
    return out


hard_value_iteration = _active.hard_value_iteration
soft_value_iteration = _active.soft_value_iteration
