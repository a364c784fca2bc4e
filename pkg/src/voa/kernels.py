"""Kernel backend selection.

The compiled ``voa._core`` extension is preferred; the pure-Python twin in
``voa._core_py`` is used when the extension is not built or when the
environment variable ``VOA_PURE_PYTHON`` is set to a non-empty value other
than ``0``.  ``BACKEND`` names the implementation in use.
"""

import os

from . import _core_py

if os.environ.get("VOA_PURE_PYTHON", "") not in ("", "0"):
    _impl = _core_py
    BACKEND = "python"
else:
    try:
        from . import _core as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _core_py
        BACKEND = "python"

truncated_poisson_mean = _impl.truncated_poisson_mean
geometric_moment_sums = _impl.geometric_moment_sums
fifo_novelty = _impl.fifo_novelty


def available_backends():
    """Return ``{name: module}`` for every kernel implementation importable here."""
    found = {"python": _core_py}
    try:
        from . import _core

        found["cython"] = _core
    except ImportError:
        pass
    return found
