"""Kernel backend selection: numba JIT kernels vs pure-numpy fallbacks.

The hot inner loops (edge-weight sampling, passage-time fields, oriented
reachability) exist in two interchangeable implementations:

* ``fpplab._kernels_numba`` -- ``@njit`` kernels, the default when numba
  imports cleanly;
* ``fpplab._kernels_numpy`` -- vectorized numpy fallbacks.

Both produce bit-identical integer outputs on identical inputs; the numpy
path is slower but has no JIT dependency (see ``benchmarks/``).

Selection order:

1. an explicit ``set_backend("numba" | "numpy")`` call (tests use this),
2. the ``FPPLAB_BACKEND`` environment variable,
3. ``numba`` when importable, else ``numpy``.
"""

from __future__ import annotations

import os

_ENV_VAR = "FPPLAB_BACKEND"
_VALID = ("numba", "numpy")

_forced: str | None = None
_resolved: str | None = None


def _numba_available() -> bool:
    try:
        import numba  # noqa: F401
    except Exception:
        return False
    return True


def set_backend(name: str | None) -> None:
    """Force a backend for this process; ``None`` re-resolves from the env."""
    global _forced, _resolved
    if name is not None and name not in _VALID:
        raise ValueError(f"unknown backend {name!r}; expected one of {_VALID}")
    _forced = name
    _resolved = None


def active_backend() -> str:
    """Resolve and return the active backend name."""
    global _resolved
    if _forced is not None:
        return _forced
    if _resolved is None:
        env = os.environ.get(_ENV_VAR, "").strip().lower()
        if env:
            if env not in _VALID:
                raise ValueError(
                    f"{_ENV_VAR}={env!r} is not a valid backend; expected one of {_VALID}"
                )
            _resolved = env
        else:
            _resolved = "numba" if _numba_available() else "numpy"
    return _resolved


def kernels():
    """Return the kernel module for the active backend."""
    if active_backend() == "numba":
        from fpplab import _kernels_numba

        return _kernels_numba
    from fpplab import _kernels_numpy

    return _kernels_numpy
