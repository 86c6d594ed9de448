"""Kernel backend selection.

Hot numeric kernels ship in two equivalent implementations: numba
``@njit`` loops and pure-numpy array code.  ``LEAKWAVE_BACKEND`` picks one:

* ``auto`` (default) - numba when importable, numpy otherwise
* ``numba``          - require numba, fail loudly if missing
* ``numpy``          - force the pure-numpy fallback

``LEAKWAVE_THREADS`` caps numba's parallel thread count (no effect on the
numpy path).  Selection happens once at import; ``benchmarks/bench_kernels.py``
times both implementations side by side.
"""

from __future__ import annotations

import os

_CHOICES = ("auto", "numba", "numpy")

_requested = os.environ.get("LEAKWAVE_BACKEND", "auto").strip().lower()
if _requested not in _CHOICES:
    raise ImportError(
        f"LEAKWAVE_BACKEND={_requested!r} not understood; use one of {_CHOICES}"
    )

HAVE_NUMBA = False
if _requested in ("auto", "numba"):
    try:
        import numba  # noqa: F401

        HAVE_NUMBA = True
    except ImportError:
        if _requested == "numba":
            raise ImportError(
                "LEAKWAVE_BACKEND=numba but the numba package is not installed"
            )

BACKEND = "numba" if HAVE_NUMBA else "numpy"

if HAVE_NUMBA:
    _threads = os.environ.get("LEAKWAVE_THREADS")
    if _threads:
        import numba

        n = max(1, min(int(_threads), numba.config.NUMBA_NUM_THREADS))
        numba.set_num_threads(n)


def active_backend() -> str:
    """Name of the kernel backend in use ('numba' or 'numpy')."""
    return BACKEND
