"""Backend switch for the hot loops.

Kernels are compiled with numba when it imports and ``GRIDCARVE_NO_NUMBA``
is unset (or ``0``); otherwise the pure numpy/scipy paths run. The choice
can be flipped at runtime with ``set_backend`` (tests and the benchmark do).
"""

import os

_FALSY = {"", "0", "false", "no", "off"}

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

_use_numba = HAVE_NUMBA and os.environ.get("GRIDCARVE_NO_NUMBA", "").strip().lower() in _FALSY


def njit(func):
    """Compile ``func`` lazily when numba exists, else return it unchanged."""
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True, nogil=True)(func)


def use_numba():
    return _use_numba


def backend():
    return "numba" if _use_numba else "numpy"


def set_backend(name):
    global _use_numba
    if name == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba is not installed")
        _use_numba = True
    elif name == "numpy":
        _use_numba = False
    else:
        raise ValueError(f"unknown backend {name!r}")


def apply_thread_cap():
    """Honour ``GRIDCARVE_THREADS`` (0 or unset means numba's default)."""
    raw = os.environ.get("GRIDCARVE_THREADS", "0").strip() or "0"
    n = int(raw)
    if n < 0:
        raise ValueError("GRIDCARVE_THREADS must be >= 0")
    if HAVE_NUMBA and n > 0:
        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
    return n
