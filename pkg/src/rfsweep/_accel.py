"""JIT switch for the hot kernels.

Set ``RFSWEEP_NUMBA=0`` to run every kernel through its pure-numpy path.
The flag is read once at import time.
"""

import os

_FLAG = os.environ.get("RFSWEEP_NUMBA", "1").strip().lower()

try:
    from numba import njit as _numba_njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover
    _numba_njit = None
    NUMBA_AVAILABLE = False

USE_NUMBA = NUMBA_AVAILABLE and _FLAG not in ("0", "false", "no", "off")


def njit(*args, **kwargs):
    """``numba.njit`` with ``cache=True`` by default; identity when numba is absent."""
    if not NUMBA_AVAILABLE:
        if args and callable(args[0]):
            return args[0]
        return lambda f: f
    kwargs.setdefault("cache", True)
    return _numba_njit(*args, **kwargs)
