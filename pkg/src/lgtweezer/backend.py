"""Backend selection for the hot numeric kernels.

The package ships two implementations of each inner-loop kernel: a numba
``@njit`` version and a pure-numpy one.  The active backend is chosen once
at import time from the ``LGTWEEZER_BACKEND`` environment variable:

    LGTWEEZER_BACKEND=numba   force numba (error if not importable)
    LGTWEEZER_BACKEND=numpy   force the pure-numpy fallback
    unset / "auto"            numba when available, numpy otherwise

Both backends produce the same numbers to floating-point round-off; the
benchmark script (``python -m lgtweezer.benchmark``) times one against the
other.
"""

import os

_choice = os.environ.get("LGTWEEZER_BACKEND", "auto").strip().lower()
if _choice not in ("auto", "numba", "numpy"):
    raise RuntimeError(
        f"LGTWEEZER_BACKEND={_choice!r} not understood (use 'numba', 'numpy' or 'auto')"
    )

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

if _choice == "numba" and not HAVE_NUMBA:
    raise RuntimeError("LGTWEEZER_BACKEND=numba but numba is not importable")

USE_NUMBA = HAVE_NUMBA and _choice != "numpy"


def active_backend() -> str:
    return "numba" if USE_NUMBA else "numpy"


def set_num_threads(n: int) -> None:
    """Cap worker threads.  Harmless no-op on the numpy backend."""
    if n < 1:
        raise ValueError("thread count must be >= 1")
    if HAVE_NUMBA:
        import numba

        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
