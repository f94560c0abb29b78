"""Dispatch to the active kernel backend (see :mod:`lgtweezer.backend`)."""

from .backend import USE_NUMBA, active_backend

if USE_NUMBA:
    from ._kernels_numba import (  # noqa: F401
        debye_sum,
        fresnel_sum,
        verlet_1d,
        verlet_3d,
    )
else:
    from ._kernels_numpy import (  # noqa: F401
        debye_sum,
        fresnel_sum,
        verlet_1d,
        verlet_3d,
    )

__all__ = [
    "debye_sum",
    "fresnel_sum",
    "verlet_1d",
    "verlet_3d",
    "active_backend",
]
