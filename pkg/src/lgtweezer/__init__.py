"""Bright optical tweezers from radial Laguerre-Gauss superpositions.

Simulation library and CLI covering paraxial LG mode superpositions,
SLM phase-mask encoding with scalar diffraction verification, high-NA
vector focusing (Debye-Wolf), trap metrics, and Monte Carlo atom
transport toward reflective surfaces.
"""

from .backend import active_backend
from .constants import CS_MASS, HBAR, K_B
from .paraxial import (
    LGSuperposition,
    ReflectorModel,
    gaussian,
    three_mode_sum,
)

__version__ = "1.0.0"

__all__ = [
    "LGSuperposition",
    "ReflectorModel",
    "gaussian",
    "three_mode_sum",
    "active_backend",
    "K_B",
    "HBAR",
    "CS_MASS",
    "__version__",
]
