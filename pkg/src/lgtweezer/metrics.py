"""Trap observables: widths, volumes, frequencies, and filling-factor laws.

All potentials follow the red-detuned convention U = -U0 I / I_peak, so
trap minima sit at intensity maxima and every U is <= 0.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .grids import ScalarGrid

__all__ = [
    "FwhmError",
    "SaddleError",
    "TrapPotential",
    "TrapReport",
    "fwhm_1d",
    "focal_volume",
    "harmonic_frequency_1d",
    "harmonic_frequencies",
    "paraxial_trap_freqs",
    "schrodinger_1d_levels",
    "gouy_gradient_paraxial",
    "max_phase_gradient",
    "optimal_filling",
    "sweep_filling_factor",
]


class FwhmError(ValueError):
    """Half-maximum level is not crossed inside the sampled domain."""


class SaddleError(ValueError):
    """Harmonic fit requested at a point with non-trapping curvature."""


def fwhm_1d(x, y) -> float:
    """Full width at half maximum by the nearest-crossing rule.

    The half level is taken from the global maximum; on each side the
    crossing *closest to the peak* is used, with linear interpolation
    between samples.  With multi-lobed profiles this pins the width to the
    central lobe, and makes the width jump discontinuously when a side
    lobe grows through the half level — a deliberate property of the
    definition, not an artifact.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or x.shape != y.shape or x.size < 3:
        raise ValueError("x and y must be congruent 1D arrays of length >= 3")
    i = int(np.argmax(y))
    if i == 0 or i == x.size - 1:
        raise FwhmError("global maximum must be interior to the domain")
    half = 0.5 * y[i]

    left = None
    for j in range(i, 0, -1):
        if y[j - 1] < half <= y[j]:
            left = x[j - 1] + (half - y[j - 1]) * (x[j] - x[j - 1]) / (y[j] - y[j - 1])
            break
    right = None
    for j in range(i, x.size - 1):
        if y[j + 1] < half <= y[j]:
            right = x[j] + (y[j] - half) * (x[j + 1] - x[j]) / (y[j] - y[j + 1])
            break
    if left is None or right is None:
        raise FwhmError("half-maximum level not reached inside the domain")
    return float(right - left)


def focal_volume(grid: ScalarGrid):
    """(FWHM 3-vector, volume) from axis-aligned cuts through the peak.

    The volume is the product of the three line-cut FWHMs, each computed
    with the nearest-crossing rule of :func:`fwhm_1d`.
    """
    vals = grid.values
    i, j, k = np.unravel_index(int(np.argmax(vals)), vals.shape)
    xs, ys, zs = grid.axes()
    dx = fwhm_1d(xs, vals[:, j, k])
    dy = fwhm_1d(ys, vals[i, :, k])
    dz = fwhm_1d(zs, vals[i, j, :])
    f = np.array([dx, dy, dz])
    return f, float(np.prod(f))


@dataclass(frozen=True)
class TrapPotential:
    """Potential grid [J] with its depth and the trapped atom's mass."""

    u: ScalarGrid
    depth: float
    mass: float

    def __post_init__(self):
        if self.depth <= 0 or self.mass <= 0:
            raise ValueError("depth and mass must be positive")
        if np.any(self.u.values > 1e-12 * self.depth):
            raise ValueError("red-detuned potential must satisfy U <= 0")
        # atol=0: the default absolute tolerance dwarfs Joule-scale depths
        if not np.isclose(self.u.values.min(), -self.depth, rtol=1e-6, atol=0.0):
            raise ValueError("min(U) must equal -depth")


@dataclass
class TrapReport:
    """Widths, volume, and (when trapping) harmonic frequencies."""

    fwhm: np.ndarray
    volume: float
    omega: np.ndarray
    center_class: str  # trapping | saddle | displaced-minimum


def harmonic_frequency_1d(q, u, mass: float, fit_halfwidth: float) -> float:
    """omega from a least-squares quadratic fit of U around its minimum."""
    q = np.asarray(q, dtype=float)
    u = np.asarray(u, dtype=float)
    i = int(np.argmin(u))
    m = np.abs(q - q[i]) <= fit_halfwidth
    if m.sum() < 3:
        raise ValueError("fit window contains fewer than 3 samples")
    c = np.polyfit(q[m] - q[i], u[m], 2)
    if c[0] <= 0:
        raise SaddleError("negative curvature at the fit point (saddle)")
    return float(np.sqrt(2.0 * c[0] / mass))


def harmonic_frequencies(potential: TrapPotential, fit_halfwidth) -> np.ndarray:
    """Per-axis omega from line cuts through the potential minimum."""
    fit_halfwidth = np.broadcast_to(np.asarray(fit_halfwidth, float), (3,))
    vals = potential.u.values
    i, j, k = np.unravel_index(int(np.argmin(vals)), vals.shape)
    xs, ys, zs = potential.u.axes()
    cuts = (
        (xs, vals[:, j, k]),
        (ys, vals[i, :, k]),
        (zs, vals[i, j, :]),
    )
    return np.array(
        [
            harmonic_frequency_1d(q, u, potential.mass, h)
            for (q, u), h in zip(cuts, fit_halfwidth)
        ]
    )


def paraxial_trap_freqs(u0: float, mass: float, w0: float, zr: float):
    """(omega_x, omega_z) of an ideal Gaussian-mode trap."""
    if min(u0, mass, w0, zr) <= 0:
        raise ValueError("all arguments must be positive")
    return (
        float(np.sqrt(4.0 * u0 / (mass * w0**2))),
        float(np.sqrt(2.0 * u0 / (mass * zr**2))),
    )


def schrodinger_1d_levels(q, u, mass: float, n_levels: int = 2):
    """Lowest eigenenergies of the 1D Hamiltonian on the sampled line.

    Three-point finite differences with Dirichlet boundaries; warns when an
    eigenstate leaks to the boundary (edge amplitude > 1e-4 of its max),
    which signals a non-confining potential or a too-short line.
    """
    from .constants import HBAR

    q = np.asarray(q, dtype=float)
    u = np.asarray(u, dtype=float)
    h = q[1] - q[0]
    if not np.allclose(np.diff(q), h, rtol=1e-9):
        raise ValueError("q must be uniformly spaced")
    t = HBAR**2 / (2.0 * mass * h * h)
    diag = 2.0 * t + u
    off = np.full(q.size - 1, -t)
    vals, vecs = eigh_tridiagonal(diag, off, select="i", select_range=(0, n_levels - 1))
    edge = np.abs(vecs[[0, -1], :]).max(axis=0)
    peak = np.abs(vecs).max(axis=0)
    if np.any(edge > 1e-4 * peak):
        warnings.warn(
            "eigenstate amplitude at the boundary exceeds 1e-4 of its peak; "
            "potential may not be confining on this line",
            RuntimeWarning,
            stacklevel=2,
        )
    return vals


def gouy_gradient_paraxial(p: int, f0: float, na: float, wavelength: float) -> float:
    """On-axis phase gradient of a weakly focused LG mode at its waist."""
    if p < 0 or f0 <= 0 or na <= 0 or wavelength <= 0:
        raise ValueError("arguments must be positive (p >= 0)")
    return (2 * p + 1) * np.pi / wavelength * f0**2 * na**2


def max_phase_gradient(na: float, wavelength: float) -> float:
    """Upper bound k (1 - sqrt(1 - NA^2)) on any on-axis phase gradient."""
    if not (0.0 < na < 1.0):
        raise ValueError("NA must lie in (0, 1)")
    k = 2.0 * np.pi / wavelength
    return k * (1.0 - np.sqrt(1.0 - na**2))


def optimal_filling(na: float, p: int) -> float:
    """Filling factor whose waist Gouy gradient saturates the NA bound."""
    if not (0.0 < na < 1.0):
        raise ValueError("NA must lie in (0, 1)")
    if p < 0 or p != int(p):
        raise ValueError("p must be a nonnegative integer")
    return (
        (1.0 / na)
        * np.sqrt(2.0 / (2 * p + 1))
        * np.sqrt(1.0 - np.sqrt(1.0 - na**2))
    )


def _line_cuts(spec, setup, x_extent, z_extent, nx, nz):
    """Intensity cuts |E|^2 along x, y, z through the focus (Debye model)."""
    from .debye import debye_field

    xs = np.linspace(-x_extent, x_extent, nx)
    zs = np.linspace(-z_extent, z_extent, nz)
    ex, ey, ez = debye_field(spec, setup, np.abs(xs), np.where(xs < 0, np.pi, 0.0), 0.0)
    ix = np.abs(ex) ** 2 + np.abs(ey) ** 2 + np.abs(ez) ** 2
    phiy = np.where(xs < 0, -np.pi / 2, np.pi / 2)
    ex, ey, ez = debye_field(spec, setup, np.abs(xs), phiy, 0.0)
    iy = np.abs(ex) ** 2 + np.abs(ey) ** 2 + np.abs(ez) ** 2
    ex, ey, ez = debye_field(spec, setup, 0.0, 0.0, zs)
    iz = np.abs(ex) ** 2 + np.abs(ey) ** 2 + np.abs(ez) ** 2
    return xs, ix, iy, zs, iz


def sweep_filling_factor(
    terms,
    na: float,
    focal_length: float,
    wavelength: float,
    f0_values,
    u0: float,
    mass: float,
    x_extent: float = 4e-6,
    z_extent: float = 14e-6,
    nx: int = 1601,
    nz: int = 2801,
):
    """Per-F0 trap characterization of a fixed mode superposition.

    Returns a list of dict rows (f0, center_class, dx, dy, dz, volume,
    omega_x, omega_y, omega_z, error).  Saddle and displaced-minimum rows
    carry NaN frequencies; per-row failures are recorded and the sweep
    continues.
    """
    from .debye import FocusingSetup
    from .paraxial import LGSuperposition

    rows = []
    for f0 in np.atleast_1d(np.asarray(f0_values, dtype=float)):
        row = {
            "f0": float(f0),
            "center_class": "",
            "dx": np.nan,
            "dy": np.nan,
            "dz": np.nan,
            "volume": np.nan,
            "omega_x": np.nan,
            "omega_y": np.nan,
            "omega_z": np.nan,
            "axial_curvature": np.nan,
            "error": "",
        }
        try:
            spec = LGSuperposition(terms, f0 * focal_length * na, wavelength)
            setup = FocusingSetup(na, focal_length, f0, wavelength)
            xs, ix, iy, zs, iz = _line_cuts(spec, setup, x_extent, z_extent, nx, nz)
            iz0 = iz / iz.max()
            mid = nz // 2
            h = zs[1] - zs[0]
            curv = (
                -iz0[mid - 2] + 16 * iz0[mid - 1] - 30 * iz0[mid]
                + 16 * iz0[mid + 1] - iz0[mid + 2]
            ) / (12.0 * h * h)
            row["axial_curvature"] = float(-u0 * curv)  # U'' sign carrier
            if curv >= 0:
                # axial intensity minimum at the origin: the nominal center
                # is anti-trapping along z while still confining transversely
                row["center_class"] = "saddle"
                rows.append(row)
                continue
            zpk = zs[int(np.argmax(iz0))]
            if abs(zpk) > 2 * h:
                # locally trapping at the origin but the global intensity
                # maximum (true trap site) sits elsewhere on the axis
                row["center_class"] = "displaced-minimum"
                rows.append(row)
                continue
            row["center_class"] = "trapping"
            dx = fwhm_1d(xs, ix)
            dy = fwhm_1d(xs, iy)
            dz = fwhm_1d(zs, iz)
            row.update(dx=dx, dy=dy, dz=dz, volume=dx * dy * dz)
            for key, (q, i_cut, w) in {
                "omega_x": (xs, ix, dx),
                "omega_y": (xs, iy, dy),
                "omega_z": (zs, iz, dz),
            }.items():
                ucut = -u0 * i_cut / i_cut.max()
                row[key] = harmonic_frequency_1d(q, ucut, mass, 0.1 * w)
        except (ValueError, FwhmError) as exc:
            row["error"] = str(exc)
        rows.append(row)
    return rows
