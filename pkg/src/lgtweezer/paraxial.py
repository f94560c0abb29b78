"""Paraxial radial Laguerre-Gauss modes and their coherent superpositions.

Fields are cylindrically symmetric (azimuthal index 0 throughout) and
linearly polarized; the plane-wave carrier exp(-i k z) for propagation
toward -z is *not* included in the mode amplitudes returned here.  It is
applied explicitly where interference against a reflected copy of the
beam makes it physically relevant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grids import ScalarGrid

__all__ = [
    "LGSuperposition",
    "ReflectorModel",
    "assoc_laguerre",
    "lg_amplitude",
    "gouy_phase",
    "superposition_field",
    "onaxis_envelope",
    "superposition_gouy",
    "rms_radius",
    "paraxial_reflected_intensity",
]


def assoc_laguerre(p, x):
    """Laguerre polynomial L_p(x) by the stable three-term recurrence.

    Accepts scalars or arrays in ``x``; total function, no error paths.
    """
    if p < 0 or p != int(p):
        raise ValueError("radial index p must be a nonnegative integer")
    p = int(p)
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if p == 0:
        return prev if prev.ndim else float(prev)
    cur = 1.0 - x
    for n in range(1, p):
        prev, cur = cur, ((2 * n + 1 - x) * cur - n * prev) / (n + 1)
    return cur if cur.ndim else float(cur)


@dataclass(frozen=True)
class LGSuperposition:
    """A coherent sum of radial LG modes sharing one waist and wavelength.

    terms        list of (p, complex coefficient)
    w0           shared waist [m]
    wavelength   [m]
    polarization transverse unit 2-vector (x-polarized by default)
    """

    terms: tuple
    w0: float
    wavelength: float
    polarization: tuple = (1.0, 0.0)

    def __post_init__(self):
        terms = tuple((int(p), complex(c)) for p, c in self.terms)
        object.__setattr__(self, "terms", terms)
        if not terms:
            raise ValueError("superposition needs at least one term")
        if any(p < 0 for p, _ in terms):
            raise ValueError("all radial indices must be >= 0")
        if all(c == 0 for _, c in terms):
            raise ValueError("at least one coefficient must be nonzero")
        if not (self.w0 > 0 and self.wavelength > 0):
            raise ValueError("waist and wavelength must be positive")
        pol = np.asarray(self.polarization, dtype=float)
        if pol.shape != (2,) or not np.isclose(np.hypot(*pol), 1.0):
            raise ValueError("polarization must be a unit 2-vector")

    @property
    def rayleigh_range(self) -> float:
        return np.pi * self.w0**2 / self.wavelength

    @property
    def k(self) -> float:
        return 2.0 * np.pi / self.wavelength


def three_mode_sum(w0: float, wavelength: float) -> LGSuperposition:
    """The p = 0,2,4 equal-weight superposition used throughout."""
    return LGSuperposition(((0, 1.0), (2, 1.0), (4, 1.0)), w0, wavelength)


def gaussian(w0: float, wavelength: float) -> LGSuperposition:
    """The fundamental p = 0 mode."""
    return LGSuperposition(((0, 1.0),), w0, wavelength)


@dataclass(frozen=True)
class ReflectorModel:
    """Semi-infinite planar reflector: scalar amplitude coefficient only."""

    r: float
    z_surface: float = 0.0

    def __post_init__(self):
        if abs(self.r) > 1.0:
            raise ValueError("|r| must be <= 1")


def lg_amplitude(p: int, r, z, w0: float, wavelength: float):
    """Complex scalar amplitude u_p(r, z) of a radial LG mode.

    The radius-of-curvature phase is written as
    exp(-i k r^2 z / (2 (z^2 + zR^2))), which is the analytic continuation
    of exp(-i k r^2 / 2R(z)) through the flat-wavefront point z = 0.
    """
    if not (w0 > 0 and wavelength > 0):
        raise ValueError("waist and wavelength must be positive")
    r = np.asarray(r, dtype=float)
    z = np.asarray(z, dtype=float)
    zr = np.pi * w0**2 / wavelength
    k = 2.0 * np.pi / wavelength
    wz2 = w0**2 * (1.0 + (z / zr) ** 2)
    amp = np.sqrt(2.0 / np.pi) * (w0 / np.sqrt(wz2)) * np.exp(-(r**2) / wz2)
    curv = np.exp(-1j * k * r**2 * z / (2.0 * (z**2 + zr**2)))
    gouy = np.exp(1j * (2 * p + 1) * np.arctan2(z, zr))
    out = amp * assoc_laguerre(p, 2.0 * r**2 / wz2) * curv * gouy
    return out if out.ndim else complex(out)


def gouy_phase(p: int, z, zr: float):
    """(2p+1) arctan(z / zR); odd in z, bounded by +-(2p+1) pi/2."""
    if zr <= 0:
        raise ValueError("Rayleigh range must be positive")
    return (2 * p + 1) * np.arctan2(np.asarray(z, dtype=float), zr)


def superposition_field(spec: LGSuperposition, x, y, z):
    """Carrier-free field sum_k c_k u_{p_k}(r, z) with r = hypot(x, y)."""
    r = np.hypot(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    z = np.asarray(z, dtype=float)
    out = 0j
    for p, c in spec.terms:
        out = out + c * lg_amplitude(p, r, z, spec.w0, spec.wavelength)
    return out


def onaxis_envelope(spec: LGSuperposition, z):
    """On-axis complex envelope (r = 0); cheap form used by transport."""
    z = np.asarray(z, dtype=float)
    zr = spec.rayleigh_range
    winv = 1.0 / np.sqrt(1.0 + (z / zr) ** 2)
    psi = np.arctan2(z, zr)
    out = 0j
    for p, c in spec.terms:
        out = out + c * np.exp(1j * (2 * p + 1) * psi)
    return np.sqrt(2.0 / np.pi) * winv * out


class DegeneratePhaseError(ValueError):
    """Phase requested where the on-axis field magnitude vanishes."""


def superposition_gouy(spec: LGSuperposition, z, tol: float = 1e-12):
    """Unwrapped on-axis phase of the superposition relative to the carrier.

    ``z`` must be a sampled line dense enough that the phase advances by
    less than pi between neighbours (checked).  The returned profile is
    offset to zero at the sample nearest z = 0.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    env = onaxis_envelope(spec, z)
    scale = np.abs(env).max()
    if np.any(np.abs(env) < tol * max(scale, 1.0)):
        raise DegeneratePhaseError("on-axis field vanishes inside the window")
    phase = np.unwrap(np.angle(env))
    if np.any(np.abs(np.diff(phase)) >= np.pi):
        raise ValueError("z sampling too coarse to unwrap the phase")
    i0 = int(np.argmin(np.abs(z)))
    # anchor so that psi(0) = 0 even when z=0 is not a sample point
    anchor = phase[i0] if z[i0] == 0.0 else np.angle(onaxis_envelope(spec, 0.0))
    return phase - anchor


def rms_radius(p: int, w_i: float) -> float:
    """Root-mean-square intensity radius w_i sqrt(2p+1)."""
    if w_i <= 0:
        raise ValueError("waist must be positive")
    return w_i * np.sqrt(2 * p + 1)


def reflected_onaxis_intensity(
    spec: LGSuperposition, reflector: ReflectorModel, z, z_focus: float = 0.0
):
    """|E_inc + r E_mirror|^2 on the z axis, free-space peak normalized.

    Carrier exp(-ik z) included; the mirror field is the incident field
    mirrored about the reflector plane with the scalar r carrying all of
    the boundary physics.
    """
    z = np.asarray(z, dtype=float)
    if np.any(z < reflector.z_surface):
        raise ValueError("evaluation points must stay on the vacuum side")
    k = spec.k
    zs = reflector.z_surface
    a_inc = onaxis_envelope(spec, z - z_focus) * np.exp(-1j * k * (z - z_focus))
    zm = 2.0 * zs - z
    a_mir = onaxis_envelope(spec, zm - z_focus) * np.exp(-1j * k * (zm - z_focus))
    peak = np.abs(onaxis_envelope(spec, 0.0)) ** 2
    return np.abs(a_inc + reflector.r * a_mir) ** 2 / peak


def paraxial_reflected_intensity(
    spec: LGSuperposition,
    reflector: ReflectorModel,
    z_focus: float,
    origin,
    spacing,
    shape,
) -> ScalarGrid:
    """Standing-wave intensity grid near a planar reflector.

    The grid (origin/spacing/shape, z fastest axis last) must lie entirely
    on the vacuum side z >= z_surface, and must resolve the lambda/2
    fringes: spacing[2] <= lambda/8.
    """
    origin = np.asarray(origin, dtype=float)
    spacing = np.asarray(spacing, dtype=float)
    shape = tuple(int(n) for n in shape)
    if np.any(spacing <= 0):
        raise ValueError("grid spacing must be positive")
    z0 = origin[2]
    z1 = origin[2] + (shape[2] - 1) * spacing[2]
    if min(z0, z1) < reflector.z_surface:
        raise ValueError("grid crosses the reflector surface")
    if reflector.r != 0.0 and spacing[2] > spec.wavelength / 8.0:
        raise ValueError("axial spacing must be <= lambda/8 to resolve fringes")

    xs = origin[0] + spacing[0] * np.arange(shape[0])
    ys = origin[1] + spacing[1] * np.arange(shape[1])
    zs = origin[2] + spacing[2] * np.arange(shape[2])
    x, y, z = np.meshgrid(xs, ys, zs, indexing="ij")
    k = spec.k
    e_inc = superposition_field(spec, x, y, z - z_focus) * np.exp(
        -1j * k * (z - z_focus)
    )
    zm = 2.0 * reflector.z_surface - z
    e_mir = superposition_field(spec, x, y, zm - z_focus) * np.exp(
        -1j * k * (zm - z_focus)
    )
    peak = np.abs(superposition_field(spec, 0.0, 0.0, 0.0)) ** 2
    vals = np.abs(e_inc + reflector.r * e_mir) ** 2 / peak
    return ScalarGrid(values=vals, origin=origin, spacing=spacing)
