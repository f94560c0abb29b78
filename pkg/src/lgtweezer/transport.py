"""Monte Carlo atom transport in a moving tweezer near a reflective surface.

The potential is the paraxial standing-wave model: the incident
superposition focus is translated toward the surface at z = 0 by a
piecewise-kinematic motion profile, the surface adds a mirrored copy of
the field scaled by a real reflection coefficient, and the red-detuned
potential is U = -U0 |E|^2 / I_peak.  Atoms are classical, independent,
integrated by velocity-Verlet with central-difference forces; reaching
z < 0 absorbs the atom at the surface.

Hot loops read the slow complex field envelope from lookup tables
sampled at 2.5 nm and interpolated with a C1 cubic (the fast e^{-ikz}
carrier is applied analytically), which keeps force-interpolation noise
well below the trap depth.  The time step is re-derived for each
wall-clock segment from the stiffest curvature the potential will reach
during that segment, keeping >= ``steps_per_period`` steps on the fastest
local trap period while the near-surface fringes are still far away.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import kernels
from .constants import K_B
from .paraxial import LGSuperposition, ReflectorModel, superposition_field

__all__ = [
    "MotionProfile",
    "AtomEnsemble",
    "DeliveryHistogram",
    "FringeModel",
    "default_profile",
    "focus_position",
    "sample_ensemble",
    "integrate",
    "find_fringe_traps",
    "delivery_histogram",
]

_TABLE_DZ = 2.5e-9
_SCAN_DZ = 5e-9


@dataclass(frozen=True)
class MotionProfile:
    """Accelerate / constant velocity / decelerate-to-rest focus motion.

    The kinematics must close: the deceleration phase ends with zero
    velocity exactly at the surface (z = 0).  An all-zero profile is the
    static "focus parked at the surface" case.
    """

    z_start: float
    a_accel: float
    t_accel: float
    t_const: float
    a_decel: float
    t_decel: float

    def __post_init__(self):
        if min(self.t_accel, self.t_const, self.t_decel) < 0 or self.z_start < 0:
            raise ValueError("durations and start position must be nonnegative")
        v = self.a_accel * self.t_accel
        v_end = v + self.a_decel * self.t_decel
        dist = (
            0.5 * self.a_accel * self.t_accel**2
            + v * self.t_const
            + v * self.t_decel
            + 0.5 * self.a_decel * self.t_decel**2
        )
        scale = max(abs(v), 1e-9)
        if abs(v_end) > 1e-9 * scale + 1e-15:
            raise ValueError("profile must end at zero velocity")
        if abs(dist - self.z_start) > 1e-9 * max(self.z_start, 1e-12):
            raise ValueError("profile must end exactly at the surface (z = 0)")

    @property
    def duration(self) -> float:
        return self.t_accel + self.t_const + self.t_decel

    def scaled(self, factor: float) -> "MotionProfile":
        """Same trajectory stretched in time by ``factor`` (adiabaticity)."""
        return MotionProfile(
            self.z_start,
            self.a_accel / factor**2,
            self.t_accel * factor,
            self.t_const * factor,
            self.a_decel / factor**2,
            self.t_decel * factor,
        )


def default_profile() -> MotionProfile:
    """600 um approach: 1 m/s^2 for 20 ms, 10 ms constant, mirror-image stop."""
    return MotionProfile(600e-6, 1.0, 20e-3, 10e-3, -1.0, 20e-3)


def focus_position(profile: MotionProfile, t):
    """Focus z at time t (vectorized); holds at the surface after the end."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("time must be nonnegative")
    v = profile.a_accel * profile.t_accel
    t1 = profile.t_accel
    t2 = t1 + profile.t_const
    t3 = t2 + profile.t_decel
    z1 = profile.z_start - 0.5 * profile.a_accel * t1**2
    z2 = z1 - v * profile.t_const
    tau = np.clip(t, 0.0, t1)
    z = profile.z_start - 0.5 * profile.a_accel * tau**2
    z = np.where(t > t1, z1 - v * (np.clip(t, t1, t2) - t1), z)
    tau = np.clip(t, t2, t3) - t2
    z = np.where(t > t2, z2 - v * tau - 0.5 * profile.a_decel * tau**2, z)
    z = np.where(t >= t3, 0.0, z)
    return z if z.ndim else float(z)


@dataclass
class AtomEnsemble:
    """Positions/velocities of N independent atoms plus their provenance."""

    positions: np.ndarray
    velocities: np.ndarray
    mass: float
    temperature_init: float
    seed: int
    lost: np.ndarray = None

    def __post_init__(self):
        self.positions = np.ascontiguousarray(self.positions, dtype=float)
        self.velocities = np.ascontiguousarray(self.velocities, dtype=float)
        if self.positions.shape != self.velocities.shape or self.positions.ndim != 2:
            raise ValueError("positions and velocities must be congruent (N, 3)")
        if self.positions.shape[0] < 1 or self.positions.shape[1] != 3:
            raise ValueError("ensemble must hold at least one atom with 3 coords")
        if not (
            np.all(np.isfinite(self.positions))
            and np.all(np.isfinite(self.velocities))
        ):
            raise ValueError("ensemble entries must be finite")
        if self.lost is None:
            self.lost = np.zeros(self.positions.shape[0], dtype=bool)

    @property
    def n(self) -> int:
        return self.positions.shape[0]


class FringeModel:
    """Paraxial fringe potential with precomputed kernel tables."""

    def __init__(
        self,
        spec: LGSuperposition,
        reflector: ReflectorModel,
        depth: float,
        mass: float,
        z_table_max: float,
    ):
        if reflector.z_surface != 0.0:
            raise ValueError("transport assumes the surface at z = 0")
        if depth <= 0 or mass <= 0:
            raise ValueError("depth and mass must be positive")
        self.spec = spec
        self.reflector = reflector
        self.depth = depth
        self.mass = mass
        k = spec.k
        peak = abs(self._envelope(np.array([0.0]))[0]) ** 2
        self.u_scale = depth / peak

        # axial envelope table over zeta in [-2 z_max, z_max]; the fast
        # e^{-ikz} carrier is applied analytically inside the kernels, so
        # only the slow (Rayleigh-range scale) envelope is interpolated
        self.z_lo = -2.0 * z_table_max
        self.k2 = 2.0 * k
        zeta = np.arange(self.z_lo, z_table_max + _TABLE_DZ, _TABLE_DZ)
        tab = self._envelope(zeta)
        self.tab_re = np.ascontiguousarray(tab.real)
        self.tab_im = np.ascontiguousarray(tab.imag)
        self.inv_dz = 1.0 / _TABLE_DZ

        # per-mode table for the 3D kernel: [1/w^2, curvature coef, re/im...]
        zr = spec.rayleigh_range
        w0 = spec.w0
        wz2 = w0**2 * (1.0 + (zeta / zr) ** 2)
        psi = np.arctan2(zeta, zr)
        rows = [1.0 / wz2, k * zeta / (2.0 * (zeta**2 + zr**2))]
        plist = []
        for p, c in spec.terms:
            mode = (
                c
                * np.sqrt(2.0 / np.pi)
                * (w0 / np.sqrt(wz2))
                * np.exp(1j * (2 * p + 1) * psi)
            )
            rows.append(mode.real)
            rows.append(mode.imag)
            plist.append(p)
        self.tabs = np.ascontiguousarray(np.array(rows))
        self.plist = np.ascontiguousarray(np.array(plist, dtype=np.int64))

    def _envelope(self, z):
        from .paraxial import onaxis_envelope

        return onaxis_envelope(self.spec, z)

    def potential_axial(self, z, zf):
        """Exact (non-tabulated) on-axis potential; diagnostics and basins."""
        z = np.asarray(z, dtype=float)
        k = self.spec.k
        a1 = self._envelope(z - zf) * np.exp(-1j * k * (z - zf))
        a2 = self._envelope(-z - zf) * np.exp(-1j * k * (-z - zf))
        e = a1 + self.reflector.r * a2
        return -self.u_scale * np.abs(e) ** 2

    def potential(self, x, y, z, zf):
        """Exact 3D potential of incident plus mirrored field."""
        z = np.asarray(z, dtype=float)
        k = self.spec.k
        e1 = superposition_field(self.spec, x, y, z - zf) * np.exp(
            -1j * k * (z - zf)
        )
        e2 = superposition_field(self.spec, x, y, -z - zf) * np.exp(
            -1j * k * (-z - zf)
        )
        e = e1 + self.reflector.r * e2
        return -self.u_scale * np.abs(e) ** 2

    def trap_frequencies(self):
        """(omega_x, omega_z) of the free-space moving trap, numerically."""
        h = 20e-9
        q = np.array([-2.0, -1.0, 0.0, 1.0, 2.0]) * h
        stencil = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / (12.0 * h * h)
        spec_free = self.spec
        ix = np.abs(superposition_field(spec_free, q, 0.0, 0.0)) ** 2
        iz = np.abs(self._envelope(q)) ** 2
        peak = np.abs(self._envelope(np.array([0.0]))[0]) ** 2
        d2x = float(stencil @ (ix / peak))
        d2z = float(stencil @ (iz / peak))
        return (
            float(np.sqrt(self.depth * -d2x / self.mass)),
            float(np.sqrt(self.depth * -d2z / self.mass)),
        )


def sample_ensemble(
    n: int,
    temperature: float,
    model: FringeModel,
    profile: MotionProfile,
    seed: int,
) -> AtomEnsemble:
    """Boltzmann sample in the harmonic approximation of the initial trap.

    Each atom draws from its own counter-based stream (seed, index), so
    trajectory i is reproducible in isolation and independent of N.
    """
    if n < 1:
        raise ValueError("need at least one atom")
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    if K_B * temperature >= model.depth:
        raise ValueError(
            "temperature at or above the trap depth: harmonic Boltzmann "
            "sampling is invalid"
        )
    omega_x, omega_z = model.trap_frequencies()
    sigma_v = np.sqrt(K_B * temperature / model.mass)
    sigma = np.array(
        [
            sigma_v / omega_x,
            sigma_v / omega_x,
            sigma_v / omega_z,
        ]
    )
    center = np.array([0.0, 0.0, focus_position(profile, 0.0)])
    pos = np.empty((n, 3))
    vel = np.empty((n, 3))
    for i in range(n):
        rng = np.random.default_rng([seed, i])
        pos[i] = center + rng.normal(0.0, sigma)
        vel[i] = rng.normal(0.0, sigma_v, 3)
    return AtomEnsemble(pos, vel, model.mass, temperature, seed)


def _segment_dt(model: FringeModel, zf_end: float, steps_per_period: int, dt_max):
    """Time step from the stiffest curvature reachable within the segment."""
    lo = max(0.0, zf_end - 15e-6)
    hi = zf_end + 15e-6
    zs = np.arange(lo, hi, _SCAN_DZ)
    u = model.potential_axial(zs, zf_end)
    d2 = np.diff(u, 2) / _SCAN_DZ**2
    curv = float(d2.max())
    if curv <= 0.0:
        return dt_max
    omega = np.sqrt(curv / model.mass)
    return min(dt_max, 2.0 * np.pi / omega / steps_per_period)


def integrate(
    ensemble: AtomEnsemble,
    model: FringeModel,
    profile: MotionProfile,
    mode: str = "axial-1d",
    t_hold: float = 2e-3,
    steps_per_period: int = 50,
    segment: float = 1e-3,
    dt_max: float = 1e-6,
    gravity: float = 0.0,
    fd_step: float = 1e-9,
    record: list | None = None,
) -> AtomEnsemble:
    """Velocity-Verlet transport through the full motion profile plus hold.

    Mutates and returns the ensemble.  ``mode`` is "axial-1d" (potential
    evaluated on axis, transverse coordinates frozen) or "full-3d".  For a
    static profile the integrator self-checks energy conservation and
    warns when any surviving atom drifts by more than 1e-4 of the depth.
    When ``record`` is a list, a decimated trajectory snapshot
    (t, positions, velocities, lost) is appended after every wall-clock
    segment.
    """
    if mode not in ("axial-1d", "full-3d"):
        raise ValueError("mode must be 'axial-1d' or 'full-3d'")
    t_end = profile.duration + t_hold
    static = profile.duration == 0.0
    if static:
        e0 = _total_energy(ensemble, model, mode, gravity)

    # the axial curvature scan misses the transverse oscillation, which for
    # the superposition trap is the fastest motion until the fringes take
    # over; cap dt by the transverse period in 3D mode
    dt_cap = dt_max
    if mode == "full-3d":
        omega_x, _ = model.trap_frequencies()
        dt_cap = min(dt_max, 2.0 * np.pi / omega_x / steps_per_period)

    t = 0.0
    while t < t_end - 1e-15:
        seg = min(segment, t_end - t)
        zf_seg_end = float(focus_position(profile, min(t + seg, t_end)))
        dt = _segment_dt(model, zf_seg_end, steps_per_period, dt_cap)
        n_steps = max(1, int(np.ceil(seg / dt)))
        dt = seg / n_steps
        times = t + dt * np.arange(1, n_steps + 1)
        zf_steps = np.ascontiguousarray(np.asarray(focus_position(profile, times)))
        zf0 = float(focus_position(profile, t))
        if mode == "axial-1d":
            z = ensemble.positions[:, 2].copy()
            v = ensemble.velocities[:, 2].copy()
            kernels.verlet_1d(
                z, v, ensemble.lost, zf0, zf_steps, dt,
                model.tab_re, model.tab_im, model.z_lo, model.inv_dz,
                model.reflector.r, model.mass, model.u_scale, fd_step,
                gravity, model.k2,
            )
            ensemble.positions[:, 2] = z
            ensemble.velocities[:, 2] = v
        else:
            kernels.verlet_3d(
                ensemble.positions, ensemble.velocities, ensemble.lost,
                zf0, zf_steps, dt, model.tabs, model.plist, model.z_lo,
                model.inv_dz, model.reflector.r, model.mass, model.u_scale,
                fd_step, fd_step, gravity, model.k2,
            )
        t += seg
        if record is not None:
            record.append(
                (
                    t,
                    ensemble.positions.copy(),
                    ensemble.velocities.copy(),
                    ensemble.lost.copy(),
                )
            )

    if static:
        e1 = _total_energy(ensemble, model, mode, gravity)
        ok = ~ensemble.lost
        if ok.any():
            drift = float(np.abs(e1[ok] - e0[ok]).max() / model.depth)
            if drift > 1e-4:
                warnings.warn(
                    f"energy drift {drift:.2e} of trap depth over a static "
                    f"run; time step too coarse",
                    RuntimeWarning,
                    stacklevel=2,
                )
    return ensemble


def _total_energy(ensemble, model, mode, gravity):
    p = ensemble.positions
    v = ensemble.velocities
    if mode == "axial-1d":
        pot = model.potential_axial(p[:, 2], 0.0)
        kin = 0.5 * model.mass * v[:, 2] ** 2
    else:
        pot = model.potential(p[:, 0], p[:, 1], p[:, 2], 0.0)
        kin = 0.5 * model.mass * np.sum(v**2, axis=1)
    return kin + pot + model.mass * gravity * p[:, 2]


def find_fringe_traps(model: FringeModel, z_max: float, dz: float = 1e-9):
    """z of on-axis potential minima with the focus parked at the surface."""
    zs = np.arange(dz, z_max, dz)
    u = model.potential_axial(zs, 0.0)
    du = np.diff(u)
    mins = np.flatnonzero((du[:-1] < 0) & (du[1:] >= 0)) + 1
    return zs[mins]


@dataclass
class DeliveryHistogram:
    """Per-fringe-trap delivery probabilities; sum(P) + lost == 1."""

    trap_centers: np.ndarray
    probabilities: np.ndarray
    lost: float

    def __post_init__(self):
        total = float(np.sum(self.probabilities) + self.lost)
        if abs(total - 1.0) > 1e-12:
            raise ValueError("probabilities and lost fraction must sum to 1")


def delivery_histogram(
    ensemble: AtomEnsemble,
    model: FringeModel,
    mode: str = "axial-1d",
    z_max: float = 20e-6,
) -> DeliveryHistogram:
    """Energy-aware assignment of surviving atoms to fringe-trap basins.

    An atom belongs to the basin bracketing its final z between adjacent
    on-axis potential maxima, and only counts as delivered if its total
    energy sits below the lower of the two bracketing barriers; everything
    else (absorbed, escaped past z_max, or above-barrier) is lost.
    """
    dz = 1e-9
    zs = np.arange(dz, z_max, dz)
    u = model.potential_axial(zs, 0.0)
    du = np.diff(u)
    imin = np.flatnonzero((du[:-1] < 0) & (du[1:] >= 0)) + 1
    imax = np.flatnonzero((du[:-1] > 0) & (du[1:] <= 0)) + 1
    centers = zs[imin]
    counts = np.zeros(centers.size, dtype=np.int64)
    n_lost = int(np.count_nonzero(ensemble.lost))

    pos = ensemble.positions
    vel = ensemble.velocities
    for i in range(ensemble.n):
        if ensemble.lost[i]:
            continue
        z = pos[i, 2]
        if z >= zs[-1] or z <= 0.0:
            n_lost += 1
            continue
        if mode == "axial-1d":
            energy = 0.5 * model.mass * vel[i, 2] ** 2 + float(
                model.potential_axial(np.array([z]), 0.0)[0]
            )
        else:
            energy = 0.5 * model.mass * float(np.sum(vel[i] ** 2)) + float(
                model.potential(pos[i, 0], pos[i, 1], np.array([z]), 0.0)[0]
            )
        j = int(np.searchsorted(zs[imax], z))
        barrier_lo = u[imax][j - 1] if j > 0 else 0.0
        barrier_hi = u[imax][j] if j < imax.size else 0.0
        inside = (zs[imax][j - 1] if j > 0 else 0.0, zs[imax][j] if j < imax.size else zs[-1])
        cand = np.flatnonzero((centers >= inside[0]) & (centers <= inside[1]))
        if cand.size and energy < min(barrier_lo, barrier_hi):
            counts[cand[0]] += 1
        else:
            n_lost += 1

    probs = counts / ensemble.n
    return DeliveryHistogram(centers, probs, n_lost / ensemble.n)
