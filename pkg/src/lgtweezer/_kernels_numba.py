"""Numba implementations of the inner-loop kernels.

Mirror of ``_kernels_numpy``; every function keeps a fixed, serial
accumulation order per output element so results do not depend on thread
count.  The transport kernels read the slow complex field envelope from
a uniformly sampled lookup table (the fast e^{-ikz} carrier is applied
analytically); outside the table the field is taken to be zero (free
flight).
"""

import numpy as np
from numba import njit

__all__ = ["debye_sum", "fresnel_sum", "verlet_1d", "verlet_3d"]


@njit(cache=True)
def debye_sum(b0, b1, b2, ct, j0t, j1t, j2t, kz):
    npts, nth = j0t.shape
    i0 = np.empty(npts, np.complex128)
    i1 = np.empty(npts, np.complex128)
    i2 = np.empty(npts, np.complex128)
    for p in range(npts):
        a0 = 0.0 + 0.0j
        a1 = 0.0 + 0.0j
        a2 = 0.0 + 0.0j
        for t in range(nth):
            ph = np.exp(1j * kz[p] * ct[t])
            a0 += b0[t] * j0t[p, t] * ph
            a1 += b1[t] * j1t[p, t] * ph
            a2 += b2[t] * j2t[p, t] * ph
        i0[p] = a0
        i1[p] = a1
        i2[p] = a2
    return i0, i1, i2


@njit(cache=True)
def fresnel_sum(amp, r2, x, y, chirp, gx, gy):
    npts = chirp.shape[0]
    npix = amp.shape[0]
    out = np.empty(npts, np.complex128)
    for p in range(npts):
        acc = 0.0 + 0.0j
        c = chirp[p]
        a = gx[p]
        b = gy[p]
        for q in range(npix):
            acc += amp[q] * np.exp(1j * (c * r2[q] + a * x[q] + b * y[q]))
        out[p] = acc
    return out


@njit(cache=True, inline="always")
def _cr(row, i, t):
    """Catmull-Rom cubic through row[i-1..i+2] at fraction t in [0, 1).

    Piecewise-linear tables give piecewise-constant forces whose jumps at
    the nodes pump energy into the integrated atoms; the C1 cubic keeps
    the force continuous at no extra table memory.
    """
    fm = row[i - 1]
    f0 = row[i]
    f1 = row[i + 1]
    f2 = row[i + 2]
    return f0 + t * (
        0.5 * (f1 - fm)
        + t * (fm - 2.5 * f0 + 2.0 * f1 - 0.5 * f2 + t * (1.5 * (f0 - f1) + 0.5 * (f2 - fm)))
    )


@njit(cache=True, inline="always")
def _tab(tab_re, tab_im, zeta, z_lo, inv_dz, n):
    """Cubic interpolation of the tabulated complex envelope; 0 outside."""
    s = (zeta - z_lo) * inv_dz
    if s < 1.0 or s >= n - 2:
        return 0.0 + 0.0j
    i = int(s)
    f = s - i
    return complex(_cr(tab_re, i, f), _cr(tab_im, i, f))


@njit(cache=True, inline="always")
def _u_axial(z, zf, tab_re, tab_im, z_lo, inv_dz, n, refl, u_scale, k2):
    """Standing-wave potential; the carrier enters only via e^{-i 2 k z}.

    With envelopes a1 = A(z - zf), a2 = A(-z - zf) the intensity is
    |a1|^2 + r^2 |a2|^2 + 2 r Re(a1 conj(a2) e^{-i k2 z}), the focus
    position cancelling from the cross-term phase.
    """
    a1 = _tab(tab_re, tab_im, z - zf, z_lo, inv_dz, n)
    a2 = _tab(tab_re, tab_im, -z - zf, z_lo, inv_dz, n)
    cr_re = a1.real * a2.real + a1.imag * a2.imag
    cr_im = a1.imag * a2.real - a1.real * a2.imag
    c = np.cos(k2 * z)
    s = np.sin(k2 * z)
    i = (
        a1.real * a1.real + a1.imag * a1.imag
        + refl * refl * (a2.real * a2.real + a2.imag * a2.imag)
        + 2.0 * refl * (cr_re * c + cr_im * s)
    )
    return -u_scale * i


@njit(cache=True)
def verlet_1d(
    z, v, lost, zf0, zf_steps, dt, tab_re, tab_im, z_lo, inv_dz, refl,
    mass, u_scale, h, g, k2,
):
    """Velocity-Verlet on the on-axis standing-wave potential.

    ``zf_steps[q]`` is the focus position after step q; forces come from
    central differences of the potential.  Atoms crossing z < 0 are frozen
    at the crossing state and flagged lost.  Arrays are updated in place.
    """
    n = tab_re.shape[0]
    nat = z.shape[0]
    nst = zf_steps.shape[0]
    inv2h = 1.0 / (2.0 * h)
    for i in range(nat):
        if lost[i]:
            continue
        zi = z[i]
        vi = v[i]
        f = -(
            _u_axial(zi + h, zf0, tab_re, tab_im, z_lo, inv_dz, n, refl, u_scale, k2)
            - _u_axial(zi - h, zf0, tab_re, tab_im, z_lo, inv_dz, n, refl, u_scale, k2)
        ) * inv2h
        for q in range(nst):
            zi += vi * dt + 0.5 * (f / mass - g) * dt * dt
            if zi < 0.0:
                lost[i] = True
                break
            zf = zf_steps[q]
            fn = -(
                _u_axial(zi + h, zf, tab_re, tab_im, z_lo, inv_dz, n, refl, u_scale, k2)
                - _u_axial(zi - h, zf, tab_re, tab_im, z_lo, inv_dz, n, refl, u_scale, k2)
            ) * inv2h
            vi += (0.5 * (f + fn) / mass - g) * dt
            f = fn
        z[i] = zi
        v[i] = vi


@njit(cache=True, inline="always")
def _field_3d(r2, zeta, tabs, plist, z_lo, inv_dz, n):
    """Slow field envelope at (r, zeta) from the per-mode table.

    tabs rows: [1/w^2, curvature coefficient, then (re, im) per mode];
    ``plist`` holds the radial order of each tabulated mode.  Laguerre
    polynomials are rebuilt on the fly by the three-term recurrence.
    """
    s = (zeta - z_lo) * inv_dz
    if s < 1.0 or s >= n - 2:
        return 0.0 + 0.0j
    i = int(s)
    f = s - i
    winv2 = _cr(tabs[0], i, f)
    ccoef = _cr(tabs[1], i, f)
    u = 2.0 * r2 * winv2
    env = np.exp(complex(-0.5 * u, -ccoef * r2))
    acc = 0.0 + 0.0j
    for m in range(plist.shape[0]):
        p = plist[m]
        if p == 0:
            lval = 1.0
        else:
            a = 1.0
            b = 1.0 - u
            for nn in range(1, p):
                a, b = b, ((2 * nn + 1 - u) * b - nn * a) / (nn + 1)
            lval = b
        acc += complex(_cr(tabs[2 + 2 * m], i, f), _cr(tabs[3 + 2 * m], i, f)) * lval
    return env * acc


@njit(cache=True, inline="always")
def _u_3d(x, y, z, zf, tabs, plist, z_lo, inv_dz, n, refl, u_scale, k2):
    r2 = x * x + y * y
    a1 = _field_3d(r2, z - zf, tabs, plist, z_lo, inv_dz, n)
    a2 = _field_3d(r2, -z - zf, tabs, plist, z_lo, inv_dz, n)
    cr_re = a1.real * a2.real + a1.imag * a2.imag
    cr_im = a1.imag * a2.real - a1.real * a2.imag
    c = np.cos(k2 * z)
    s = np.sin(k2 * z)
    i = (
        a1.real * a1.real + a1.imag * a1.imag
        + refl * refl * (a2.real * a2.real + a2.imag * a2.imag)
        + 2.0 * refl * (cr_re * c + cr_im * s)
    )
    return -u_scale * i


@njit(cache=True)
def verlet_3d(
    pos, vel, lost, zf0, zf_steps, dt, tabs, plist, z_lo, inv_dz, refl,
    mass, u_scale, ht, hz, g, k2,
):
    """3D velocity-Verlet; transverse/axial finite-difference steps ht/hz."""
    n = tabs.shape[1]
    nat = pos.shape[0]
    nst = zf_steps.shape[0]
    for i in range(nat):
        if lost[i]:
            continue
        x = pos[i, 0]
        y = pos[i, 1]
        z = pos[i, 2]
        vx = vel[i, 0]
        vy = vel[i, 1]
        vz = vel[i, 2]
        zf = zf0
        fx = -(
            _u_3d(x + ht, y, z, zf, tabs, plist, z_lo, inv_dz, n, refl, u_scale, k2)
            - _u_3d(x - ht, y, z, zf, tabs, plist, z_lo, inv_dz, n, refl, u_scale, k2)
        ) / (2.0 * ht)
        fy = -(
            _u_3d(x, y + ht, z, zf, tabs, plist, z_lo, inv_dz, n, refl, u_scale, k2)
            - _u_3d(x, y - ht, z, zf, tabs, plist, z_lo, inv_dz, n, refl, u_scale, k2)
        ) / (2.0 * ht)
        fz = -(
            _u_3d(x, y, z + hz, zf, tabs, plist, z_lo, inv_dz, n, refl, u_scale, k2)
            - _u_3d(x, y, z - hz, zf, tabs, plist, z_lo, inv_dz, n, refl, u_scale, k2)
        ) / (2.0 * hz)
        for q in range(nst):
            half = 0.5 * dt * dt / mass
            x += vx * dt + fx * half
            y += vy * dt + fy * half
            z += vz * dt + (fz - mass * g) * half
            if z < 0.0:
                lost[i] = True
                break
            zf = zf_steps[q]
            gx = -(
                _u_3d(x + ht, y, z, zf, tabs, plist, z_lo, inv_dz, n, refl, u_scale, k2)
                - _u_3d(x - ht, y, z, zf, tabs, plist, z_lo, inv_dz, n, refl, u_scale, k2)
            ) / (2.0 * ht)
            gy = -(
                _u_3d(x, y + ht, z, zf, tabs, plist, z_lo, inv_dz, n, refl, u_scale, k2)
                - _u_3d(x, y - ht, z, zf, tabs, plist, z_lo, inv_dz, n, refl, u_scale, k2)
            ) / (2.0 * ht)
            gz = -(
                _u_3d(x, y, z + hz, zf, tabs, plist, z_lo, inv_dz, n, refl, u_scale, k2)
                - _u_3d(x, y, z - hz, zf, tabs, plist, z_lo, inv_dz, n, refl, u_scale, k2)
            ) / (2.0 * hz)
            vx += 0.5 * (fx + gx) / mass * dt
            vy += 0.5 * (fy + gy) / mass * dt
            vz += (0.5 * (fz + gz) / mass - g) * dt
            fx, fy, fz = gx, gy, gz
        pos[i, 0] = x
        pos[i, 1] = y
        pos[i, 2] = z
        vel[i, 0] = vx
        vel[i, 1] = vy
        vel[i, 2] = vz
