"""Pure-numpy implementations of the inner-loop kernels.

Same signatures and semantics as ``_kernels_numba``; the transport
integrators vectorize over atoms instead of compiling the per-atom loop,
so per-step arithmetic and the step schedule are identical between the
two backends.
"""

import numpy as np

__all__ = ["debye_sum", "fresnel_sum", "verlet_1d", "verlet_3d"]

_CHUNK = 2048  # output points per phase-matrix block (memory cap)


def debye_sum(b0, b1, b2, ct, j0t, j1t, j2t, kz):
    npts = j0t.shape[0]
    i0 = np.empty(npts, np.complex128)
    i1 = np.empty(npts, np.complex128)
    i2 = np.empty(npts, np.complex128)
    for lo in range(0, npts, _CHUNK):
        hi = min(lo + _CHUNK, npts)
        ph = np.exp(1j * kz[lo:hi, None] * ct[None, :])
        i0[lo:hi] = (j0t[lo:hi] * ph) @ b0
        i1[lo:hi] = (j1t[lo:hi] * ph) @ b1
        i2[lo:hi] = (j2t[lo:hi] * ph) @ b2
    return i0, i1, i2


def fresnel_sum(amp, r2, x, y, chirp, gx, gy):
    npts = chirp.shape[0]
    out = np.empty(npts, np.complex128)
    for p in range(npts):
        out[p] = np.sum(
            amp * np.exp(1j * (chirp[p] * r2 + gx[p] * x + gy[p] * y))
        )
    return out


def _cr_vec(row, i, t):
    """Catmull-Rom cubic through row[i-1..i+2] at fractions t in [0, 1).

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


def _tab_vec(tab_re, tab_im, zeta, z_lo, inv_dz, n):
    """Vectorized cubic interpolation of the complex envelope; 0 outside."""
    s = (zeta - z_lo) * inv_dz
    inside = (s >= 1.0) & (s < n - 2)
    s = np.where(inside, s, 1.0)
    i = s.astype(np.int64)
    f = s - i
    return np.where(
        inside, _cr_vec(tab_re, i, f) + 1j * _cr_vec(tab_im, i, f), 0.0 + 0.0j
    )


def _u_axial_vec(z, zf, tab_re, tab_im, z_lo, inv_dz, n, refl, u_scale, k2):
    a1 = _tab_vec(tab_re, tab_im, z - zf, z_lo, inv_dz, n)
    a2 = _tab_vec(tab_re, tab_im, -z - zf, z_lo, inv_dz, n)
    cr = a1 * np.conj(a2)
    i = (
        a1.real**2 + a1.imag**2
        + refl * refl * (a2.real**2 + a2.imag**2)
        + 2.0 * refl * (cr.real * np.cos(k2 * z) + cr.imag * np.sin(k2 * z))
    )
    return -u_scale * i


def verlet_1d(
    z, v, lost, zf0, zf_steps, dt, tab_re, tab_im, z_lo, inv_dz, refl,
    mass, u_scale, h, g, k2,
):
    n = tab_re.shape[0]
    act = ~lost
    zi = z[act].copy()
    vi = v[act].copy()
    alive = np.ones(zi.shape[0], bool)
    inv2h = 1.0 / (2.0 * h)

    def force(zz, zf):
        return -(
            _u_axial_vec(zz + h, zf, tab_re, tab_im, z_lo, inv_dz, n, refl, u_scale, k2)
            - _u_axial_vec(zz - h, zf, tab_re, tab_im, z_lo, inv_dz, n, refl, u_scale, k2)
        ) * inv2h

    f = force(zi, zf0)
    for q in range(zf_steps.shape[0]):
        step = alive
        zi[step] = zi[step] + vi[step] * dt + 0.5 * (f[step] / mass - g) * dt * dt
        hit = step & (zi < 0.0)
        alive = alive & ~hit
        fn = force(zi, zf_steps[q])
        upd = alive
        vi[upd] = vi[upd] + (0.5 * (f[upd] + fn[upd]) / mass - g) * dt
        f = fn
        if not alive.any():
            break
    idx = np.flatnonzero(act)
    z[idx] = zi
    v[idx] = vi
    lost[idx[~alive]] = True


def _field_3d_vec(r2, zeta, tabs, plist, z_lo, inv_dz, n):
    s = (zeta - z_lo) * inv_dz
    inside = (s >= 1.0) & (s < n - 2)
    s = np.where(inside, s, 1.0)
    i = s.astype(np.int64)
    f = s - i
    winv2 = _cr_vec(tabs[0], i, f)
    ccoef = _cr_vec(tabs[1], i, f)
    u = 2.0 * r2 * winv2
    env = np.exp(-0.5 * u - 1j * (ccoef * r2))
    acc = np.zeros_like(env)
    for m, p in enumerate(plist):
        if p == 0:
            lval = np.ones_like(u)
        else:
            a = np.ones_like(u)
            b = 1.0 - u
            for nn in range(1, int(p)):
                a, b = b, ((2 * nn + 1 - u) * b - nn * a) / (nn + 1)
            lval = b
        g = _cr_vec(tabs[2 + 2 * m], i, f) + 1j * _cr_vec(tabs[3 + 2 * m], i, f)
        acc = acc + g * lval
    return np.where(inside, env * acc, 0.0 + 0.0j)


def _u_3d_vec(x, y, z, zf, tabs, plist, z_lo, inv_dz, n, refl, u_scale, k2):
    r2 = x * x + y * y
    a1 = _field_3d_vec(r2, z - zf, tabs, plist, z_lo, inv_dz, n)
    a2 = _field_3d_vec(r2, -z - zf, tabs, plist, z_lo, inv_dz, n)
    cr = a1 * np.conj(a2)
    i = (
        a1.real**2 + a1.imag**2
        + refl * refl * (a2.real**2 + a2.imag**2)
        + 2.0 * refl * (cr.real * np.cos(k2 * z) + cr.imag * np.sin(k2 * z))
    )
    return -u_scale * i


def verlet_3d(
    pos, vel, lost, zf0, zf_steps, dt, tabs, plist, z_lo, inv_dz, refl,
    mass, u_scale, ht, hz, g, k2,
):
    n = tabs.shape[1]
    act = ~lost
    x = pos[act, 0].copy()
    y = pos[act, 1].copy()
    z = pos[act, 2].copy()
    vx = vel[act, 0].copy()
    vy = vel[act, 1].copy()
    vz = vel[act, 2].copy()
    alive = np.ones(x.shape[0], bool)

    def forces(x, y, z, zf):
        args = (tabs, plist, z_lo, inv_dz, n, refl, u_scale, k2)
        fx = -(
            _u_3d_vec(x + ht, y, z, zf, *args) - _u_3d_vec(x - ht, y, z, zf, *args)
        ) / (2.0 * ht)
        fy = -(
            _u_3d_vec(x, y + ht, z, zf, *args) - _u_3d_vec(x, y - ht, z, zf, *args)
        ) / (2.0 * ht)
        fz = -(
            _u_3d_vec(x, y, z + hz, zf, *args) - _u_3d_vec(x, y, z - hz, zf, *args)
        ) / (2.0 * hz)
        return fx, fy, fz

    fx, fy, fz = forces(x, y, z, zf0)
    half = 0.5 * dt * dt / mass
    for q in range(zf_steps.shape[0]):
        s = alive
        x[s] = x[s] + vx[s] * dt + fx[s] * half
        y[s] = y[s] + vy[s] * dt + fy[s] * half
        z[s] = z[s] + vz[s] * dt + (fz[s] - mass * g) * half
        hit = s & (z < 0.0)
        alive = alive & ~hit
        gx, gy, gz = forces(x, y, z, zf_steps[q])
        u = alive
        vx[u] = vx[u] + 0.5 * (fx[u] + gx[u]) / mass * dt
        vy[u] = vy[u] + 0.5 * (fy[u] + gy[u]) / mass * dt
        vz[u] = vz[u] + (0.5 * (fz[u] + gz[u]) / mass - g) * dt
        fx, fy, fz = gx, gy, gz
        if not alive.any():
            break
    idx = np.flatnonzero(act)
    pos[idx, 0] = x
    pos[idx, 1] = y
    pos[idx, 2] = z
    vel[idx, 0] = vx
    vel[idx, 1] = vy
    vel[idx, 2] = vz
    lost[idx[~alive]] = True
