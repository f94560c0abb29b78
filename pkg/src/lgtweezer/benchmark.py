"""Benchmark the numba kernels against the pure-numpy fallback.

Run as ``python -m lgtweezer.benchmark``.  Each workload is executed with
both backend implementations (imported directly, independent of the
LGTWEEZER_BACKEND selection), results are cross-checked for agreement,
and wall times are reported side by side.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from . import _kernels_numpy
from .backend import HAVE_NUMBA


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _debye_workload(kern, npts=2000, nth=256):
    rng = np.random.default_rng(1)
    b0, b1, b2 = (
        rng.normal(size=nth) + 1j * rng.normal(size=nth) for _ in range(3)
    )
    ct = np.cos(np.linspace(0.0, 0.7, nth))
    j0t = rng.normal(size=(npts, nth))
    j1t = rng.normal(size=(npts, nth))
    j2t = rng.normal(size=(npts, nth))
    kz = rng.normal(size=npts)
    args = (
        np.ascontiguousarray(b0), np.ascontiguousarray(b1),
        np.ascontiguousarray(b2), ct, j0t, j1t, j2t, kz,
    )
    return lambda: kern.debye_sum(*args)


def _fresnel_workload(kern, npix=20000, npts=200):
    rng = np.random.default_rng(2)
    amp = rng.normal(size=npix) + 1j * rng.normal(size=npix)
    r2 = rng.uniform(0.0, 1e-6, npix)
    x = rng.uniform(-1e-3, 1e-3, npix)
    y = rng.uniform(-1e-3, 1e-3, npix)
    chirp = rng.uniform(0.0, 1e5, npts)
    gx = rng.uniform(-1e4, 1e4, npts)
    gy = rng.uniform(-1e4, 1e4, npts)
    return lambda: kern.fresnel_sum(amp, r2, x, y, chirp, gx, gy)


def _transport_models(n_atoms=256, n_steps=4000, n_check=200):
    from .constants import CS_MASS, K_B
    from .paraxial import ReflectorModel, three_mode_sum
    from .transport import FringeModel

    model = FringeModel(
        three_mode_sum(1e-6, 1e-6), ReflectorModel(-0.8), K_B * 1e-3,
        CS_MASS, 10e-6,
    )
    rng = np.random.default_rng(3)
    z = 2e-6 + rng.normal(0.0, 0.2e-6, n_atoms)
    v = rng.normal(0.0, 5e-3, n_atoms)
    pos = np.column_stack(
        [rng.normal(0.0, 0.1e-6, n_atoms), rng.normal(0.0, 0.1e-6, n_atoms), z]
    )
    vel = rng.normal(0.0, 5e-3, (n_atoms, 3))
    return model, z, v, pos, vel, np.zeros(n_steps), np.zeros(n_check)


def _verlet1d_workload(kern, model, z0, v0, zf):
    def run():
        z = z0.copy()
        v = v0.copy()
        lost = np.zeros(z.shape[0], bool)
        kern.verlet_1d(
            z, v, lost, 0.0, zf, 1e-8, model.tab_re, model.tab_im,
            model.z_lo, model.inv_dz, model.reflector.r, model.mass,
            model.u_scale, 1e-9, 0.0, model.k2,
        )
        return z, v, lost

    return run


def _verlet3d_workload(kern, model, pos0, vel0, zf):
    def run():
        pos = pos0.copy()
        vel = vel0.copy()
        lost = np.zeros(pos.shape[0], bool)
        kern.verlet_3d(
            pos, vel, lost, 0.0, zf, 1e-8, model.tabs, model.plist,
            model.z_lo, model.inv_dz, model.reflector.r, model.mass,
            model.u_scale, 1e-9, 1e-9, 0.0, model.k2,
        )
        return pos, vel, lost

    return run


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="python -m lgtweezer.benchmark",
        description="Time the numba kernels against the numpy fallback.",
    )
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args(argv)

    if not HAVE_NUMBA:
        print("numba is not installed; only the numpy backend is available")
        return 1
    from . import _kernels_numba

    model, z, v, pos, vel, zf, zfc = _transport_models()
    # the integrator cross-checks run over a short horizon: per-element
    # arithmetic is identical between backends, but vectorized and scalar
    # libm sin/cos may differ in the last ulp and the fringe dynamics
    # amplify that chaotically over thousands of steps
    cases = [
        (
            "debye_sum (2000 pts x 256 nodes)",
            _debye_workload(_kernels_numba),
            _debye_workload(_kernels_numpy),
            None,
        ),
        (
            "fresnel_sum (20000 px x 200 pts)",
            _fresnel_workload(_kernels_numba),
            _fresnel_workload(_kernels_numpy),
            None,
        ),
        (
            "verlet_1d (256 atoms x 4000 steps)",
            _verlet1d_workload(_kernels_numba, model, z, v, zf),
            _verlet1d_workload(_kernels_numpy, model, z, v, zf),
            (
                _verlet1d_workload(_kernels_numba, model, z, v, zfc),
                _verlet1d_workload(_kernels_numpy, model, z, v, zfc),
            ),
        ),
        (
            "verlet_3d (256 atoms x 4000 steps)",
            _verlet3d_workload(_kernels_numba, model, pos, vel, zf),
            _verlet3d_workload(_kernels_numpy, model, pos, vel, zf),
            (
                _verlet3d_workload(_kernels_numba, model, pos, vel, zfc),
                _verlet3d_workload(_kernels_numpy, model, pos, vel, zfc),
            ),
        ),
    ]

    print(f"{'workload':38s} {'numba':>10s} {'numpy':>10s} {'speedup':>9s}")
    for name, fn_nb, fn_np, check in cases:
        chk_nb, chk_np = check if check is not None else (fn_nb, fn_np)
        ref_nb = chk_nb()  # first call compiles
        ref_np = chk_np()
        if not isinstance(ref_nb, tuple):
            ref_nb, ref_np = (ref_nb,), (ref_np,)
        for a, b in zip(ref_nb, ref_np):
            a = np.asarray(a)
            b = np.asarray(b)
            if a.dtype == bool:
                a = a.astype(float)
                b = b.astype(float)
            np.testing.assert_allclose(
                a, b, rtol=1e-8, atol=1e-12,
                err_msg=f"backend mismatch in {name}",
            )
        t_nb = _time(fn_nb, args.repeats)
        t_np = _time(fn_np, args.repeats)
        print(
            f"{name:38s} {t_nb * 1e3:8.1f}ms {t_np * 1e3:8.1f}ms "
            f"{t_np / t_nb:8.1f}x"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
