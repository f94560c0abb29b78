"""Cross-check the numba kernels against the pure-numpy fallback.

Comparisons run over short horizons: per-step arithmetic is identical,
but vectorized and scalar libm sin/cos can differ in the last ulp and the
fringe dynamics amplify such differences chaotically over thousands of
steps, so long trajectories are only compared statistically (see the
acceptance determinism criterion, which pins each backend to itself).
"""

import numpy as np
import pytest

from lgtweezer import _kernels_numpy
from lgtweezer.backend import HAVE_NUMBA, active_backend
from lgtweezer.constants import CS_MASS, K_B
from lgtweezer.paraxial import ReflectorModel, three_mode_sum
from lgtweezer.transport import FringeModel

numba_kernels = pytest.importorskip(
    "lgtweezer._kernels_numba"
) if HAVE_NUMBA else None

pytestmark = pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")


@pytest.fixture(scope="module")
def model():
    return FringeModel(
        three_mode_sum(1e-6, 1e-6), ReflectorModel(-0.8), K_B * 1e-3,
        CS_MASS, 10e-6,
    )


def test_backend_report():
    assert active_backend() in ("numba", "numpy")


def test_debye_sum_agreement():
    rng = np.random.default_rng(5)
    nth, npts = 128, 300
    b = [rng.normal(size=nth) + 1j * rng.normal(size=nth) for _ in range(3)]
    ct = np.cos(np.linspace(0.0, 0.7, nth))
    jt = [rng.normal(size=(npts, nth)) for _ in range(3)]
    kz = rng.normal(size=npts)
    args = tuple(np.ascontiguousarray(a) for a in (*b, ct, *jt, kz))
    ref = numba_kernels.debye_sum(*args)
    alt = _kernels_numpy.debye_sum(*args)
    for a, c in zip(ref, alt):
        np.testing.assert_allclose(a, c, rtol=1e-12, atol=1e-14)


def test_fresnel_sum_agreement():
    rng = np.random.default_rng(6)
    npix, npts = 2000, 50
    amp = rng.normal(size=npix) + 1j * rng.normal(size=npix)
    r2 = rng.uniform(0.0, 1e-6, npix)
    x = rng.uniform(-1e-3, 1e-3, npix)
    y = rng.uniform(-1e-3, 1e-3, npix)
    chirp = rng.uniform(0.0, 1e5, npts)
    gx = rng.uniform(-1e4, 1e4, npts)
    gy = rng.uniform(-1e4, 1e4, npts)
    ref = numba_kernels.fresnel_sum(amp, r2, x, y, chirp, gx, gy)
    alt = _kernels_numpy.fresnel_sum(amp, r2, x, y, chirp, gx, gy)
    np.testing.assert_allclose(ref, alt, rtol=1e-10, atol=1e-12)


def _verlet_args(model, n_steps):
    return (
        0.0, np.zeros(n_steps), 1e-8, model.tab_re, model.tab_im,
        model.z_lo, model.inv_dz, model.reflector.r, model.mass,
        model.u_scale, 1e-9, 0.0, model.k2,
    )


def test_verlet_1d_agreement_short_horizon(model):
    rng = np.random.default_rng(7)
    n = 64
    z0 = 2e-6 + rng.normal(0.0, 0.2e-6, n)
    v0 = rng.normal(0.0, 5e-3, n)
    out = []
    for kern in (numba_kernels, _kernels_numpy):
        z = z0.copy()
        v = v0.copy()
        lost = np.zeros(n, bool)
        kern.verlet_1d(z, v, lost, *_verlet_args(model, 200))
        out.append((z, v, lost))
    np.testing.assert_allclose(out[0][0], out[1][0], rtol=1e-8, atol=1e-12)
    np.testing.assert_allclose(out[0][1], out[1][1], rtol=1e-8, atol=1e-12)
    np.testing.assert_array_equal(out[0][2], out[1][2])


def test_verlet_3d_agreement_short_horizon(model):
    rng = np.random.default_rng(8)
    n = 64
    pos0 = np.column_stack(
        [
            rng.normal(0.0, 0.1e-6, n),
            rng.normal(0.0, 0.1e-6, n),
            2e-6 + rng.normal(0.0, 0.2e-6, n),
        ]
    )
    vel0 = rng.normal(0.0, 5e-3, (n, 3))
    out = []
    for kern in (numba_kernels, _kernels_numpy):
        pos = pos0.copy()
        vel = vel0.copy()
        lost = np.zeros(n, bool)
        kern.verlet_3d(
            pos, vel, lost, 0.0, np.zeros(200), 1e-8, model.tabs,
            model.plist, model.z_lo, model.inv_dz, model.reflector.r,
            model.mass, model.u_scale, 1e-9, 1e-9, 0.0, model.k2,
        )
        out.append((pos, vel, lost))
    np.testing.assert_allclose(out[0][0], out[1][0], rtol=1e-8, atol=1e-12)
    np.testing.assert_allclose(out[0][1], out[1][1], rtol=1e-8, atol=1e-12)
    np.testing.assert_array_equal(out[0][2], out[1][2])
