import numpy as np
import pytest

from lgtweezer.constants import CS_MASS, K_B
from lgtweezer.paraxial import ReflectorModel, gaussian, three_mode_sum
from lgtweezer.transport import (
    AtomEnsemble,
    DeliveryHistogram,
    FringeModel,
    MotionProfile,
    default_profile,
    delivery_histogram,
    find_fringe_traps,
    focus_position,
    integrate,
    sample_ensemble,
)

W0 = 1e-6
LAM = 1e-6
DEPTH = K_B * 1e-3


def _model(r=-0.8, spec=None, z_max=10e-6):
    spec = spec if spec is not None else three_mode_sum(W0, LAM)
    return FringeModel(spec, ReflectorModel(r), DEPTH, CS_MASS, z_max)


def _static_profile():
    return MotionProfile(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)


def test_profile_kinematics():
    prof = default_profile()
    assert prof.duration == pytest.approx(50e-3)
    assert focus_position(prof, 0.0) == pytest.approx(600e-6)
    # end of acceleration: 600 um - 0.5 * 1 * (20 ms)^2 = 400 um
    assert focus_position(prof, 20e-3) == pytest.approx(400e-6)
    # end of constant phase: 400 - 0.02 * 0.01 = 200 um
    assert focus_position(prof, 30e-3) == pytest.approx(200e-6)
    assert focus_position(prof, prof.duration) == 0.0
    assert focus_position(prof, 1.0) == 0.0
    # monotone descent
    ts = np.linspace(0.0, prof.duration, 501)
    zs = focus_position(prof, ts)
    assert np.all(np.diff(zs) <= 1e-15)
    with pytest.raises(ValueError):
        focus_position(prof, -1e-3)


def test_profile_closure_validation():
    with pytest.raises(ValueError):
        MotionProfile(600e-6, 1.0, 20e-3, 10e-3, -1.0, 10e-3)  # v_end != 0
    with pytest.raises(ValueError):
        MotionProfile(500e-6, 1.0, 20e-3, 10e-3, -1.0, 20e-3)  # wrong distance
    with pytest.raises(ValueError):
        MotionProfile(600e-6, 1.0, -1e-3, 10e-3, -1.0, 20e-3)


def test_profile_scaled_preserves_path():
    prof = default_profile()
    slow = prof.scaled(2.0)
    assert slow.duration == pytest.approx(2.0 * prof.duration)
    ts = np.linspace(0.0, prof.duration, 101)
    np.testing.assert_allclose(
        focus_position(slow, 2.0 * ts), focus_position(prof, ts), atol=1e-18
    )


def test_sample_ensemble_counter_based_streams():
    model = _model()
    prof = default_profile()
    a = sample_ensemble(3, 100e-6, model, prof, seed=7)
    b = sample_ensemble(6, 100e-6, model, prof, seed=7)
    # atom i is identical regardless of ensemble size
    np.testing.assert_array_equal(a.positions, b.positions[:3])
    np.testing.assert_array_equal(a.velocities, b.velocities[:3])
    c = sample_ensemble(3, 100e-6, model, prof, seed=8)
    assert not np.array_equal(a.positions, c.positions)


def test_sample_ensemble_equipartition():
    model = _model()
    prof = default_profile()
    temp = 100e-6
    ens = sample_ensemble(4000, temp, model, prof, seed=1)
    sigma_v = np.sqrt(K_B * temp / CS_MASS)
    got = ens.velocities.std(axis=0)
    np.testing.assert_allclose(got, sigma_v, rtol=0.05)
    omega_x, omega_z = model.trap_frequencies()
    assert ens.positions[:, 0].std() == pytest.approx(sigma_v / omega_x, rel=0.05)
    assert ens.positions[:, 2].mean() == pytest.approx(600e-6, abs=1e-7)


def test_sample_ensemble_validation():
    model = _model()
    prof = default_profile()
    with pytest.raises(ValueError):
        sample_ensemble(0, 100e-6, model, prof, seed=1)
    with pytest.raises(ValueError):
        sample_ensemble(4, -1.0, model, prof, seed=1)
    with pytest.raises(ValueError):
        sample_ensemble(4, 2e-3, model, prof, seed=1)  # kT >= depth


def test_fringe_model_depth_and_table_consistency():
    model = _model(r=-0.8)
    # the free trap has U = -depth at the moving focus
    u0 = float(model.potential_axial(np.array([100e-6]), 100e-6)[0])
    assert u0 == pytest.approx(-DEPTH, rel=1e-9)
    with pytest.raises(ValueError):
        FringeModel(three_mode_sum(W0, LAM), ReflectorModel(-0.8, z_surface=1e-6),
                    DEPTH, CS_MASS, 10e-6)
    with pytest.raises(ValueError):
        FringeModel(three_mode_sum(W0, LAM), ReflectorModel(-0.8), -1.0,
                    CS_MASS, 10e-6)


def test_find_fringe_traps_spacing():
    model = _model(r=-0.8)
    traps = find_fringe_traps(model, 5e-6)
    assert traps.size >= 4
    # individual wells near the focus are shifted by the envelope phase of
    # the superposition; the mean spacing stays close to lambda/2
    assert np.mean(np.diff(traps[:4])) == pytest.approx(LAM / 2, rel=0.05)
    np.testing.assert_allclose(np.diff(traps[:4]), LAM / 2, rtol=0.3)
    # without reflection the parked gaussian focus has no standing-wave wells
    flat = _model(r=0.0, spec=gaussian(W0, LAM))
    assert find_fringe_traps(flat, 5e-6).size == 0


def test_static_orbit_period_matches_harmonic_frequency():
    # one atom oscillating with tiny amplitude in the first fringe trap of
    # a parked tweezer: the measured period must match 2 pi / omega from
    # the local curvature of the exact potential
    model = _model(r=-0.8)
    # refine the 1 nm grid estimate of the trap center with a parabola fit;
    # an off-center crossing reference biases the period estimate
    zc0 = float(find_fringe_traps(model, 3e-6)[0])
    zq = zc0 + np.linspace(-2e-9, 2e-9, 41)
    c = np.polyfit(zq - zc0, model.potential_axial(zq, 0.0), 2)
    zc = zc0 - c[1] / (2.0 * c[0])
    curv = 2.0 * c[0]
    omega = np.sqrt(curv / CS_MASS)
    period = 2.0 * np.pi / omega

    amp = 1e-9
    ens = AtomEnsemble(
        np.array([[0.0, 0.0, zc + amp]]), np.zeros((1, 3)), CS_MASS, 1e-6, 0
    )
    record = []
    with np.errstate(all="ignore"):
        integrate(
            ens, model, _static_profile(), mode="axial-1d",
            t_hold=10.25 * period, steps_per_period=400,
            segment=period / 64.0, record=record,
        )
    t = np.array([fr[0] for fr in record])
    z = np.array([fr[1][0, 2] for fr in record]) - zc
    # interpolate the zero crossings; successive crossings are half periods
    s = np.flatnonzero(np.sign(z[:-1]) != np.sign(z[1:]))
    tc = t[s] - z[s] * (t[s + 1] - t[s]) / (z[s + 1] - z[s])
    measured = 2.0 * float(np.mean(np.diff(tc)))
    assert measured == pytest.approx(period, rel=1e-3)
    assert not ens.lost[0]


def test_energy_drift_warning_on_coarse_step():
    model = _model(r=-0.8)
    zc = float(find_fringe_traps(model, 3e-6)[0])
    ens = AtomEnsemble(
        np.array([[0.0, 0.0, zc + 20e-9]]), np.zeros((1, 3)), CS_MASS, 1e-6, 0
    )
    with pytest.warns(RuntimeWarning, match="energy drift"):
        integrate(
            ens, model, _static_profile(), mode="axial-1d",
            t_hold=0.2e-3, steps_per_period=3,
        )


def test_integrate_absorbs_at_surface():
    model = _model(r=-0.8)
    # an atom fired at the surface against a shallow barrier is absorbed
    ens = AtomEnsemble(
        np.array([[0.0, 0.0, 0.3e-6]]),
        np.array([[0.0, 0.0, -1.0]]),
        CS_MASS, 1e-6, 0,
    )
    integrate(ens, model, _static_profile(), mode="axial-1d", t_hold=0.1e-3)
    assert ens.lost[0]
    with pytest.raises(ValueError):
        integrate(ens, model, _static_profile(), mode="sideways")


def test_integrate_is_deterministic():
    model = _model(r=-0.8)
    prof = default_profile().scaled(0.02)  # 1 ms approach: fast test
    results = []
    for _ in range(2):
        ens = sample_ensemble(4, 100e-6, model, prof, seed=11)
        integrate(ens, model, prof, mode="axial-1d", t_hold=0.2e-3)
        results.append((ens.positions.copy(), ens.velocities.copy(), ens.lost.copy()))
    np.testing.assert_array_equal(results[0][0], results[1][0])
    np.testing.assert_array_equal(results[0][1], results[1][1])
    np.testing.assert_array_equal(results[0][2], results[1][2])


def test_delivery_histogram_basins():
    model = _model(r=-0.8)
    traps = find_fringe_traps(model, 8e-6)
    # three cold atoms parked in traps 1, 1 and 2; one escaped past z_max
    pos = np.array(
        [
            [0.0, 0.0, traps[0]],
            [0.0, 0.0, traps[0] + 5e-9],
            [0.0, 0.0, traps[1]],
            [0.0, 0.0, 30e-6],
        ]
    )
    ens = AtomEnsemble(pos, np.zeros((4, 3)), CS_MASS, 1e-6, 0)
    hist = delivery_histogram(ens, model, mode="axial-1d", z_max=8e-6)
    assert hist.probabilities[0] == pytest.approx(0.5)
    assert hist.probabilities[1] == pytest.approx(0.25)
    assert hist.lost == pytest.approx(0.25)
    assert np.sum(hist.probabilities) + hist.lost == pytest.approx(1.0)
    # a hot atom above the local barrier is not delivered (2 m/s gives a
    # kinetic energy far above the deepest interference well)
    hot = AtomEnsemble(
        np.array([[0.0, 0.0, traps[0]]]),
        np.array([[0.0, 0.0, 2.0]]),
        CS_MASS, 1e-6, 0,
    )
    hh = delivery_histogram(hot, model, mode="axial-1d", z_max=8e-6)
    assert hh.lost == pytest.approx(1.0)
    with pytest.raises(ValueError):
        DeliveryHistogram(traps[:1], np.array([0.7]), 0.5)


def test_full_3d_mode_conserves_energy_in_static_trap():
    # a mildly displaced atom in the free trap far from the surface keeps
    # its energy (no warning) over a short 3D hold
    model = _model(r=-0.8, z_max=30e-6)
    zc = float(find_fringe_traps(model, 3e-6)[0])
    ens = AtomEnsemble(
        np.array([[30e-9, 0.0, zc + 10e-9]]), np.zeros((1, 3)), CS_MASS, 1e-6, 0
    )
    import warnings as _w

    with _w.catch_warnings():
        _w.simplefilter("error", RuntimeWarning)
        integrate(
            ens, model, _static_profile(), mode="full-3d",
            t_hold=0.1e-3, steps_per_period=100,
        )
    assert not ens.lost[0]


def test_ensemble_validation():
    with pytest.raises(ValueError):
        AtomEnsemble(np.zeros((2, 2)), np.zeros((2, 2)), CS_MASS, 1e-6, 0)
    with pytest.raises(ValueError):
        AtomEnsemble(np.zeros((2, 3)), np.zeros((3, 3)), CS_MASS, 1e-6, 0)
    with pytest.raises(ValueError):
        AtomEnsemble(
            np.full((1, 3), np.nan), np.zeros((1, 3)), CS_MASS, 1e-6, 0
        )
