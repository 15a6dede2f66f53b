import math

import numpy as np
import pytest

from helpers import random_ansatz, random_metric

from normshift.errors import DegenerateVelocity, StepFailure
from normshift.forces import (ForceField, Profile, anisotropic_field,
                              covariant_from_flat, flat_from_covariant,
                              from_scalar_ansatz, gravity_field, oscillator_field,
                              speed_profile_ansatz)
from normshift.geometry import frame
from normshift.dynamics import (DeviationState, IntegratorConfig, PhaseState,
                                integrate, integrate_phi_psi,
                                integrate_variational, phi_psi_initial_from_tau,
                                speed_derivative)


def zero_field() -> ForceField:
    z = np.zeros((2, 2))
    return ForceField(fn=lambda r, v: np.zeros(2),
                      spatial_jacobian=lambda r, v: z.copy(),
                      velocity_jacobian=lambda r, v: z.copy(), label="zero")


def test_phase_state_validation():
    with pytest.raises(ValueError):
        PhaseState((0, math.nan), (1, 0))
    st = PhaseState((0, 0), (1, 2))
    assert np.allclose(st.packed(), [0, 0, 1, 2])


def test_integrator_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(method="euler")
    with pytest.raises(ValueError):
        IntegratorConfig(abs_tol=0.0)
    with pytest.raises(ValueError):
        IntegratorConfig(method="rk4-fixed")


def test_free_motion():
    tr = integrate(zero_field(), None, PhaseState((0, 0), (1, 2)), (0, 1))
    assert np.allclose(tr.positions()[-1], [1, 2], atol=1e-12)
    assert np.allclose(tr.velocities()[-1], [1, 2], atol=1e-14)


def test_gravity_closed_form():
    tr = integrate(gravity_field(), None, PhaseState((0.7, 0), (0, -1)), (0, 2),
                   t_eval=np.linspace(0, 2, 21))
    for i, t in enumerate(tr.times):
        assert np.allclose(tr.positions()[i], [0.7, -0.5 * t * t - t], atol=1e-12)


def test_oscillator_closed_form():
    om = 1.7
    tr = integrate(oscillator_field(om), None, PhaseState((0.3, 0), (0, 1)), (0, 2),
                   t_eval=np.linspace(0, 2, 41),
                   cfg=IntegratorConfig(abs_tol=1e-12, rel_tol=1e-12))
    for i, t in enumerate(tr.times):
        assert tr.positions()[i][1] == pytest.approx(math.sin(om * t) / om, abs=1e-9)
        assert tr.positions()[i][0] == pytest.approx(0.3, abs=1e-12)


def test_backward_time_integration():
    tr = integrate(gravity_field(), None, PhaseState((0, 0), (0, -1)), (0, -1.5),
                   t_eval=np.linspace(0, -1.5, 16))
    t = tr.times[-1]
    assert t == pytest.approx(-1.5)
    assert tr.positions()[-1][1] == pytest.approx(-0.5 * t * t - t, abs=1e-12)


def test_rk4_fourth_order_on_oscillator():
    om = 1.0
    exact = math.sin(2.0 * om) / om

    def endpoint_error(step):
        cfg = IntegratorConfig(method="rk4-fixed", step=step)
        tr = integrate(oscillator_field(om), None, PhaseState((0, 0), (0, 1)),
                       (0, 2), cfg)
        return abs(tr.positions()[-1][1] - exact)

    ratio = endpoint_error(0.05) / endpoint_error(0.025)
    assert ratio >= 14.0, f"rk4 error ratio {ratio:.2f} below 4th-order expectation"


def test_step_failure_on_finite_time_blowup():
    # d|v|/dt = |v|^3 escapes to infinity at t = 1/(2 v0^2) = 0.5
    prof = Profile(fn=lambda v: v**3, deriv=lambda v: 3 * v * v)
    f = from_scalar_ansatz(speed_profile_ansatz(prof))
    with pytest.raises(StepFailure):
        integrate(f, None, PhaseState((0, 0), (1.0, 0)), (0, 1.0),
                  IntegratorConfig(max_steps=20000))


def test_degenerate_velocity_propagates():
    # constant deceleration along the velocity: speed hits zero at t = 1
    prof = Profile.constant(-1.0)
    f = from_scalar_ansatz(speed_profile_ansatz(prof))
    with pytest.raises(DegenerateVelocity):
        integrate(f, None, PhaseState((0, 0), (1.0, 0)), (0, 2.0))


def test_interpolant_matches_nodes_exactly():
    tr = integrate(oscillator_field(1.0), None, PhaseState((0, 0), (0.4, 1)), (0, 1))
    for i, t in enumerate(tr.times):
        st = tr.state_at(t)
        assert np.array_equal(st.r, tr.positions()[i])
        assert np.array_equal(st.v, tr.velocities()[i])


def test_variational_linear_for_zero_and_constant_fields():
    tau0, taud0 = np.array([0.3, -0.1]), np.array([0.2, 0.5])
    for f in (zero_field(), gravity_field()):
        base = integrate(f, None, PhaseState((0, 0), (1, -1)), (0, 2),
                         t_eval=np.linspace(0, 2, 11))
        devs = integrate_variational(f, base, tau0, taud0)
        for i, t in enumerate(base.times):
            assert np.allclose(devs[i].tau, tau0 + taud0 * t, atol=1e-10)


def test_variational_against_flow_differencing():
    f = anisotropic_field(Profile.constant(1.0))
    init = PhaseState((0, 0), (0.9, 0.8))
    t_eval = np.linspace(0, 1, 11)
    base = integrate(f, None, init, (0, 1), t_eval=t_eval)
    tau0, taud0 = np.array([0.3, -0.2]), np.array([0.1, 0.25])
    devs = integrate_variational(f, base, tau0, taud0)
    d = 1e-4
    plus = integrate(f, None, PhaseState(init.r + d * tau0, init.v + d * taud0),
                     (0, 1), t_eval=t_eval)
    minus = integrate(f, None, PhaseState(init.r - d * tau0, init.v - d * taud0),
                      (0, 1), t_eval=t_eval)
    fd = (plus.positions() - minus.positions()) / (2 * d)
    for i in range(len(t_eval)):
        assert np.max(np.abs(fd[i] - devs[i].tau)) < 1e-5


def test_variational_superposition():
    f = oscillator_field(1.2)
    tight = IntegratorConfig(abs_tol=1e-13, rel_tol=1e-13)
    base = integrate(f, None, PhaseState((0.2, 0.1), (0.5, 1.0)), (0, 1.5),
                     t_eval=np.linspace(0, 1.5, 7), cfg=tight)
    a = integrate_variational(f, base, [1.0, 0.0], [0.0, 0.3], tight)
    b = integrate_variational(f, base, [0.0, -0.5], [0.7, 0.0], tight)
    combo = integrate_variational(f, base, [2.0, -1.5], [2.1, 0.6], tight)
    for i in range(len(base.times)):
        lin = 2.0 * a[i].tau + 3.0 * b[i].tau
        assert np.max(np.abs(lin - combo[i].tau)) < 1e-9


def test_deviation_frame_reconstruction():
    f = anisotropic_field(Profile.constant(0.8))
    tight = IntegratorConfig(abs_tol=1e-13, rel_tol=1e-13)
    base = integrate(f, None, PhaseState((0, 0), (1.0, 0.4)), (0, 1),
                     t_eval=np.linspace(0, 1, 9), cfg=tight)
    devs = integrate_variational(f, base, [0.2, 0.5], [-0.1, 0.3], tight)
    for i, t in enumerate(base.times):
        fr = frame(base.states[i].v)
        rebuilt = devs[i].phi * fr.N + devs[i].psi * fr.M
        assert np.max(np.abs(rebuilt - devs[i].tau)) < 1e-10


def test_phi_psi_zero_field_linear():
    f = zero_field()
    base = integrate(f, None, PhaseState((0, 0), (1, 0.5)), (0, 2),
                     t_eval=np.linspace(0, 2, 9))
    phi, psi = integrate_phi_psi(f, base, 0.25, 0.5, -1.0, 0.75)
    for i, t in enumerate(base.times):
        assert phi[i] == pytest.approx(0.25 + 0.5 * t, abs=1e-10)
        assert psi[i] == pytest.approx(-1.0 + 0.75 * t, abs=1e-10)


def test_phi_psi_matches_variational_projection():
    f = oscillator_field(0.9)
    init = PhaseState((0.4, -0.2), (0.8, 0.9))
    base = integrate(f, None, init, (0, 1.2), t_eval=np.linspace(0, 1.2, 13))
    tau0, taud0 = np.array([0.5, 0.1]), np.array([-0.2, 0.4])
    devs = integrate_variational(f, base, tau0, taud0)
    p0, pd0, q0, qd0 = phi_psi_initial_from_tau(f, init, tau0, taud0)
    phi, psi = integrate_phi_psi(f, base, p0, pd0, q0, qd0)
    for i in range(len(base.times)):
        assert phi[i] == pytest.approx(devs[i].phi, abs=1e-6)
        assert psi[i] == pytest.approx(devs[i].psi, abs=1e-6)


def test_phi_stays_zero_on_normality_field():
    # zero initial data for phi on a field satisfying the weak equations
    f = anisotropic_field(Profile.polynomial([0.6, 0.2]))
    base = integrate(f, None, PhaseState((0, 0), (0.7, 0.9)), (0, 1),
                     t_eval=np.linspace(0, 1, 11))
    phi, _ = integrate_phi_psi(f, base, 0.0, 0.0, 1.0, 0.3)
    assert np.max(np.abs(phi)) < 1e-8


def test_speed_derivative():
    assert speed_derivative(zero_field(), PhaseState((0, 0), (1, 1))) == 0
    assert speed_derivative(gravity_field(), PhaseState((0, 0), (0, -1))) == pytest.approx(1.0)
    f = anisotropic_field(Profile.constant(1.0))
    h = 1e-5
    stencil = sorted({0.0, 1.0} | {t + k * h for t in (0.2, 0.5, 0.8) for k in (-1, 0, 1)})
    base = integrate(f, None, PhaseState((0, 0), (0.9, 0.8)), (0, 1), t_eval=stencil,
                     exact_nodes=True)
    speeds = {t: float(np.hypot(*base.states[i].v)) for i, t in enumerate(base.times)}
    for t in (0.2, 0.5, 0.8):
        sp, sm = speeds[t + h], speeds[t - h]
        a_val = speed_derivative(f, base.state_at(t))
        assert (sp - sm) / (2 * h) == pytest.approx(a_val, abs=1e-6)
        # reciprocal-speed rate: d(1/|v|)/dt = -A/|v|^2
        assert (1 / sp - 1 / sm) / (2 * h) == pytest.approx(-a_val / speeds[t] ** 2, abs=1e-6)


def test_conformal_equivalence_of_trajectories():
    rng = np.random.default_rng(14)
    m = random_metric(rng)
    fp = from_scalar_ansatz(random_ansatz(rng))
    fc = covariant_from_flat(fp, m)
    fp_back = flat_from_covariant(fc, m)
    t_eval = np.linspace(0, 1, 11)
    for _ in range(5):
        init = PhaseState(rng.uniform(-1, 1, 2), rng.uniform(0.5, 1.5, 2))
        cov = integrate(fc, m, init, (0, 1), t_eval=t_eval)
        flat = integrate(fp, None, init, (0, 1), t_eval=t_eval)
        back = integrate(fp_back, None, init, (0, 1), t_eval=t_eval)
        assert np.max(np.abs(cov.positions() - flat.positions())) < 1e-8
        assert np.max(np.abs(back.positions() - flat.positions())) < 1e-8


def test_trajectory_csv_format(tmp_path):
    tr = integrate(gravity_field(), None, PhaseState((1 / 3, 0), (0, -1)), (0, 1),
                   t_eval=np.linspace(0, 1, 5))
    path = tmp_path / "traj.csv"
    tr.write_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "t,x,y,vx,vy"
    assert len(lines) == 6
    # 17 significant digits round-trip
    x = float(lines[1].split(",")[1])
    assert x == 1 / 3
    devs = [DeviationState(np.zeros(2), np.zeros(2), 0.5, 1.5)] * 5
    tr.write_csv(path, deviations=devs)
    assert path.read_text().splitlines()[0] == "t,x,y,vx,vy,phi,psi"
