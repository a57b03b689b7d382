import csv

import numpy as np
import pytest
from scipy.integrate import trapezoid

from vortexorbits.dynamics import VectorField, VortexConfig, center_system, to_w, w_system, z_system
from vortexorbits.errors import BudgetExceeded, DomainExit, InvalidConfig, NonTransversal
from vortexorbits.flow import (
    TRAJECTORY_COLUMNS,
    IntegratorSettings,
    flow_jacobian,
    flow_map,
    integrate,
    integrate_batch,
    lift_angle,
    section_crossings,
    write_trajectory_csv,
)

# dx/dt = -y, dy/dt = x: counter-clockwise unit-speed rotation
ROTATION = VectorField(rhs=lambda y: np.stack([-y[..., 1], y[..., 0]], axis=-1), dim=2,
                       energy=lambda y: np.sum(y * y, axis=-1))


def rotated(y0, t):
    c, s = np.cos(t), np.sin(t)
    return np.array([c * y0[0] - s * y0[1], s * y0[0] + c * y0[1]])


@pytest.fixture(scope="module")
def pair_field(disk):
    return w_system(disk, VortexConfig(0.5, 0.5))


@pytest.fixture(scope="module")
def pair_w0():
    return to_w(VortexConfig(0.5, 0.5), np.array([0.33, 0.02, 0.27, -0.03]))


class TestSettings:
    def test_defaults(self):
        s = IntegratorSettings()
        assert (s.rel_tol, s.abs_tol) == (1e-10, 1e-12)

    @pytest.mark.parametrize("kw", [{"rel_tol": 0}, {"abs_tol": -1}, {"max_steps": 0}, {"max_step": 0}])
    def test_invalid(self, kw):
        with pytest.raises(InvalidConfig):
            IntegratorSettings(**kw)

    def test_scaled(self):
        s = IntegratorSettings().scaled(0.5)
        assert (s.rel_tol, s.abs_tol) == (5e-11, 5e-13)


class TestIntegrate:
    def test_rotation_endpoint(self):
        y0 = np.array([1.0, 0.5])
        traj = integrate(ROTATION, y0, (0.0, 10.0))
        np.testing.assert_allclose(traj.states[-1], rotated(y0, 10.0), atol=1e-8)
        assert traj.t1 == 10.0

    def test_dense_output(self):
        y0 = np.array([1.0, 0.0])
        traj = integrate(ROTATION, y0, (0.0, 5.0))
        ts = np.linspace(0, 5, 301)
        exact = np.array([rotated(y0, t) for t in ts])
        np.testing.assert_allclose(traj(ts), exact, atol=1e-8)
        np.testing.assert_allclose(traj.derivative(2.0), ROTATION.rhs(traj(2.0)))

    def test_error_tracks_tolerance(self):
        y0 = np.array([1.0, 0.0])
        errs = []
        for tol in (1e-6, 1e-8, 1e-10):
            traj = integrate(ROTATION, y0, (0.0, 20.0), IntegratorSettings(tol, tol * 1e-2))
            errs.append(np.linalg.norm(traj.states[-1] - rotated(y0, 20.0)))
        assert errs[0] > errs[1] > errs[2]
        assert errs[2] < 1e-8

    def test_nonzero_start(self):
        traj = integrate(ROTATION, [1.0, 0.0], (2.0, 3.0))
        assert traj.t0 == 2.0
        np.testing.assert_allclose(traj.states[-1], rotated([1.0, 0.0], 1.0), atol=1e-9)

    def test_plain_callable(self):
        traj = integrate(lambda y: -y, [1.0], (0.0, 1.0))
        assert traj.states[-1, 0] == pytest.approx(np.exp(-1), rel=1e-9)
        assert np.isnan(traj.energy_drift)

    @pytest.mark.parametrize("span", [(1.0, 0.0), (0.0, np.inf)])
    def test_bad_span(self, span):
        with pytest.raises(InvalidConfig):
            integrate(ROTATION, [1.0, 0.0], span)

    def test_domain_exit(self):
        drift = VectorField(rhs=lambda y: np.ones_like(y), dim=2,
                            admissible=lambda y: np.sum(y * y, axis=-1) < 1.0)
        with pytest.raises(DomainExit) as info:
            integrate(drift, [0.0, 0.0], (0.0, 2.0))
        assert 0.6 < info.value.t < 0.75

    def test_start_outside(self, disk):
        with pytest.raises(DomainExit):
            integrate(center_system(disk, 1.0), [1.2, 0.0], (0.0, 1.0))

    def test_budget(self):
        with pytest.raises(BudgetExceeded):
            integrate(ROTATION, [1.0, 0.0], (0.0, 100.0), IntegratorSettings(max_steps=10))

    def test_max_step_respected(self):
        capped = VectorField(rhs=ROTATION.rhs, dim=2, max_step=lambda y: np.full(y.shape[:-1], 0.01))
        traj = integrate(capped, [1.0, 0.0], (0.0, 1.0))
        assert np.max(np.diff(traj.times)) <= 0.01 * (1 + 1e-12)


class TestPairFlow:
    def test_energy_and_impulse(self, pair_field, pair_w0):
        traj = integrate(pair_field, pair_w0, (0.0, 3.0))
        assert traj.relative_energy_drift < 1e-9
        assert traj.invariant_drift < 1e-9

    def test_reversibility(self, disk, pair_field, pair_w0):
        fwd = flow_map(pair_field, pair_w0, 2.0)
        back = VectorField(rhs=lambda w: -pair_field.rhs(w), dim=4, max_step=pair_field.max_step)
        np.testing.assert_allclose(flow_map(back, fwd, 2.0), pair_w0, atol=1e-8)

    def test_semigroup(self, pair_field, pair_w0):
        direct = flow_map(pair_field, pair_w0, 1.5)
        composed = flow_map(pair_field, flow_map(pair_field, pair_w0, 0.7), 0.8)
        np.testing.assert_allclose(direct, composed, atol=1e-8)

    def test_zero_time(self, pair_field, pair_w0):
        np.testing.assert_array_equal(flow_map(pair_field, pair_w0, 0.0), pair_w0)
        np.testing.assert_array_equal(flow_jacobian(pair_field, pair_w0, 0.0), np.eye(4))

    def test_volume_preserving(self, pair_field, pair_w0):
        # the fast twist makes long-time difference quotients inaccurate; a few turns suffice
        jac, value = flow_jacobian(pair_field, pair_w0, 0.1, with_value=True)
        assert np.linalg.det(jac) == pytest.approx(1.0, abs=1e-5)
        np.testing.assert_allclose(value, flow_map(pair_field, pair_w0, 0.1), atol=1e-12)

    def test_z_and_w_agree(self, disk, pair_w0):
        c = VortexConfig(0.5, 0.5)
        z0 = np.array([0.33, 0.02, 0.27, -0.03])
        zT = flow_map(z_system(disk, c), z0, 1.0)
        wT = flow_map(w_system(disk, c), pair_w0, 1.0)
        np.testing.assert_allclose(to_w(c, zT), wT, atol=1e-8)

    def test_batch_matches_single(self, pair_field, pair_w0):
        pts = np.stack([pair_w0, pair_w0 * 1.01, pair_w0 * 0.99])
        res = integrate_batch(pair_field, pts, 1.0)
        for p, y in zip(pts, res.y):
            np.testing.assert_allclose(y, flow_map(pair_field, p, 1.0), atol=1e-9)
        assert not res.failed.any()


def test_batch_failure_as_nan():
    drift = VectorField(rhs=lambda y: np.stack([np.ones(y.shape[:-1]), np.zeros(y.shape[:-1])], -1), dim=2,
                        admissible=lambda y: y[..., 0] < 1.0)
    res = integrate_batch(drift, np.array([[0.0, 0.0], [0.5, 0.0]]), 0.8, on_fail="nan")
    assert res.failed[1] and not res.failed[0]
    assert np.all(np.isnan(res.y[1]))
    assert res.y[0, 0] == pytest.approx(0.8)
    with pytest.raises(DomainExit):
        integrate_batch(drift, np.array([[0.5, 0.0]]), 0.8)


class TestLift:
    def test_rotation_winds(self):
        traj = integrate(ROTATION, [1.0, 0.0], (0.0, 6 * np.pi + 1.0))
        lift = lift_angle(traj)
        assert lift.increment(0.0, 6 * np.pi + 1.0) == pytest.approx(6 * np.pi + 1.0, abs=1e-8)
        assert lift.rate(1.0) == pytest.approx(1.0)

    def test_additivity(self, pair_field, pair_w0):
        traj = integrate(pair_field, pair_w0, (0.0, 2.0))
        lift = lift_angle(traj)
        a, b, c = 0.1, 0.77, 1.9
        assert lift.increment(a, c) == pytest.approx(lift.increment(a, b) + lift.increment(b, c), abs=1e-12)

    def test_batch_angles_match_lift(self, pair_field, pair_w0):
        traj = integrate(pair_field, pair_w0, (0.0, 2.0))
        res = integrate_batch(pair_field, pair_w0[None], 2.0, angles=[(0, 1, (0.0, 0.0)), (2, 3, (0.0, 0.0))])
        assert res.turns[0, 0] == pytest.approx(lift_angle(traj).increment(0, 2), abs=1e-7)
        assert res.turns[0, 1] == pytest.approx(lift_angle(traj, (2, 3)).increment(0, 2), abs=1e-7)

    def test_fast_angle_matches_rate(self, pair_field, pair_w0):
        traj = integrate(pair_field, pair_w0, (0.0, 0.5))
        lift = lift_angle(traj)
        ts = np.linspace(0.0, 0.5, 2001)
        integral = trapezoid(lift.rate(ts), ts)
        assert lift.increment(0.0, 0.5) == pytest.approx(integral, rel=1e-5)


class TestSections:
    def test_rotation_crossings(self):
        traj = integrate(ROTATION, [1.0, 0.0], (0.0, 13.0))
        hits = section_crossings(traj, angle=np.pi / 2)
        np.testing.assert_allclose(hits, [np.pi / 2, np.pi / 2 + 2 * np.pi], atol=1e-10)

    def test_orientation_filter(self):
        traj = integrate(ROTATION, [1.0, 0.0], (0.0, 13.0))
        assert len(section_crossings(traj, angle=1.0, orientation=-1)) == 0
        assert len(section_crossings(traj, angle=1.0, orientation=1)) == 2

    def test_tangential_motion(self):
        slide = VectorField(rhs=lambda y: np.stack([np.ones(y.shape[:-1]), 1e-10 * np.ones(y.shape[:-1])], -1), dim=2)
        traj = integrate(slide, [1.0, -1e-10], (0.0, 2.0))
        with pytest.raises(NonTransversal):
            section_crossings(traj, angle=0.0)


def test_trajectory_csv(tmp_path, disk, pair_field, pair_w0):
    traj = integrate(pair_field, pair_w0, (0.0, 0.5))
    path = tmp_path / "traj.csv"
    write_trajectory_csv(path, traj, disk, VortexConfig(0.5, 0.5))
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == TRAJECTORY_COLUMNS
    data = np.array(rows[1:], float)
    assert data[0, 0] == 0.0 and data[-1, 0] == 0.5
    assert np.ptp(data[:, 5]) < 1e-9
