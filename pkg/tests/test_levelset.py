import json

import numpy as np
import pytest

from vortexorbits.domain import make_radial_power, make_user_g
from vortexorbits.dynamics import VortexConfig
from vortexorbits.errors import InvalidConfig, NotPositiveDefinite, RayRootNotBracketed
from vortexorbits.levelset import (
    certify_assumption,
    hessian_period_limit,
    period_function,
    quadrature_period,
    ray_radius,
    star_margin,
    trace_level,
)


def disk_period(c, K=1.0):
    return 2 * np.pi**2 * np.exp(-2 * np.pi * c) / abs(K)


@pytest.fixture(scope="module")
def level01(disk):
    return trace_level(disk, VortexConfig(0.5, 0.5), 0.1)


class TestRay:
    def test_disk_radius(self, disk):
        r = ray_radius(disk, 0.1, [0.0, 0.0], 1.3)
        assert r == pytest.approx(np.sqrt(1 - np.exp(-0.2 * np.pi)), rel=1e-14)

    def test_large_guess_shrinks_onto_boundary(self, disk):
        r = ray_radius(disk, 0.5, [0.0, 0.0], 0.0, t_guess=5.0)
        assert r == pytest.approx(np.sqrt(1 - np.exp(-np.pi)), rel=1e-14)

    def test_center_above_level(self, disk):
        with pytest.raises(RayRootNotBracketed):
            ray_radius(disk, -0.1, [0.0, 0.0], 0.0)

    def test_offset_center(self, disk):
        center = np.array([0.1, -0.05])
        for th in np.linspace(0, 2 * np.pi, 7):
            r = ray_radius(disk, 0.2, center, th)
            assert disk.eval_h(center + r * np.array([np.cos(th), np.sin(th)])) == pytest.approx(0.2, abs=1e-13)


class TestTraceLevel:
    def test_circle(self, level01):
        expected = np.sqrt(1 - np.exp(-0.2 * np.pi))
        np.testing.assert_allclose(level01.radii, expected, rtol=1e-13)
        assert level01.star_margin == pytest.approx(1.0)
        assert level01.winding == 1
        assert level01.orientation == 1

    def test_period(self, level01):
        assert level01.period == pytest.approx(disk_period(0.1), rel=1e-6)
        assert level01.period == pytest.approx(10.5306, abs=5e-4)
        assert level01.period_quadrature == pytest.approx(disk_period(0.1), rel=1e-12)
        assert level01.period_lift == pytest.approx(level01.period, rel=1e-9)

    def test_stays_on_level(self, level01):
        assert level01.level_error < 1e-9

    def test_state_at_wraps(self, level01):
        np.testing.assert_allclose(level01.state_at(level01.period + 1.0), level01.state_at(1.0), atol=1e-8)
        np.testing.assert_allclose(level01.state_at(0.0), level01.samples[0], atol=1e-15)

    def test_kappa_scaling(self, disk):
        lv = trace_level(disk, VortexConfig(1.0, 1.0), 0.1, n_samples=16)
        assert lv.period == pytest.approx(disk_period(0.1, 2.0), rel=1e-6)

    def test_negative_sum_reverses(self, disk):
        lv = trace_level(disk, VortexConfig(0.5, -1.5), 0.1, n_samples=16)
        assert lv.orientation == -1
        assert lv.period == pytest.approx(disk_period(0.1), rel=1e-6)

    def test_radial_power_period(self):
        # h = |z|^4: T = pi / (|kappa| p c^((p-1)/p)) = pi / 2 at c = 1
        lv = trace_level(make_radial_power(2.0), VortexConfig(0.5, 0.5), 1.0, n_samples=16)
        assert lv.period == pytest.approx(np.pi / 2, rel=1e-6)

    def test_ellipse_quadrature(self):
        m = make_user_g(lambda z, w: 0.5 * (z[..., 0] ** 2 + 4 * z[..., 1] ** 2 + w[..., 0] ** 2 + 4 * w[..., 1] ** 2),
                        grad_h=lambda z: np.stack([2 * z[..., 0], 8 * z[..., 1]], -1),
                        hess_h=lambda z: np.diag([2.0, 8.0]))
        lv = trace_level(m, VortexConfig(0.5, 0.5), 0.3, n_samples=64)
        # linear flow with frequency sqrt(det h'') = 4
        assert lv.period == pytest.approx(np.pi / 2, rel=1e-6)
        assert lv.period_quadrature == pytest.approx(np.pi / 2, rel=1e-10)
        assert 0 < lv.star_margin < 1

    def test_too_few_samples(self, disk):
        with pytest.raises(InvalidConfig):
            trace_level(disk, VortexConfig(0.5, 0.5), 0.1, n_samples=3)

    def test_csv(self, level01, tmp_path):
        level01.write_csv(tmp_path / "level.csv")
        lines = (tmp_path / "level.csv").read_text().splitlines()
        assert lines[0] == "theta,r" and len(lines) == 65

    def test_helpers(self, disk, level01):
        assert star_margin(disk, level01.samples, [0.0, 0.0]) == pytest.approx(1.0)
        assert quadrature_period(disk, 1.0, level01.thetas, level01.samples, np.zeros(2)) == pytest.approx(
            disk_period(0.1), rel=1e-12
        )


class TestPeriodFunction:
    def test_disk_decreasing(self, disk):
        pf = period_function(disk, VortexConfig(0.5, 0.5), [0.05, 0.1, 0.2, 0.4], n_samples=16)
        np.testing.assert_allclose(pf.T, disk_period(pf.c), rtol=1e-6)
        assert pf.direction == "decreasing" and pf.monotone
        assert pf.rows()[1][0] == 0.1

    def test_isochronous(self, isochronous):
        pf = period_function(isochronous, VortexConfig(0.5, 0.5), [0.1, 0.2, 0.3], n_samples=16)
        np.testing.assert_allclose(pf.T, np.pi, rtol=1e-6)
        assert not pf.monotone

    def test_hessian_limit_disk(self, disk):
        limit = hessian_period_limit(disk, VortexConfig(0.5, 0.5), [0.0, 0.0])
        assert limit == pytest.approx(2 * np.pi**2)
        small = trace_level(disk, VortexConfig(0.5, 0.5), 1e-3, n_samples=16).period
        assert abs(small / limit - 1) < 0.01

    def test_hessian_limit_radial_degenerate(self):
        with pytest.raises(NotPositiveDefinite):
            hessian_period_limit(make_radial_power(2.0), VortexConfig(0.5, 0.5), [0.0, 0.0])


class TestAssumptionCertificate:
    def test_disk(self, disk):
        cert = certify_assumption(disk, VortexConfig(0.5, 0.5), 0.1, 0.05, 0.2, n_grid=5, n_samples=16)
        assert cert.positive
        assert cert.direction == "decreasing"
        doc = json.loads(cert.to_json())
        assert doc["positive"] and doc["tolerances"]["rel_tol"] == 1e-10

    def test_isochronous_is_negative(self, isochronous):
        cert = certify_assumption(isochronous, VortexConfig(0.5, 0.5), 0.2, 0.1, 0.3, n_grid=5, n_samples=16)
        assert not cert.positive
        assert cert.min_margin == pytest.approx(1.0)
        assert cert.to_dict()["monotone"] is False

    def test_order_check(self, disk):
        with pytest.raises(InvalidConfig):
            certify_assumption(disk, VortexConfig(0.5, 0.5), 0.3, 0.05, 0.2)
