import json

import numpy as np
import pytest

from vortexorbits.dynamics import VortexConfig
from vortexorbits.errors import CannotCertify, InvalidConfig
from vortexorbits.flow import IntegratorSettings
from vortexorbits.twist import (
    Grids,
    build_annulus,
    certify_twist,
    choose_nu,
    fast_turns,
    product_states,
    rot1,
    rot2,
    rotation_numbers,
    verify_twist,
)

COARSE = Grids(4, 2, 2)


@pytest.fixture(scope="module")
def annulus(disk):
    return build_annulus(disk, VortexConfig(0.5, 0.5), 0.1, 0.09, 0.11, n_samples=16)


@pytest.fixture(scope="module")
def coarse_cert(disk, annulus):
    return certify_twist(disk, VortexConfig(0.5, 0.5), 0.1, 0.09, 0.11, grids=COARSE, annulus=annulus)


class TestGrids:
    def test_doubled(self):
        g = Grids(3, 4, 5, 0.1).doubled()
        assert (g.n_boundary, g.n_theta, g.n_radii, g.theta_offset) == (6, 8, 10, 0.1)

    def test_thetas(self):
        np.testing.assert_allclose(Grids(1, 4, 2).thetas(), [0, np.pi / 2, np.pi, 3 * np.pi / 2])

    def test_invalid(self):
        with pytest.raises(InvalidConfig):
            Grids(0, 4, 2)


class TestChooseNu:
    @pytest.mark.parametrize("rng_,nu", [((3.2, 3.9), 4), ((3.2, 3.97), 5), ((0.1, 0.4), 1), ((6.0, 7.0), 8)])
    def test_positive(self, rng_, nu):
        assert choose_nu(1, rng_) == nu

    @pytest.mark.parametrize("rng_,nu", [((-3.9, -3.2), -4), ((-0.4, -0.1), -1), ((-3.97, -3.5), -5)])
    def test_negative(self, rng_, nu):
        assert choose_nu(-1, rng_) == nu


class TestRotationNumbers:
    def test_free_plane_exact(self, free_plane):
        # without boundary coupling the fast angle turns at k1 k2 / (pi R1^2)
        for k in [(0.5, 0.5), (1.5, -0.5)]:
            cfg = VortexConfig(*k)
            w = np.array([0.1, 0.0, 0.3, 0.2])
            got = rot1(free_plane, cfg, w, 2.0)
            assert got == pytest.approx(fast_turns(cfg, 2.0, 0.1), rel=1e-8)
            assert rot2(free_plane, cfg, w, 2.0, center=(0.3, 0.0)) == pytest.approx(0.0, abs=1e-10)

    def test_fast_turns(self):
        assert fast_turns(VortexConfig(0.5, 0.5), 2 * np.pi**2, 0.5) == pytest.approx(1.0)
        assert fast_turns(VortexConfig(1.5, -0.5), 1.0, 1.0) < 0

    def test_batch_matches_single(self, disk, half_half):
        W = np.array([[0.1, 0.0, 0.4, 0.0], [0.0, 0.12, -0.3, 0.1]])
        r1, r2, res = rotation_numbers(disk, half_half, W, 1.0)
        for i in range(2):
            assert r1[i] == pytest.approx(rot1(disk, half_half, W[i], 1.0), abs=1e-7)
            assert r2[i] == pytest.approx(rot2(disk, half_half, W[i], 1.0), abs=1e-7)
        assert not res.failed.any()

    def test_level_rotation_near_one(self, disk, half_half, annulus):
        # a tight pair on C_c makes about one slow turn per level period
        w = np.concatenate([[0.05, 0.0], annulus.middle.samples[0]])
        assert rot2(disk, half_half, w, annulus.T, settings=IntegratorSettings(1e-8, 1e-10)) == pytest.approx(1.0, abs=0.02)

    def test_product_states(self):
        pts = np.array([[0.1, 0.2], [0.3, 0.4], [0.5, 0.6]])
        W = product_states(pts, np.array([0.0, np.pi / 2]), np.array([0.01, 0.02]))
        assert W.shape == (3, 2, 2, 4)
        np.testing.assert_allclose(W[1, 1, 0], [0.0, 0.01, 0.3, 0.4], atol=1e-17)
        np.testing.assert_allclose(W[2, 0, 1], [0.02, 0.0, 0.5, 0.6])


class TestAnnulus:
    def test_levels(self, annulus):
        assert [lv.c for lv in (annulus.inner, annulus.middle, annulus.outer)] == [0.09, 0.1, 0.11]
        assert annulus.direction == "decreasing"
        np.testing.assert_allclose(annulus.center, 0.0, atol=1e-12)

    def test_isochronous_rejected(self, isochronous):
        with pytest.raises(CannotCertify) as info:
            build_annulus(isochronous, VortexConfig(0.5, 0.5), 0.2, 0.15, 0.25, n_samples=16)
        assert info.value.stage == "assumption"


class TestCertificate:
    def test_positive(self, coarse_cert):
        cert = coarse_cert
        assert cert.positive
        assert 0 < cert.a1 < cert.b1 <= 0.2
        assert cert.nu >= 1 and cert.sigma == 1
        assert cert.rot1_inner[0] > cert.nu > cert.rot1_outer[1]
        assert cert.rot2_c1[1] < 1 < cert.rot2_d1[0]

    def test_json(self, coarse_cert):
        doc = json.loads(coarse_cert.to_json())
        assert doc["positive"] is True
        assert set(doc["margins"]) == {"rot1_inner", "rot1_outer", "rot2_c1", "rot2_d1"}
        assert doc["tolerances"] == {"rel_tol": 1e-10, "abs_tol": 1e-12}

    def test_verify_reproduces(self, disk, coarse_cert, annulus):
        again = verify_twist(disk, coarse_cert, COARSE, annulus=annulus)
        assert again.margins == pytest.approx(coarse_cert.margins, abs=1e-9)

    def test_bad_levels(self, disk):
        with pytest.raises(InvalidConfig):
            certify_twist(disk, VortexConfig(0.5, 0.5), 0.1, 0.11, 0.09)

    def test_free_plane_cannot_certify(self, disk, free_plane, annulus):
        # a pair that ignores the boundary does not drift along the level lines
        with pytest.raises(CannotCertify) as info:
            certify_twist(disk, VortexConfig(0.5, 0.5), 0.1, 0.09, 0.11, grids=Grids(2, 2, 2),
                          annulus=annulus, dynamics_model=free_plane, max_turns=100)
        assert info.value.stage == "rot2"
        assert info.value.best_margin < 0
