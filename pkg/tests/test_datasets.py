import numpy as np
import pytest

from driftfield.datasets import (
    TargetKind,
    ToyTarget,
    checkerboard,
    eight_gaussians,
    make_target,
    sample,
    sample_prior,
    spiral,
    two_moons,
)
from driftfield.errors import ConfigError
from driftfield.geometry import PointCloud, RngState


class TestEightGaussians:
    def test_centers_on_circle_equally_spaced(self):
        centers = eight_gaussians().centers()
        assert centers.n == 8
        radii = np.linalg.norm(centers.points, axis=1)
        np.testing.assert_allclose(radii, 2.0, atol=1e-12)
        angles = np.arctan2(centers.points[:, 1], centers.points[:, 0])
        steps = np.diff(np.unwrap(angles))
        np.testing.assert_allclose(steps, np.pi / 4.0, atol=1e-12)

    def test_large_sample_mean_near_origin(self):
        X = sample(eight_gaussians(), 100_000, RngState(60))
        assert np.abs(X.mean()).max() < 0.02

    def test_mode_occupancy_is_binomial(self):
        target = eight_gaussians()
        X = sample(target, 10_000, RngState(61))
        centers = target.centers().points
        d2 = ((X.points[:, None, :] - centers[None, :, :]) ** 2).sum(-1)
        counts = np.bincount(d2.argmin(axis=1), minlength=8)
        # three-sigma binomial band around n/8
        sigma = np.sqrt(10_000 * (1 / 8) * (7 / 8))
        assert np.all(np.abs(counts - 1250.0) <= 3.0 * sigma)

    def test_other_kinds_have_no_centers(self):
        with pytest.raises(ConfigError):
            checkerboard().centers()


class TestCheckerboard:
    def test_every_sample_in_a_dark_cell(self):
        t = checkerboard()
        X = sample(t, 5_000, RngState(62))
        side = 2.0 * t.extent / t.tiles
        cell = np.floor((X.points + t.extent) / side).astype(int)
        assert np.all((cell >= 0) & (cell < t.tiles))
        assert np.all((cell.sum(axis=1)) % 2 == 0)

    def test_within_extent(self):
        t = checkerboard()
        X = sample(t, 2_000, RngState(63))
        assert np.all(np.abs(X.points) <= t.extent)


class TestSpiral:
    def test_radius_determines_angle_without_noise(self):
        t = ToyTarget(TargetKind.SPIRAL, noise=0.0, turns=2.0, scale=2.0)
        X = sample(t, 500, RngState(64))
        r = np.linalg.norm(X.points, axis=1)
        theta = r / t.scale * t.turns * 2.0 * np.pi
        expect = t.scale * (r / t.scale)[:, None] * np.stack(
            [np.cos(theta), np.sin(theta)], axis=1
        )
        np.testing.assert_allclose(X.points, expect, atol=1e-9)

    def test_radius_monotone_in_angle_parameter(self):
        t = ToyTarget(TargetKind.SPIRAL, noise=0.0, turns=2.0, scale=2.0)
        X = sample(t, 400, RngState(65))
        r = np.sort(np.linalg.norm(X.points, axis=1))
        assert r[0] >= 0.0 and r[-1] <= t.scale + 1e-12
        assert np.all(np.diff(r) >= 0.0)


class TestTwoMoons:
    def test_bounded_and_centered(self):
        t = two_moons()
        X = sample(t, 5_000, RngState(66))
        assert np.abs(X.points).max() < 2.0 * t.scale
        assert np.abs(X.mean()).max() < 0.15


class TestSamplePrior:
    def test_bit_identical_per_seed(self):
        a = sample_prior(100, 3, RngState(67))
        b = sample_prior(100, 3, RngState(67))
        assert np.array_equal(a.points, b.points)

    def test_covariance_near_identity(self):
        X = sample_prior(100_000, 2, RngState(68))
        cov = np.cov(X.points.T)
        assert np.abs(cov - np.eye(2)).max() < 0.03

    def test_single_scalar(self):
        X = sample_prior(1, 1, RngState(69))
        assert X.points.shape == (1, 1)
        assert np.isfinite(X.points[0, 0])

    def test_rejects_bad_shapes(self):
        with pytest.raises(ConfigError):
            sample_prior(0, 2, RngState(1))
        with pytest.raises(ConfigError):
            sample_prior(2, 0, RngState(1))


class TestFactories:
    def test_make_target_round_trips_kinds(self):
        for kind in TargetKind:
            t = make_target(kind)
            assert t.kind is kind
        assert make_target("8gaussians").kind is TargetKind.EIGHT_GAUSSIANS
        with pytest.raises(ValueError):
            make_target("nonsense")

    def test_sample_rejects_nonpositive_n(self):
        with pytest.raises(ConfigError):
            sample(spiral(), 0, RngState(1))

    def test_all_samplers_deterministic_and_finite(self):
        for kind in TargetKind:
            t = make_target(kind)
            X = sample(t, 256, RngState(70))
            Y = sample(t, 256, RngState(70))
            assert np.array_equal(X.points, Y.points)
            assert np.all(np.isfinite(X.points))
            assert isinstance(X, PointCloud)
