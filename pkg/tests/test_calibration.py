import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from birdseye.calibration import (
    BodyModel,
    Correspondence,
    Homography,
    ViewCalibration,
    estimate_homography,
    keypoint_height,
    lift_at_height,
    lift_ground,
)
from birdseye.errors import DegenerateError, DomainError, HorizonError
from birdseye.geometry import PanoramicCamera, RectilinearView, world_point_to_view_pixel

from oracles import ray_plane_ground_point


def random_homography(rng) -> np.ndarray:
    """Well-conditioned random projective map resembling a camera view."""
    while True:
        m = np.eye(3) + rng.uniform(-0.4, 0.4, (3, 3))
        m[2, :2] = rng.uniform(-0.05, 0.05, 2)  # keep the horizon far away
        if abs(np.linalg.det(m)) > 0.1:
            return m


def correspondences_from(h: np.ndarray, ground_pts) -> list[Correspondence]:
    out = []
    for g in ground_pts:
        p = h @ np.array([g[0], g[1], 1.0])
        out.append(Correspondence(ground_m=tuple(g), pixel=tuple(p[:2] / p[2])))
    return out


def h_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Relative Frobenius distance between homographies up to scale/sign."""
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    return min(np.linalg.norm(a - b), np.linalg.norm(a + b))


class TestHomographyType:
    def test_normalization_and_sign(self):
        h = Homography(-3.0 * np.eye(3))
        assert h.matrix[2, 2] > 0
        assert math.isclose(np.linalg.norm(h.matrix), 1.0, rel_tol=1e-12)

    def test_inverse_cached_and_consistent(self):
        rng = np.random.default_rng(0)
        h = Homography(random_homography(rng))
        np.testing.assert_allclose(h.matrix @ h.inverse, np.eye(3), atol=1e-9)

    def test_singular_rejected(self):
        m = np.ones((3, 3))
        with pytest.raises(DegenerateError):
            Homography(m)


class TestEstimateHomography:
    def test_identity_fixed_point(self):
        corrs = correspondences_from(np.eye(3), [(0, 0), (1, 0), (1, 1), (0, 1)])
        h, rms = estimate_homography(corrs)
        assert h_distance(h.matrix, np.eye(3)) < 1e-9
        np.testing.assert_allclose(h.matrix, np.eye(3) / math.sqrt(3), atol=1e-9)
        assert rms < 1e-9

    def test_exact_recovery_six_points(self):
        rng = np.random.default_rng(123)
        truth = random_homography(rng)
        ground = rng.uniform(-3, 3, (6, 2))
        h, rms = estimate_homography(correspondences_from(truth, ground))
        assert h_distance(h.matrix, truth) < 1e-8
        assert rms < 1e-6

    def test_too_few_points(self):
        corrs = correspondences_from(np.eye(3), [(0, 0), (1, 0), (1, 1)])
        with pytest.raises(DegenerateError):
            estimate_homography(corrs)

    def test_three_collinear_ground_points_degenerate(self):
        corrs = correspondences_from(np.eye(3), [(0, 0), (1, 1), (2, 2), (0, 1)])
        with pytest.raises(DegenerateError):
            estimate_homography(corrs)

    def test_scale_invariance_of_homogeneous_input(self):
        rng = np.random.default_rng(5)
        truth = random_homography(rng)
        ground = rng.uniform(-2, 2, (8, 2))
        corrs = correspondences_from(truth, ground)
        h1, _ = estimate_homography(corrs)
        # scaling the homogeneous pixel representation cancels on
        # dehomogenization; the estimate must not depend on it
        scaled = []
        for c in corrs:
            hom = np.array([*c.pixel, 1.0]) * 7.3
            scaled.append(Correspondence(c.ground_m, tuple(hom[:2] / hom[2])))
        h2, _ = estimate_homography(scaled)
        assert np.linalg.norm(h1.matrix - h2.matrix) < 1e-9

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10_000))
    def test_noise_free_recovery_property(self, seed):
        rng = np.random.default_rng(seed)
        truth = random_homography(rng)
        n = rng.integers(4, 12)
        ground = rng.uniform(-4, 4, (n, 2))
        # reject near-degenerate layouts the precondition excludes
        if n == 4:
            a, b, c, d = ground
            area = abs(np.linalg.det(np.column_stack([b - a, c - a])))
            if area < 0.5:
                return
        try:
            h, _ = estimate_homography(correspondences_from(truth, ground))
        except DegenerateError:
            return
        assert h_distance(h.matrix, truth) < 1e-8


@pytest.fixture
def overhead_calib():
    """Camera 4 m above the origin; ground (x, y) maps to pixel 100*(x, y)."""
    h = Homography(np.diag([100.0, 100.0, 1.0]))
    return ViewCalibration(view_id="v0", h_ground_to_view=h,
                           camera_position_m=(0.0, 0.0, 4.0))


class TestLifting:
    def test_identity_scaled_lift(self):
        calib = ViewCalibration("v", Homography(np.eye(3)), (0, 0, 4.0))
        np.testing.assert_allclose(lift_ground(calib, (1.0, 2.0)), [1.0, 2.0],
                                   atol=1e-12)

    def test_forward_backward(self, overhead_calib):
        px = overhead_calib.h_ground_to_view.apply((3.2, -1.1))
        np.testing.assert_allclose(lift_ground(overhead_calib, px), [3.2, -1.1],
                                   atol=1e-9)

    def test_horizon_pixel_rejected(self):
        rng = np.random.default_rng(9)
        h = Homography(random_homography(rng))
        calib = ViewCalibration("v", h, (0, 0, 4.0))
        # image of a point at infinity lies on the horizon line
        horizon_px = h.matrix @ np.array([1.0, 0.0, 0.0])
        horizon_px = horizon_px[:2] / horizon_px[2]
        with pytest.raises(HorizonError):
            lift_ground(calib, horizon_px)

    def test_zero_height_equals_lift_ground(self, overhead_calib):
        for px in [(150.0, -80.0), (10.0, 400.0), (-320.0, 7.0)]:
            np.testing.assert_allclose(
                lift_at_height(overhead_calib, px, 0.0),
                lift_ground(overhead_calib, px), atol=1e-12)

    def test_similar_triangles_against_ray_oracle(self, overhead_calib):
        # naive ground lift lands at (2, 0); the true point at height 1 m is
        # where the camera ray through (2, 0, 0) crosses z = 1
        px = overhead_calib.h_ground_to_view.apply((2.0, 0.0))
        expected = ray_plane_ground_point((0, 0, 4.0), (2.0, 0.0, 0.0), 1.0)
        np.testing.assert_allclose(expected, [1.5, 0.0], atol=1e-12)
        np.testing.assert_allclose(lift_at_height(overhead_calib, px, 1.0),
                                   expected, atol=1e-9)

    def test_height_out_of_range(self, overhead_calib):
        with pytest.raises(DomainError):
            lift_at_height(overhead_calib, (0.0, 0.0), 4.0)
        with pytest.raises(DomainError):
            lift_at_height(overhead_calib, (0.0, 0.0), -0.1)

    @settings(max_examples=50, deadline=None)
    @given(
        st.floats(-3, 3), st.floats(-3, 3),
        st.floats(0.01, 1.99),
    )
    def test_monotone_approach_to_nadir(self, gx, gy, h_max):
        calib = ViewCalibration("v", Homography(np.diag([100.0, 100.0, 1.0])),
                                (0.5, -0.25, 4.0))
        px = calib.h_ground_to_view.apply((gx, gy))
        nadir = np.array([0.5, -0.25])
        heights = np.linspace(0.0, h_max, 12)
        dists = [np.linalg.norm(lift_at_height(calib, px, h) - nadir)
                 for h in heights]
        assert all(a >= b - 1e-12 for a, b in zip(dists, dists[1:]))

    def test_projected_keypoint_round_trip(self):
        """Full chain: 3D point -> view pixel -> fitted H -> height-corrected lift."""
        cam = PanoramicCamera((0.2, -0.3, 3.5), yaw_rad=0.4,
                              pano_width_px=2048, pano_height_px=1024)
        view = RectilinearView(id="v0", pan_rad=0.1, tilt_rad=-0.9,
                               hfov_rad=math.pi / 2, width_px=1280, height_px=960)
        markers = [(0, 1.5), (1.5, 2.5), (-1.5, 2.5), (0.8, 4), (-0.8, 4),
                   (1.8, 5.5), (-1.8, 5.5), (0, 6.5)]
        corrs = []
        for g in markers:
            px = world_point_to_view_pixel(cam, view, (g[0], g[1], 0.0))
            assert px is not None
            corrs.append(Correspondence(ground_m=g, pixel=tuple(px)))
        h, rms = estimate_homography(corrs)
        assert rms < 1e-6
        calib = ViewCalibration("v0", h, cam.position_m, rms)
        rng = np.random.default_rng(11)
        for _ in range(200):
            p = np.array([rng.uniform(-1.5, 1.5), rng.uniform(1.5, 6.0),
                          rng.uniform(0.0, 1.6)])
            px = world_point_to_view_pixel(cam, view, p)
            if px is None:
                continue
            lifted = lift_at_height(calib, px, p[2])
            np.testing.assert_allclose(lifted, p[:2], atol=1e-6)


class TestBodyModel:
    def test_defaults(self):
        m = BodyModel()
        assert keypoint_height(m, "left_ankle") == 0.0
        assert keypoint_height(m, "right_ankle") == 0.0
        assert math.isclose(keypoint_height(m, "left_hip"), 0.9275)
        assert math.isclose(keypoint_height(m, "right_hip"), 0.9275)
        assert math.isclose(keypoint_height(m, "left_shoulder"), 1.435)
        assert math.isclose(keypoint_height(m, "right_shoulder"), 1.435)

    def test_unknown_keypoint(self):
        with pytest.raises(DomainError):
            keypoint_height(BodyModel(), "left_wrist")

    def test_invalid_ratios(self):
        with pytest.raises(DomainError):
            BodyModel(hip_ratio=0.9, shoulder_ratio=0.8)
        with pytest.raises(DomainError):
            BodyModel(stature_m=2.5)

    def test_camera_must_clear_shoulders(self):
        with pytest.raises(DomainError):
            ViewCalibration("v", Homography(np.eye(3)), (0, 0, 1.5))
