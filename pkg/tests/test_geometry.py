import math

import numpy as np
import pytest

from birdseye.errors import DomainError
from birdseye.geometry import (
    PanoramicCamera,
    RectilinearView,
    default_views,
    direction_to_pano_pixel,
    pano_pixel_to_direction,
    view_pixel_to_direction,
    view_to_pano_pixel,
    world_point_to_view_pixel,
)

W, H = 3840, 1920


@pytest.fixture
def cam():
    return PanoramicCamera(position_m=(0.0, 0.0, 4.0), yaw_rad=0.0,
                           pano_width_px=W, pano_height_px=H)


def make_view(pan=0.0, tilt=0.0, hfov=math.pi / 2, w=1280, h=960):
    return RectilinearView(id="v", pan_rad=pan, tilt_rad=tilt, hfov_rad=hfov,
                           width_px=w, height_px=h)


class TestPanoramicCamera:
    def test_rejects_non_equirectangular_aspect(self):
        with pytest.raises(DomainError):
            PanoramicCamera((0, 0, 3), 0.0, 1000, 800)

    def test_rejects_camera_on_or_below_ground(self):
        with pytest.raises(DomainError):
            PanoramicCamera((0, 0, 0.0), 0.0, W, H)

    def test_yaw_zero_axes(self, cam):
        R = cam.world_from_camera
        np.testing.assert_allclose(R @ [0, 0, 1], [0, 1, 0], atol=1e-12)  # fwd -> north
        np.testing.assert_allclose(R @ [1, 0, 0], [1, 0, 0], atol=1e-12)  # right -> east
        np.testing.assert_allclose(R @ [0, 1, 0], [0, 0, -1], atol=1e-12)  # down -> -up


class TestPanoPixelMapping:
    def test_center_looks_forward(self, cam):
        d = pano_pixel_to_direction(cam, (W / 2, H / 2))
        np.testing.assert_allclose(d, [0, 0, 1], atol=1e-12)

    def test_top_row_is_zenith(self, cam):
        d = pano_pixel_to_direction(cam, (W / 2, 0))
        np.testing.assert_allclose(d, [0, -1, 0], atol=1e-12)

    def test_quarter_turn_longitude(self, cam):
        # lam = (3/4 - 1/2)*2pi = pi/2 -> (sin, 0, cos) = (1, 0, 0)
        d = pano_pixel_to_direction(cam, (3 * W / 4, H / 2))
        np.testing.assert_allclose(d, [1, 0, 0], atol=1e-12)

    def test_out_of_range_pixel_rejected(self, cam):
        with pytest.raises(DomainError):
            pano_pixel_to_direction(cam, (W, H / 2))
        with pytest.raises(DomainError):
            pano_pixel_to_direction(cam, (-1, 0))

    def test_inverse_center_and_pole(self, cam):
        np.testing.assert_allclose(direction_to_pano_pixel(cam, (0, 0, 1)),
                                   [W / 2, H / 2], atol=1e-9)
        # pole convention: longitude pinned to 0
        np.testing.assert_allclose(direction_to_pano_pixel(cam, (0, -1, 0)),
                                   [W / 2, 0], atol=1e-9)

    def test_zero_vector_rejected(self, cam):
        with pytest.raises(DomainError):
            direction_to_pano_pixel(cam, (0, 0, 0))

    def test_round_trip_random_directions(self, cam):
        rng = np.random.default_rng(42)
        n = 1000
        # stay clear of the poles where longitude degenerates
        phi = rng.uniform(-math.pi / 2 + 1e-3, math.pi / 2 - 1e-3, n)
        lam = rng.uniform(-math.pi, math.pi, n)
        for p, l in zip(phi, lam):
            d = np.array([math.cos(p) * math.sin(l), -math.sin(p),
                          math.cos(p) * math.cos(l)])
            px = direction_to_pano_pixel(cam, d)
            back = pano_pixel_to_direction(cam, px)
            np.testing.assert_allclose(back, d, atol=1e-9)


class TestViewPixelMapping:
    def test_center_pixel_is_view_axis(self):
        view = make_view()
        d = view_pixel_to_direction(view, (view.width_px / 2, view.height_px / 2))
        np.testing.assert_allclose(d, [0, 0, 1], atol=1e-12)

    def test_pan_quarter_turn(self):
        # R_y(pi/2) applied to (0,0,1) gives (1,0,0)
        view = make_view(pan=math.pi / 2)
        d = view_pixel_to_direction(view, (view.width_px / 2, view.height_px / 2))
        np.testing.assert_allclose(d, [1, 0, 0], atol=1e-12)

    def test_negative_tilt_looks_down(self):
        view = make_view(tilt=-0.5)
        d = view_pixel_to_direction(view, (view.width_px / 2, view.height_px / 2))
        assert d[1] > 0  # camera y is down

    def test_collinear_pixels_give_coplanar_directions(self):
        view = make_view(pan=0.3, tilt=-0.4)
        pixels = [(100.0, 200.0), (400.0, 350.0), (700.0, 500.0)]  # collinear
        dirs = [view_pixel_to_direction(view, p) for p in pixels]
        assert abs(np.linalg.det(np.stack(dirs))) < 1e-9

    def test_invalid_view_parameters(self):
        with pytest.raises(DomainError):
            make_view(hfov=math.pi)
        with pytest.raises(DomainError):
            make_view(tilt=math.pi / 2)
        with pytest.raises(DomainError):
            make_view(pan=math.pi)


class TestWorldProjection:
    def test_point_on_view_axis_hits_center(self, cam):
        # yaw 0, pan 0, tilt 0 looks along world +y
        view = make_view()
        px = world_point_to_view_pixel(cam, view, (0.0, 10.0, 4.0))
        np.testing.assert_allclose(px, [view.width_px / 2, view.height_px / 2],
                                   atol=1e-9)

    def test_behind_view_marker(self, cam):
        view = make_view()
        assert world_point_to_view_pixel(cam, view, (0.0, -5.0, 4.0)) is None

    def test_camera_center_rejected(self, cam):
        with pytest.raises(DomainError):
            world_point_to_view_pixel(cam, make_view(), (0.0, 0.0, 4.0))

    def test_projection_round_trip_random_points(self, cam):
        rng = np.random.default_rng(7)
        view = make_view(pan=0.2, tilt=-0.7)
        checked = 0
        while checked < 1000:
            p = np.array([rng.uniform(-6, 6), rng.uniform(0.5, 10), rng.uniform(0, 3)])
            px = world_point_to_view_pixel(cam, view, p)
            if px is None:
                continue
            d = view_pixel_to_direction(view, px)
            expected = cam.world_to_camera_dir(p)
            np.testing.assert_allclose(d, expected, atol=1e-9)
            checked += 1

    def test_line_preservation(self, cam):
        view = make_view(pan=0.1, tilt=-0.6)
        rng = np.random.default_rng(3)
        for _ in range(50):
            a = np.array([rng.uniform(-2, 2), rng.uniform(2, 6), rng.uniform(0, 2)])
            b = np.array([rng.uniform(-2, 2), rng.uniform(2, 6), rng.uniform(0, 2)])
            pts = [a, a + 0.37 * (b - a), b]
            pix = [world_point_to_view_pixel(cam, view, p) for p in pts]
            if any(p is None for p in pix):
                continue
            p0, p1, p2 = pix
            line = p2 - p0
            n = np.linalg.norm(line)
            if n < 1e-9:
                continue
            # perpendicular distance of the middle pixel from the end-to-end line
            u = line / n
            w01 = p1 - p0
            dist = abs(u[0] * w01[1] - u[1] * w01[0])
            assert dist < 1e-6


class TestComposition:
    def test_view_center_maps_to_pano_center(self, cam):
        view = make_view()
        px = view_to_pano_pixel(cam, view, (view.width_px / 2, view.height_px / 2))
        np.testing.assert_allclose(px, [W / 2, H / 2], atol=1e-9)

    def test_view_center_pan_quarter(self, cam):
        view = make_view(pan=math.pi / 2)
        px = view_to_pano_pixel(cam, view, (view.width_px / 2, view.height_px / 2))
        np.testing.assert_allclose(px, [3 * W / 4, H / 2], atol=1e-9)

    def test_all_view_pixels_map_to_finite_pano_pixels(self, cam):
        view = make_view(pan=-2.0, tilt=0.4)
        for u in np.linspace(0, view.width_px - 1, 9):
            for v in np.linspace(0, view.height_px - 1, 9):
                px = view_to_pano_pixel(cam, view, (u, v))
                assert np.all(np.isfinite(px))
                assert 0 <= px[0] < W and 0 <= px[1] <= H


def test_default_views_cover_ring():
    views = default_views()
    assert len(views) == 4
    assert {v.id for v in views} == {"v0", "v1", "v2", "v3"}
    pans = sorted(v.pan_rad for v in views)
    assert all(-math.pi <= p < math.pi for p in pans)
    gaps = np.diff(pans + [pans[0] + 2 * math.pi])
    np.testing.assert_allclose(gaps, math.pi / 2, atol=1e-12)
