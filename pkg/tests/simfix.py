"""Shared scenario builders for simulator-driven tests.

Marker correspondences are generated by intersecting view-pixel rays with the
ground plane analytically, independent of the homography code under test.
"""

from __future__ import annotations

import math

import numpy as np

from birdseye.calibration import Correspondence, ViewCalibration, estimate_homography
from birdseye.geometry import (
    PanoramicCamera,
    RectilinearView,
    default_views,
    view_pixel_to_direction,
)
from birdseye.pipeline import RobotProfile
from birdseye.simulator import Actor, Scenario

CAMERA_HEIGHT = 3.0
ROBOT_PROFILE = RobotProfile(
    "cart", {"base": 0.15, "mast_top": 0.9}, base_keypoint="base")


def make_camera(height=CAMERA_HEIGHT, yaw=0.0):
    return PanoramicCamera(position_m=(0.0, 0.0, height), yaw_rad=yaw,
                           pano_width_px=3840, pano_height_px=1920)


def make_views(count=4, tilt=-0.9, width=1280, height=960):
    return tuple(default_views(count=count, hfov_rad=math.pi / 2, tilt_rad=tilt,
                               width_px=width, height_px=height))


def ground_hit(cam: PanoramicCamera, view: RectilinearView, pixel):
    """Analytic ray/ground intersection for a view pixel (None if skyward)."""
    d_cam = view_pixel_to_direction(view, pixel)
    d_world = cam.world_from_camera @ d_cam
    if d_world[2] >= -1e-9:
        return None
    t = -cam.position_m[2] / d_world[2]
    hit = np.asarray(cam.position_m) + t * d_world
    return hit[:2]


def marker_correspondences(cam, view, n_grid=3, margin=0.15):
    """Pixel-grid markers lifted to ground analytically; >= 8 per view."""
    out = []
    us = np.linspace(margin, 1 - margin, n_grid) * view.width_px
    vs = np.linspace(margin, 1 - margin, n_grid) * view.height_px
    for u in us:
        for v in vs:
            g = ground_hit(cam, view, (u, v))
            if g is None:
                continue
            out.append(Correspondence(ground_m=tuple(g), pixel=(float(u), float(v))))
    return out


def calibrate_views(cam, views, max_markers=8):
    calibs = {}
    for view in views:
        corrs = marker_correspondences(cam, view)[:max_markers]
        assert len(corrs) >= 8, f"view {view.id} sees too few ground markers"
        h, rms = estimate_homography(corrs)
        calibs[view.id] = ViewCalibration(view.id, h, cam.position_m, rms)
    return calibs


def walker(name, path, speed=1.0, start_t=0.0, cls="human", **kw):
    """Actor walking a polyline at constant speed."""
    waypoints = [(start_t, tuple(path[0]))]
    t = start_t
    for a, b in zip(path, path[1:]):
        t += math.dist(a, b) / speed
        waypoints.append((t, tuple(b)))
    if cls == "robot":
        kw.setdefault("robot_profile", ROBOT_PROFILE)
    return Actor(name=name, class_name=cls, waypoints=tuple(waypoints), **kw)


def stationary(name, pos, duration, cls="human", **kw):
    if cls == "robot":
        kw.setdefault("robot_profile", ROBOT_PROFILE)
    return Actor(name=name, class_name=cls,
                 waypoints=((0.0, tuple(pos)), (duration, tuple(pos))), **kw)


def make_scenario(actors, duration=5.0, fps=30.0, noise=0.0, occlusions=(),
                  sensors=(), camera=None, views=None):
    return Scenario(
        duration_s=duration,
        fps=fps,
        camera=camera or make_camera(),
        views=views or make_views(),
        actors=tuple(actors),
        occlusion_windows=tuple(occlusions),
        pixel_noise_px=noise,
        sensors=tuple(sensors),
    )
