"""Equirectangular camera model and rectilinear view synthesis as coordinate maps.

COORDINATE CONVENTIONS
======================
World frame (right-handed):
  - x: east, y: north, z: up; ground plane is z = 0.

Camera frame (right-handed, computer-vision style):
  - x: right, y: down, z: forward.
  - At ``yaw_rad = 0`` the camera forward axis (+z) points along world +y,
    camera +x along world +x, and camera +y along world -z.
  - ``yaw_rad`` rotates the whole camera frame about the world z axis.

Panorama pixels:
  - u grows with longitude (atan2(x, z) in the camera frame), v grows
    downward from the zenith; the image spans the full sphere, so
    ``pano_width_px == 2 * pano_height_px``.

Rectilinear views:
  - Pinhole model with focal length derived from the horizontal FOV.
  - A view is oriented inside the camera frame by ``R_y(pan) @ R_x(tilt)``
    (rotations about the camera y and x axes). Negative tilt looks down.

Angles are radians everywhere. All functions are pure; no image resampling
happens here, only pixel/direction coordinate mappings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

# Pole rows of the panorama have undefined longitude; we pin it to 0 there.
_POLE_EPS = 1e-12

# View-frame points with z below this are "behind" the view plane.
BEHIND_EPS = 1e-9

# Camera-to-world rotation at yaw 0: maps camera (right, down, forward)
# onto world (east, -up, north).
_R_CAM0 = np.array([
    [1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0],
    [0.0, -1.0, 0.0],
])


def _rot_z(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _rot_y(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def _rot_x(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


@dataclass(frozen=True)
class PanoramicCamera:
    """Full-sphere equirectangular camera mounted above the ground plane."""

    position_m: tuple[float, float, float]
    yaw_rad: float
    pano_width_px: int
    pano_height_px: int

    def __post_init__(self):
        if self.pano_width_px <= 0 or self.pano_height_px <= 0:
            raise DomainError("panorama dimensions must be positive")
        if self.pano_width_px != 2 * self.pano_height_px:
            raise DomainError(
                f"equirectangular panorama requires width == 2*height, "
                f"got {self.pano_width_px}x{self.pano_height_px}"
            )
        if self.position_m[2] <= 0:
            raise DomainError("camera must sit strictly above the ground plane")

    @property
    def world_from_camera(self) -> np.ndarray:
        """Rotation taking camera-frame vectors to world-frame vectors."""
        return _rot_z(self.yaw_rad) @ _R_CAM0

    def world_to_camera_dir(self, p_world) -> np.ndarray:
        """Unit camera-frame direction from the camera center to a world point."""
        d = np.asarray(p_world, dtype=float) - np.asarray(self.position_m, dtype=float)
        n = np.linalg.norm(d)
        if n < 1e-12:
            raise DomainError("point coincides with the camera center")
        return self.world_from_camera.T @ (d / n)


@dataclass(frozen=True)
class RectilinearView:
    """Pinhole view cut out of the panorama; straight world lines stay straight."""

    id: str
    pan_rad: float
    tilt_rad: float
    hfov_rad: float
    width_px: int
    height_px: int
    # camera-frame rotation of the view, cached because every mapping uses it
    _rot: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not -math.pi <= self.pan_rad < math.pi:
            raise DomainError("pan_rad must lie in [-pi, pi)")
        if not -math.pi / 2 < self.tilt_rad < math.pi / 2:
            raise DomainError("tilt_rad must lie in (-pi/2, pi/2)")
        if not 0 < self.hfov_rad < math.pi:
            raise DomainError("hfov_rad must lie in (0, pi)")
        if self.width_px <= 0 or self.height_px <= 0:
            raise DomainError("view dimensions must be positive")
        if not math.isfinite(self.focal_px) or self.focal_px <= 0:
            raise DomainError("focal length is not finite and positive")
        object.__setattr__(self, "_rot", _rot_y(self.pan_rad) @ _rot_x(self.tilt_rad))

    @property
    def focal_px(self) -> float:
        return (self.width_px / 2.0) / math.tan(self.hfov_rad / 2.0)

    @property
    def rotation(self) -> np.ndarray:
        """Camera-frame rotation of the view axes (pan about y, then tilt about x)."""
        return self._rot


def default_views(count: int = 4, hfov_rad: float = math.pi / 2,
                  tilt_rad: float = 0.0, width_px: int = 1280,
                  height_px: int = 960) -> list[RectilinearView]:
    """Evenly panned ring of views covering the horizon (default 4 x 90 deg)."""
    pans = [math.remainder(i * 2 * math.pi / count, 2 * math.pi) for i in range(count)]
    pans = [p if p < math.pi else p - 2 * math.pi for p in pans]
    return [
        RectilinearView(id=f"v{i}", pan_rad=pans[i], tilt_rad=tilt_rad,
                        hfov_rad=hfov_rad, width_px=width_px, height_px=height_px)
        for i in range(count)
    ]


def pano_pixel_to_direction(cam: PanoramicCamera, px) -> np.ndarray:
    """Camera-frame unit direction seen at an equirectangular pixel.

    Longitude lam = (u/W - 1/2) * 2*pi, latitude phi = (1/2 - v/H) * pi,
    direction = (cos phi sin lam, -sin phi, cos phi cos lam).
    """
    u, v = float(px[0]), float(px[1])
    w, h = cam.pano_width_px, cam.pano_height_px
    if not (0 <= u < w) or not (0 <= v <= h):
        raise DomainError(f"pano pixel ({u}, {v}) outside {w}x{h} panorama")
    lam = (u / w - 0.5) * 2.0 * math.pi
    phi = (0.5 - v / h) * math.pi
    cp = math.cos(phi)
    return np.array([cp * math.sin(lam), -math.sin(phi), cp * math.cos(lam)])


def direction_to_pano_pixel(cam: PanoramicCamera, d) -> np.ndarray:
    """Equirectangular pixel looking along a camera-frame unit direction.

    At the poles longitude is undefined and pinned to 0 (u = W/2).
    """
    d = np.asarray(d, dtype=float)
    n = np.linalg.norm(d)
    if n < 1e-12:
        raise DomainError("zero direction vector")
    if abs(n - 1.0) > 1e-6:
        raise DomainError(f"direction must be unit length, |d| = {n}")
    d = d / n
    w, h = cam.pano_width_px, cam.pano_height_px
    if 1.0 - abs(d[1]) < _POLE_EPS:
        lam = 0.0
    else:
        lam = math.atan2(d[0], d[2])
    phi = -math.asin(max(-1.0, min(1.0, d[1])))
    u = (lam / (2.0 * math.pi) + 0.5) * w
    v = (0.5 - phi / math.pi) * h
    if u >= w:  # lam == pi wraps to the seam at u = 0
        u -= w
    return np.array([u, v])


def view_pixel_to_direction(view: RectilinearView, px) -> np.ndarray:
    """Camera-frame unit direction through a view pixel (pinhole ray)."""
    u, v = float(px[0]), float(px[1])
    ray = np.array([u - view.width_px / 2.0, v - view.height_px / 2.0, view.focal_px])
    ray /= np.linalg.norm(ray)
    return view.rotation @ ray


def world_point_to_view_pixel(cam: PanoramicCamera, view: RectilinearView,
                              p_world) -> np.ndarray | None:
    """Project a world point into a view; None when it falls behind the view."""
    p = np.asarray(p_world, dtype=float)
    c = np.asarray(cam.position_m, dtype=float)
    d = p - c
    if np.linalg.norm(d) < 1e-12:
        raise DomainError("point coincides with the camera center")
    d_cam = cam.world_from_camera.T @ d
    d_view = view.rotation.T @ d_cam
    if d_view[2] <= BEHIND_EPS:
        return None
    f = view.focal_px
    return np.array([
        view.width_px / 2.0 + f * d_view[0] / d_view[2],
        view.height_px / 2.0 + f * d_view[1] / d_view[2],
    ])


def view_to_pano_pixel(cam: PanoramicCamera, view: RectilinearView, px) -> np.ndarray:
    """Pano pixel backing a view pixel (coordinate resampling map only)."""
    return direction_to_pano_pixel(cam, view_pixel_to_direction(view, px))
