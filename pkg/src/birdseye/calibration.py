"""Ground-plane homography estimation and metric lifting of keypoints.

A single homography H maps homogeneous ground coordinates (x, y, 1) in meters
to homogeneous view pixels (u, v, w). Keypoints that are not on the ground
(hips, shoulders) are first lifted through H**-1 as if they were, then pulled
back toward the camera's nadir by similar triangles using the keypoint's
statistical height, which recovers their true planimetric position.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateError, DomainError, HorizonError

logger = logging.getLogger(__name__)

# Tallest keypoint we ever lift: shoulder height of the tallest supported
# stature. The camera must clear it for height correction to be well posed.
MAX_KEYPOINT_HEIGHT_M = 2.2 * 0.82

_W_EPS = 1e-9  # homogeneous w below this means "at the horizon"


class Homography:
    """Invertible 3x3 projective map, normalized for deterministic storage.

    The stored matrix has unit Frobenius norm and a non-negative lower-right
    entry (falling back to the first nonzero entry of the last row when that
    entry vanishes). The inverse is computed once and cached.
    """

    __slots__ = ("matrix", "inverse")

    def __init__(self, matrix):
        m = np.asarray(matrix, dtype=float)
        if m.shape != (3, 3):
            raise DomainError(f"homography must be 3x3, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise DomainError("homography contains non-finite entries")
        norm = np.linalg.norm(m)
        if norm < 1e-12:
            raise DegenerateError("homography is numerically zero")
        m = m / norm
        sign_ref = m[2, 2]
        if abs(sign_ref) < 1e-12:
            nz = np.nonzero(np.abs(m[2]) >= 1e-12)[0]
            sign_ref = m[2, nz[0]] if len(nz) else 1.0
        if sign_ref < 0:
            m = -m
        det = np.linalg.det(m)
        if abs(det) <= 1e-12:
            raise DegenerateError(f"homography is singular (|det| = {abs(det):.3e})")
        self.matrix = m
        self.inverse = np.linalg.inv(m)

    def apply(self, point, inverse: bool = False) -> np.ndarray:
        """Map a 2-vector through H (or H**-1), dehomogenizing the result."""
        m = self.inverse if inverse else self.matrix
        v = m @ np.array([point[0], point[1], 1.0])
        if abs(v[2]) <= _W_EPS:
            raise HorizonError(f"point {tuple(point)} maps to the line at infinity")
        return v[:2] / v[2]

    def __repr__(self):
        return f"Homography({self.matrix.tolist()})"


@dataclass(frozen=True)
class Correspondence:
    """One calibration observation: a surveyed ground point and its pixel."""

    ground_m: tuple[float, float]
    pixel: tuple[float, float]

    def __post_init__(self):
        vals = (*self.ground_m, *self.pixel)
        if not all(math.isfinite(v) for v in vals):
            raise DomainError("correspondence contains non-finite values")


@dataclass(frozen=True)
class BodyModel:
    """Upright body proportions for mapping keypoint pixels to heights."""

    stature_m: float = 1.75
    ankle_ratio: float = 0.0
    hip_ratio: float = 0.53
    shoulder_ratio: float = 0.82

    def __post_init__(self):
        if self.ankle_ratio != 0.0:
            raise DomainError("ankle_ratio must be 0 (ankles define the ground)")
        if not 0.0 < self.hip_ratio < self.shoulder_ratio < 1.0:
            raise DomainError("require 0 < hip_ratio < shoulder_ratio < 1")
        if not 1.0 <= self.stature_m <= 2.2:
            raise DomainError("stature_m must lie in [1.0, 2.2]")


_KEYPOINT_BANDS = {
    "left_ankle": "ankle_ratio",
    "right_ankle": "ankle_ratio",
    "left_hip": "hip_ratio",
    "right_hip": "hip_ratio",
    "left_shoulder": "shoulder_ratio",
    "right_shoulder": "shoulder_ratio",
}

HUMAN_KEYPOINTS = tuple(_KEYPOINT_BANDS)


def keypoint_height(model: BodyModel, keypoint_name: str) -> float:
    """Height above ground of a named human keypoint under the body model."""
    try:
        band = _KEYPOINT_BANDS[keypoint_name]
    except KeyError:
        raise DomainError(f"unknown human keypoint {keypoint_name!r}") from None
    return model.stature_m * getattr(model, band)


@dataclass(frozen=True)
class ViewCalibration:
    """Everything needed to lift pixels of one view to metric ground space."""

    view_id: str
    h_ground_to_view: Homography
    camera_position_m: tuple[float, float, float]
    rms_reprojection_px: float = 0.0
    _nadir: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.camera_position_m[2] <= MAX_KEYPOINT_HEIGHT_M:
            raise DomainError(
                f"camera height {self.camera_position_m[2]} m does not clear the "
                f"tallest mapped keypoint ({MAX_KEYPOINT_HEIGHT_M:.3f} m)"
            )
        object.__setattr__(self, "_nadir",
                           np.array(self.camera_position_m[:2], dtype=float))

    @property
    def camera_height_m(self) -> float:
        return self.camera_position_m[2]


def _hartley_normalization(points: np.ndarray) -> np.ndarray:
    """Similarity transform moving the centroid to 0 and mean radius to sqrt(2)."""
    centroid = points.mean(axis=0)
    radii = np.linalg.norm(points - centroid, axis=1)
    mean_radius = radii.mean()
    if mean_radius < 1e-12:
        raise DegenerateError("all points coincide; cannot normalize")
    s = math.sqrt(2.0) / mean_radius
    return np.array([
        [s, 0.0, -s * centroid[0]],
        [0.0, s, -s * centroid[1]],
        [0.0, 0.0, 1.0],
    ])


def estimate_homography(
    correspondences: list[Correspondence],
) -> tuple[Homography, float]:
    """Fit the ground-to-view homography by normalized DLT.

    Both point sets are Hartley-normalized, the 2n x 9 design matrix is solved
    for its least-singular-value direction, and the result is denormalized and
    brought into canonical form. Returns the homography together with the RMS
    reprojection error of the correspondences in pixels.

    Raises DegenerateError when fewer than 4 correspondences are given or the
    configuration does not determine a homography (e.g. 3 collinear ground
    points among 4).
    """
    n = len(correspondences)
    if n < 4:
        raise DegenerateError(f"need at least 4 correspondences, got {n}")
    ground = np.array([c.ground_m for c in correspondences], dtype=float)
    pixels = np.array([c.pixel for c in correspondences], dtype=float)

    t_g = _hartley_normalization(ground)
    t_p = _hartley_normalization(pixels)
    g_h = np.column_stack([ground, np.ones(n)]) @ t_g.T
    p_h = np.column_stack([pixels, np.ones(n)]) @ t_p.T

    a = np.zeros((2 * n, 9))
    for i in range(n):
        x = g_h[i]
        u, v, w = p_h[i]
        a[2 * i, 3:6] = -w * x
        a[2 * i, 6:9] = v * x
        a[2 * i + 1, 0:3] = w * x
        a[2 * i + 1, 6:9] = -u * x

    _, sing, vt = np.linalg.svd(a)
    sing = np.concatenate([sing, np.zeros(9 - len(sing))])
    rank = int(np.sum(sing > sing[0] * 1e-9))
    if rank < 8:
        raise DegenerateError(
            f"degenerate correspondence configuration (design rank {rank} < 8)"
        )
    ratio = sing[7] / max(sing[8], np.finfo(float).tiny)
    if ratio < 1e3:
        logger.warning(
            "homography poorly constrained: singular value ratio %.1f < 1e3", ratio
        )

    h_norm = vt[-1].reshape(3, 3)
    h = Homography(np.linalg.inv(t_p) @ h_norm @ t_g)

    projected = np.array([h.apply(g) for g in ground])
    rms = float(np.sqrt(np.mean(np.sum((projected - pixels) ** 2, axis=1))))
    return h, rms


def lift_ground(calib: ViewCalibration, pixel) -> np.ndarray:
    """Metric ground point imaged at a pixel, assuming it lies on z = 0."""
    return calib.h_ground_to_view.apply(pixel, inverse=True)


def lift_at_height(calib: ViewCalibration, pixel, h_m: float) -> np.ndarray:
    """Planimetric position of a keypoint at height ``h_m`` seen at ``pixel``.

    The naive ground lift g of an elevated point overshoots away from the
    camera; the true position lies on the segment from the camera's nadir
    to g at fraction (z_C - h) / z_C (similar triangles about the nadir).
    """
    z_c = calib.camera_height_m
    if not 0.0 <= h_m < z_c:
        raise DomainError(f"keypoint height {h_m} m outside [0, camera height {z_c} m)")
    g = lift_ground(calib, pixel)
    return calib._nadir + (g - calib._nadir) * ((z_c - h_m) / z_c)
