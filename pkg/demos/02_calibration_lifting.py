"""
Ground calibration and metric lifting
=====================================

Eight surveyed ground markers per view are enough to fit the ground-to-view
homography. Ankle pixels lift straight through the inverse homography; hip
and shoulder pixels are corrected by similar triangles about the camera's
nadir using the body model's statistical heights.
"""

import math

import numpy as np

from birdseye import (
    BodyModel,
    Correspondence,
    PanoramicCamera,
    RectilinearView,
    ViewCalibration,
    estimate_homography,
    keypoint_height,
    lift_at_height,
    lift_ground,
    world_point_to_view_pixel,
)

cam = PanoramicCamera((0.0, 0.0, 3.0), 0.0, 3840, 1920)
view = RectilinearView(id="v0", pan_rad=0.0, tilt_rad=-0.9,
                       hfov_rad=math.pi / 2, width_px=1280, height_px=960)

# surveyed markers: known ground points and where they appear in the view
markers = [(-1.5, 1.8), (0.0, 1.5), (1.5, 1.8), (-1.0, 3.0),
           (1.0, 3.0), (-1.8, 4.5), (0.0, 5.2), (1.8, 4.5)]
corrs = []
for g in markers:
    px = world_point_to_view_pixel(cam, view, (g[0], g[1], 0.0))
    corrs.append(Correspondence(ground_m=g, pixel=tuple(px)))

h, rms = estimate_homography(corrs)
calib = ViewCalibration("v0", h, cam.position_m, rms)
print(f"fitted homography, rms reprojection {rms:.2e} px")

# a foot pixel lifts directly to the ground plane
foot_px = world_point_to_view_pixel(cam, view, (0.8, 2.6, 0.0))
print("ankle pixel lifts to", np.round(lift_ground(calib, foot_px), 4))

# a shoulder pixel lifted naively overshoots; height correction fixes it
body = BodyModel()
h_shoulder = keypoint_height(body, "left_shoulder")
shoulder_px = world_point_to_view_pixel(cam, view, (0.8, 2.6, h_shoulder))
naive = lift_ground(calib, shoulder_px)
corrected = lift_at_height(calib, shoulder_px, h_shoulder)
print(f"shoulder pixel: naive ground lift {np.round(naive, 3)}, "
      f"height-corrected {np.round(corrected, 4)} (truth (0.8, 2.6))")
