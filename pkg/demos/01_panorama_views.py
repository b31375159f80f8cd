"""
Panoramic camera model and rectilinear views
============================================

A full-sphere equirectangular camera hangs 3 m above the origin. Four
pinhole views are cut out of it; every mapping here is a pure coordinate
transform (no pixels are resampled).
"""

import math

import numpy as np

from birdseye import (
    PanoramicCamera,
    default_views,
    direction_to_pano_pixel,
    pano_pixel_to_direction,
    view_to_pano_pixel,
    world_point_to_view_pixel,
)

cam = PanoramicCamera(position_m=(0.0, 0.0, 3.0), yaw_rad=0.0,
                      pano_width_px=3840, pano_height_px=1920)
views = default_views(count=4, hfov_rad=math.pi / 2, tilt_rad=-0.9,
                      width_px=1280, height_px=960)

# the pano center looks along camera-forward (world north at yaw 0)
center = (cam.pano_width_px / 2, cam.pano_height_px / 2)
print("pano center direction:", pano_pixel_to_direction(cam, center))

# directions round-trip through the pano mapping
d = np.array([0.3, -0.4, 0.866])
d /= np.linalg.norm(d)
px = direction_to_pano_pixel(cam, d)
print(f"direction {d.round(3)} -> pano pixel {px.round(1)} -> "
      f"{pano_pixel_to_direction(cam, px).round(3)}")

# each view's center pixel corresponds to a pano pixel on its pan heading
for view in views:
    pano_px = view_to_pano_pixel(cam, view, (view.width_px / 2,
                                             view.height_px / 2))
    print(f"view {view.id} (pan {math.degrees(view.pan_rad):6.1f} deg) "
          f"center -> pano {np.round(pano_px, 1)}")

# project a person-height point standing 2.5 m north of the camera
p = (0.0, 2.5, 1.435)
for view in views:
    px = world_point_to_view_pixel(cam, view, p)
    status = "behind" if px is None else f"({px[0]:7.1f}, {px[1]:7.1f})"
    print(f"shoulder point in {view.id}: {status}")
