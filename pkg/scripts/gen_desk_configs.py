#!/usr/bin/env python3
"""Generate the bundled desk-scale configs: rig, markers, calibration,
sensor sets, and the three demonstration scenarios.

Paths are laid out so every human actor stays inside the forward view's
wedge (full skeleton visible in one view at all times); this keeps the
noiseless localization exact, which the acceptance oracles rely on.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

from birdseye.cli import main as cli_main
from birdseye.geometry import PanoramicCamera, default_views, view_pixel_to_direction

OUT = Path(__file__).resolve().parents[1] / "src" / "birdseye" / "scenarios"

CAMERA = {
    "position_m": [0.0, 0.0, 3.0],
    "yaw_rad": 0.0,
    "pano": {"width_px": 3840, "height_px": 1920},
}
BODY = {"stature_m": 1.75, "hip_ratio": 0.53, "shoulder_ratio": 0.82}
CART = {
    "name": "cart",
    "keypoint_heights_m": {"base": 0.15, "mast_top": 0.9},
    "base_keypoint": "base",
}
HUMAN_SPEED = 1.2
ROBOT_SPEED = 0.8


def view_dicts():
    views = default_views(count=4, hfov_rad=math.pi / 2, tilt_rad=-0.9,
                          width_px=1280, height_px=960)
    return [
        {"id": v.id, "pan_rad": v.pan_rad, "tilt_rad": v.tilt_rad,
         "hfov_rad": v.hfov_rad, "width_px": v.width_px, "height_px": v.height_px}
        for v in views
    ]


def marker_files():
    """8 ground markers per view from an analytic pixel-grid ray cast."""
    cam = PanoramicCamera(tuple(CAMERA["position_m"]), CAMERA["yaw_rad"],
                          CAMERA["pano"]["width_px"], CAMERA["pano"]["height_px"])
    views = default_views(count=4, hfov_rad=math.pi / 2, tilt_rad=-0.9,
                          width_px=1280, height_px=960)
    paths = []
    for view in views:
        points = []
        for fu in (0.15, 0.5, 0.85):
            for fv in (0.15, 0.5, 0.85):
                u, v = fu * view.width_px, fv * view.height_px
                d = cam.world_from_camera @ view_pixel_to_direction(view, (u, v))
                if d[2] >= -1e-9:
                    continue
                t = -cam.position_m[2] / d[2]
                gx = cam.position_m[0] + t * d[0]
                gy = cam.position_m[1] + t * d[1]
                points.append({"ground_m": [gx, gy], "pixel": [u, v]})
        path = OUT / f"markers_{view.id}.json"
        path.write_text(json.dumps(
            {"view_id": view.id, "points": points[:8]}, indent=2) + "\n")
        paths.append(path)
    return paths


def route(start, legs, speed=HUMAN_SPEED, start_t=0.0):
    """Waypoints from ('walk', (x, y)) / ('dwell', seconds) instructions."""
    t = start_t
    pos = tuple(start)
    waypoints = [[t, list(pos)]]
    for kind, arg in legs:
        if kind == "dwell":
            t += arg
        else:
            t += math.dist(pos, arg) / speed
            pos = tuple(arg)
        waypoints.append([round(t, 6), list(pos)])
    return waypoints


def write(name, data):
    (OUT / name).write_text(json.dumps(data, indent=2) + "\n")
    print(f"wrote {OUT / name}")


def scenario(duration, actors, sensors_file, occlusions=(), fps=30.0):
    for actor in actors:  # keep everyone present until the final frame
        waypoints = actor["waypoints"]
        if waypoints[-1][0] < duration:
            waypoints.append([duration, list(waypoints[-1][1])])
    return {
        "duration_s": duration,
        "fps": fps,
        "camera": CAMERA,
        "views": view_dicts(),
        "actors": actors,
        "occlusion_windows": list(occlusions),
        "pixel_noise_px": 0.0,
        "sensors": sensors_file,
    }


def uc1():
    """Start-mat enables the robot; worker proximity drives its speed."""
    sensors = {
        "sensors": [
            {"id": "start_mat", "kind": "mat", "classes": ["human"],
             "polygon_m": [[-1.5, 2.2], [-0.5, 2.2], [-0.5, 3.0], [-1.5, 3.0]],
             "debounce_on_s": 0.1, "debounce_off_s": 0.25},
            {"id": "robot_prox", "kind": "proximity", "classes": ["human"],
             "anchor": {"dynamic": {"class": "robot"}},
             "levels_m": [3.0, 1.5, 0.7], "hysteresis_m": 0.15},
        ],
        "reactions": [
            {"sensor_id": "start_mat", "type": "enter",
             "reaction": {"set_flag": "robot_enabled", "log": True}},
            {"sensor_id": "robot_prox", "type": "proximity_level",
             "reaction": {"robot_speed_from_level": True}},
        ],
    }
    write("uc1_sensors.json", sensors)
    worker = route((-2.1, 2.6), [
        ("dwell", 0.5),
        ("walk", (-1.0, 2.6)),   # onto the start mat (enables robot)
        ("dwell", 1.2),
        ("walk", (0.75, 2.9)),   # approach the robot: levels 2, 3
        ("dwell", 0.8),
        ("walk", (-2.1, 2.6)),   # retreat: levels release with hysteresis
        ("dwell", 0.6),
    ])
    robot = [[0.0, [1.2, 3.2]], [8.0, [1.2, 3.2]]]
    write("uc1.json", scenario(8.0, [
        {"name": "worker", "class": "human", "waypoints": worker},
        {"name": "cart1", "class": "robot", "waypoints": robot,
         "robot_profile": CART},
    ], "uc1_sensors.json"))


def uc2():
    """Mats react to people only; the robot drives straight through one."""
    sensors = {
        "sensors": [
            {"id": "mat_a", "kind": "mat", "classes": ["human"],
             "polygon_m": [[-1.6, 2.2], [-0.6, 2.2], [-0.6, 3.0], [-1.6, 3.0]]},
            {"id": "mat_b", "kind": "mat", "classes": ["human"],
             "polygon_m": [[0.6, 2.2], [1.6, 2.2], [1.6, 3.0], [0.6, 3.0]]},
            {"id": "b_gate", "kind": "barrier", "classes": ["human"],
             "a_m": [-0.1, 1.8], "b_m": [-0.1, 3.4]},
        ],
    }
    write("uc2_sensors.json", sensors)
    visitor = route((-2.0, 3.2), [
        ("dwell", 0.4),
        ("walk", (-1.1, 2.6)),   # into mat_a
        ("dwell", 1.0),
        ("walk", (1.1, 2.6)),    # across the barrier into mat_b
        ("dwell", 1.0),
        ("walk", (2.0, 3.4)),    # leave everything
        ("dwell", 0.5),
    ])
    bystander = [[0.0, [0.3, 4.2]], [9.0, [0.3, 4.2]]]
    robot = route((1.1, 1.2), [
        ("dwell", 1.0),
        ("walk", (1.1, 3.6)),    # straight through mat_b: must stay silent
        ("dwell", 2.0),
    ], speed=ROBOT_SPEED)
    # both ankles occluded while the visitor dwells on mat_a
    occlusion = [{"actor": "visitor",
                  "keypoints": ["left_ankle", "right_ankle"],
                  "t_start": 1.6, "t_end": 2.6}]
    write("uc2.json", scenario(9.0, [
        {"name": "visitor", "class": "human", "waypoints": visitor},
        {"name": "bystander", "class": "human", "waypoints": bystander},
        {"name": "cart1", "class": "robot", "waypoints": robot,
         "robot_profile": CART},
    ], "uc2_sensors.json", occlusions=occlusion))


def uc3():
    """Teach-by-demonstration: walk a loop, then re-enter the taught region."""
    write("uc3_sensors.json", {"sensors": []})
    walker = route((-0.5, 2.0), [
        ("dwell", 0.7),          # get tracked; teach_start at frame 10
        ("walk", (0.7, 2.0)),    # trace the rectangle
        ("walk", (0.7, 3.0)),
        ("walk", (-0.5, 3.0)),
        ("walk", (-0.5, 2.0)),
        ("dwell", 0.5),          # teach_stop at frame 140
        ("walk", (-1.6, 3.4)),   # step out
        ("dwell", 0.8),
        ("walk", (0.1, 2.5)),    # re-enter the taught region
        ("dwell", 1.2),
        ("walk", (-1.6, 3.4)),   # and leave it again
        ("dwell", 0.4),
    ])
    write("uc3.json", scenario(12.0, [
        {"name": "teacher", "class": "human", "waypoints": walker},
    ], "uc3_sensors.json"))
    write("uc3_commands.json", [
        {"at_frame": 10, "cmd": {"cmd": "teach_start", "entity_id": 1}},
        {"at_frame": 140, "cmd": {"cmd": "teach_stop", "sensor_id": "taught1"}},
    ])


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    write("desk_rig.json", {
        "camera": CAMERA,
        "body_model": BODY,
        "robot_profiles": [CART],
        "views": view_dicts(),
    })
    markers = marker_files()
    args = ["calibrate", "--rig", str(OUT / "desk_rig.json"),
            "--out", str(OUT / "desk_calib.json")]
    for path in markers:
        args += ["--points", str(path)]
    assert cli_main(args) == 0
    uc1()
    uc2()
    uc3()


if __name__ == "__main__":
    main()
