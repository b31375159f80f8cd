"""JSON (de)serialization for calibration, sensor, and scenario files."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .calibration import BodyModel, Correspondence, Homography, ViewCalibration
from .errors import ConfigError
from .geometry import PanoramicCamera, RectilinearView
from .pipeline import RobotProfile
from .sensors import (
    BarrierGeometry,
    MatGeometry,
    OrientedMatGeometry,
    ProximityGeometry,
    VirtualSensor,
    polygon_signed_area,
)


@dataclass(frozen=True)
class ReactionBinding:
    """Maps (sensor id, event type) to a declarative reaction descriptor."""

    sensor_id: str
    event_type: str
    reaction: dict

    _KNOWN = ("log", "set_flag", "robot_speed_from_level")

    def __post_init__(self):
        if not any(k in self.reaction for k in self._KNOWN):
            raise ConfigError(
                f"reaction for {self.sensor_id!r} names none of {self._KNOWN}")


@dataclass
class CalibrationSet:
    camera: PanoramicCamera
    body_model: BodyModel
    robot_profiles: list[RobotProfile]
    views: dict[str, RectilinearView]
    calibrations: dict[str, ViewCalibration]


def _require(obj: dict, key: str, context: str):
    if key not in obj:
        raise ConfigError(f"{context}: missing key {key!r}")
    return obj[key]


def camera_from_dict(d: dict) -> PanoramicCamera:
    pano = _require(d, "pano", "camera")
    return PanoramicCamera(
        position_m=tuple(_require(d, "position_m", "camera")),
        yaw_rad=float(d.get("yaw_rad", 0.0)),
        pano_width_px=int(_require(pano, "width_px", "camera.pano")),
        pano_height_px=int(_require(pano, "height_px", "camera.pano")),
    )


def camera_to_dict(cam: PanoramicCamera) -> dict:
    return {
        "position_m": list(cam.position_m),
        "yaw_rad": cam.yaw_rad,
        "pano": {"width_px": cam.pano_width_px, "height_px": cam.pano_height_px},
    }


def view_from_dict(d: dict) -> RectilinearView:
    return RectilinearView(
        id=str(_require(d, "id", "view")),
        pan_rad=float(_require(d, "pan_rad", "view")),
        tilt_rad=float(_require(d, "tilt_rad", "view")),
        hfov_rad=float(_require(d, "hfov_rad", "view")),
        width_px=int(_require(d, "width_px", "view")),
        height_px=int(_require(d, "height_px", "view")),
    )


def view_to_dict(view: RectilinearView) -> dict:
    return {
        "id": view.id,
        "pan_rad": view.pan_rad,
        "tilt_rad": view.tilt_rad,
        "hfov_rad": view.hfov_rad,
        "width_px": view.width_px,
        "height_px": view.height_px,
    }


def robot_profile_from_dict(d: dict) -> RobotProfile:
    return RobotProfile(
        name=str(_require(d, "name", "robot profile")),
        keypoint_heights_m={
            str(k): float(v)
            for k, v in _require(d, "keypoint_heights_m", "robot profile").items()
        },
        base_keypoint=str(_require(d, "base_keypoint", "robot profile")),
    )


def robot_profile_to_dict(p: RobotProfile) -> dict:
    return {
        "name": p.name,
        "keypoint_heights_m": dict(sorted(p.keypoint_heights_m.items())),
        "base_keypoint": p.base_keypoint,
    }


def body_model_from_dict(d: dict) -> BodyModel:
    return BodyModel(
        stature_m=float(d.get("stature_m", 1.75)),
        hip_ratio=float(d.get("hip_ratio", 0.53)),
        shoulder_ratio=float(d.get("shoulder_ratio", 0.82)),
    )


def load_calibration_file(path) -> CalibrationSet:
    with open(path) as f:
        data = json.load(f)
    camera = camera_from_dict(_require(data, "camera", str(path)))
    body = body_model_from_dict(data.get("body_model", {}))
    robots = [robot_profile_from_dict(r) for r in data.get("robot_profiles", [])]
    views: dict[str, RectilinearView] = {}
    calibrations: dict[str, ViewCalibration] = {}
    for vd in _require(data, "views", str(path)):
        view = view_from_dict(vd)
        if view.id in views:
            raise ConfigError(f"duplicate view id {view.id!r}")
        views[view.id] = view
        h = _require(vd, "h_ground_to_view", f"view {view.id!r}")
        calibrations[view.id] = ViewCalibration(
            view_id=view.id,
            h_ground_to_view=Homography(h),
            camera_position_m=camera.position_m,
            rms_reprojection_px=float(vd.get("rms_px", 0.0)),
        )
    return CalibrationSet(camera, body, robots, views, calibrations)


def calibration_set_to_dict(cs: CalibrationSet) -> dict:
    views = []
    for view_id in sorted(cs.views):
        vd = view_to_dict(cs.views[view_id])
        calib = cs.calibrations[view_id]
        vd["h_ground_to_view"] = calib.h_ground_to_view.matrix.tolist()
        vd["rms_px"] = calib.rms_reprojection_px
        views.append(vd)
    return {
        "camera": camera_to_dict(cs.camera),
        "body_model": {
            "stature_m": cs.body_model.stature_m,
            "hip_ratio": cs.body_model.hip_ratio,
            "shoulder_ratio": cs.body_model.shoulder_ratio,
        },
        "robot_profiles": [robot_profile_to_dict(p) for p in cs.robot_profiles],
        "views": views,
    }


def load_correspondences_file(path) -> tuple[str, list[Correspondence]]:
    """Spec'd correspondence file: {"view_id": ..., "points": [...]}"""
    with open(path) as f:
        data = json.load(f)
    view_id = str(_require(data, "view_id", str(path)))
    points = [
        Correspondence(ground_m=tuple(map(float, p["ground_m"])),
                       pixel=tuple(map(float, p["pixel"])))
        for p in _require(data, "points", str(path))
    ]
    return view_id, points


def _ccw(polygon) -> tuple:
    poly = tuple(tuple(map(float, v)) for v in polygon)
    if polygon_signed_area(poly) < 0:
        poly = tuple(reversed(poly))
    return poly


def sensor_from_dict(d: dict) -> VirtualSensor:
    sensor_id = str(_require(d, "id", "sensor"))
    kind = _require(d, "kind", f"sensor {sensor_id!r}")
    ctx = f"sensor {sensor_id!r}"
    if kind == "mat":
        geometry = MatGeometry(_ccw(_require(d, "polygon_m", ctx)))
    elif kind == "barrier":
        geometry = BarrierGeometry(tuple(map(float, _require(d, "a_m", ctx))),
                                   tuple(map(float, _require(d, "b_m", ctx))))
    elif kind == "proximity":
        anchor = _require(d, "anchor", ctx)
        if isinstance(anchor, dict):
            if "dynamic" in anchor:
                anchor = str(_require(anchor["dynamic"], "class", ctx))
            elif "static" in anchor:
                anchor = tuple(map(float, anchor["static"]))
            else:
                raise ConfigError(f"{ctx}: anchor needs 'static' or 'dynamic'")
        else:
            anchor = tuple(map(float, anchor))
        geometry = ProximityGeometry(
            anchor=anchor,
            levels_m=tuple(map(float, d.get("levels_m", (3.0, 1.5, 0.7)))),
            hysteresis_m=float(d.get("hysteresis_m", 0.15)),
        )
    elif kind == "oriented_mat":
        geometry = OrientedMatGeometry(
            polygon_m=_ccw(_require(d, "polygon_m", ctx)),
            facing_dir=tuple(map(float, _require(d, "facing_dir", ctx))),
            cone_half_angle_rad=float(d.get("cone_half_angle_rad", math.pi / 4)),
        )
    else:
        raise ConfigError(f"{ctx}: unknown kind {kind!r}")
    return VirtualSensor(
        id=sensor_id,
        geometry=geometry,
        classes=frozenset(d.get("classes", ["human"])),
        armed=bool(d.get("armed", True)),
        debounce_on_s=float(d.get("debounce_on_s", 0.10)),
        debounce_off_s=float(d.get("debounce_off_s", 0.25)),
    )


def sensor_to_dict(s: VirtualSensor) -> dict:
    d = {
        "id": s.id,
        "kind": s.kind,
        "classes": sorted(s.classes),
        "armed": s.armed,
        "debounce_on_s": s.debounce_on_s,
        "debounce_off_s": s.debounce_off_s,
    }
    g = s.geometry
    if isinstance(g, MatGeometry):
        d["polygon_m"] = [list(v) for v in g.polygon_m]
    elif isinstance(g, BarrierGeometry):
        d["a_m"] = list(g.a_m)
        d["b_m"] = list(g.b_m)
    elif isinstance(g, ProximityGeometry):
        d["anchor"] = ({"dynamic": {"class": g.anchor}} if g.dynamic
                       else {"static": list(g.anchor)})
        d["levels_m"] = list(g.levels_m)
        d["hysteresis_m"] = g.hysteresis_m
    elif isinstance(g, OrientedMatGeometry):
        d["polygon_m"] = [list(v) for v in g.polygon_m]
        d["facing_dir"] = list(g.facing_dir)
        d["cone_half_angle_rad"] = g.cone_half_angle_rad
    return d


def load_sensors_file(path) -> tuple[list[VirtualSensor], list[ReactionBinding]]:
    with open(path) as f:
        data = json.load(f)
    sensors = [sensor_from_dict(d) for d in data.get("sensors", [])]
    ids = [s.id for s in sensors]
    if len(set(ids)) != len(ids):
        raise ConfigError(f"duplicate sensor ids in {path}")
    reactions = []
    for rd in data.get("reactions", []):
        binding = ReactionBinding(
            sensor_id=str(_require(rd, "sensor_id", "reaction")),
            event_type=str(_require(rd, "type", "reaction")),
            reaction=_require(rd, "reaction", "reaction"),
        )
        if binding.sensor_id not in ids:
            raise ConfigError(
                f"reaction references unknown sensor {binding.sensor_id!r}")
        reactions.append(binding)
    return sensors, reactions


def save_sensors_file(path, sensors: list[VirtualSensor],
                      reactions: list[ReactionBinding] | None = None):
    data = {"sensors": [sensor_to_dict(s) for s in sensors]}
    if reactions:
        data["reactions"] = [
            {"sensor_id": r.sensor_id, "type": r.event_type, "reaction": r.reaction}
            for r in reactions
        ]
    tmp = Path(str(path) + ".tmp")
    tmp.write_text(json.dumps(data, indent=2) + "\n")
    tmp.replace(path)


def load_scenario_file(path):
    """Build a Scenario from its JSON description (sensors may be a path)."""
    from .simulator import Actor, Scenario

    path = Path(path)
    with open(path) as f:
        data = json.load(f)
    camera = camera_from_dict(_require(data, "camera", str(path)))
    views = tuple(view_from_dict(v) for v in _require(data, "views", str(path)))
    actors = []
    for ad in _require(data, "actors", str(path)):
        profile = None
        if "robot_profile" in ad:
            profile = robot_profile_from_dict(ad["robot_profile"])
        actors.append(Actor(
            name=str(_require(ad, "name", "actor")),
            class_name=str(_require(ad, "class", "actor")),
            waypoints=tuple((float(t), tuple(map(float, p)))
                            for t, p in _require(ad, "waypoints", "actor")),
            stature_m=float(ad.get("stature_m", 1.75)),
            hip_ratio=float(ad.get("hip_ratio", 0.53)),
            shoulder_ratio=float(ad.get("shoulder_ratio", 0.82)),
            shoulder_width_m=float(ad.get("shoulder_width_m", 0.40)),
            hip_width_m=float(ad.get("hip_width_m", 0.30)),
            stance_width_m=float(ad.get("stance_width_m", 0.25)),
            robot_profile=profile,
        ))
    windows = tuple(
        (str(_require(w, "actor", "occlusion window")),
         tuple(str(k) for k in _require(w, "keypoints", "occlusion window")),
         float(_require(w, "t_start", "occlusion window")),
         float(_require(w, "t_end", "occlusion window")))
        for w in data.get("occlusion_windows", [])
    )
    sensors_field = data.get("sensors", [])
    if isinstance(sensors_field, str):
        sensors, _ = load_sensors_file(path.parent / sensors_field)
    else:
        sensors = [sensor_from_dict(d) for d in sensors_field]
    return Scenario(
        duration_s=float(_require(data, "duration_s", str(path))),
        fps=float(data.get("fps", 30.0)),
        camera=camera,
        views=views,
        actors=tuple(actors),
        occlusion_windows=windows,
        pixel_noise_px=float(data.get("pixel_noise_px", 0.0)),
        sensors=tuple(sensors),
    )
