"""Scripted 3D actors projected through the camera model into pose streams.

This stands in for the neural pose estimators: actors walk waypoint paths,
grow a six-keypoint band skeleton (ankles / hips / shoulders, or fixed robot
keypoints), and every keypoint is projected into every rectilinear view.
Output is deterministic for a given seed; pixel noise and keypoint dropout
are independent, so changing the noise level never changes visibility.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from .errors import DomainError
from .geometry import PanoramicCamera, RectilinearView, world_point_to_view_pixel
from .pipeline import Detection, PoseFrame, RobotProfile
from .sensors import MatGeometry, OrientedMatGeometry, VirtualSensor, point_in_polygon

BASE_CONFIDENCE = 0.95
MIN_MOVING_SPEED_MPS = 0.05
DEFAULT_HEADING = (1.0, 0.0)


@dataclass(frozen=True)
class Actor:
    """One scripted human or robot following linear waypoint segments."""

    name: str
    class_name: str  # "human" | "robot"
    waypoints: tuple[tuple[float, tuple[float, float]], ...]
    stature_m: float = 1.75
    hip_ratio: float = 0.53
    shoulder_ratio: float = 0.82
    shoulder_width_m: float = 0.40
    hip_width_m: float = 0.30
    stance_width_m: float = 0.25
    robot_profile: Optional[RobotProfile] = None

    def __post_init__(self):
        times = [t for t, _ in self.waypoints]
        if not times:
            raise DomainError(f"actor {self.name!r} has no waypoints")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise DomainError(f"actor {self.name!r}: waypoint times must increase")
        if self.class_name == "robot" and self.robot_profile is None:
            raise DomainError(f"robot actor {self.name!r} needs a robot profile")


@dataclass(frozen=True)
class Scenario:
    duration_s: float
    camera: PanoramicCamera
    views: tuple[RectilinearView, ...]
    actors: tuple[Actor, ...]
    fps: float = 30.0
    # (actor name, keypoint names, t_start, t_end): drop those keypoints
    occlusion_windows: tuple[tuple[str, tuple[str, ...], float, float], ...] = ()
    pixel_noise_px: float = 0.0
    # sensors here only annotate ground truth containment; the engine loads
    # its own sensor config
    sensors: tuple[VirtualSensor, ...] = ()

    def __post_init__(self):
        if self.fps <= 0:
            raise DomainError("fps must be positive")
        if self.pixel_noise_px < 0:
            raise DomainError("pixel noise must be >= 0")
        for name, _, t0, t1 in self.occlusion_windows:
            if not (0 <= t0 < t1 <= self.duration_s):
                raise DomainError(
                    f"occlusion window [{t0}, {t1}] outside scenario duration")
            if name not in {a.name for a in self.actors}:
                raise DomainError(f"occlusion window references unknown actor {name!r}")

    @property
    def frame_count(self) -> int:
        return int(round(self.duration_s * self.fps))


def _position_and_heading(actor: Actor, t_s: float):
    """Linear waypoint interpolation; heading carries over slow segments."""
    wps = actor.waypoints
    if t_s < wps[0][0] or t_s > wps[-1][0]:
        return None, None
    heading = DEFAULT_HEADING
    pos = wps[0][1]
    for (t0, p0), (t1, p1) in zip(wps, wps[1:]):
        seg_v = ((p1[0] - p0[0]) / (t1 - t0), (p1[1] - p0[1]) / (t1 - t0))
        speed = math.hypot(*seg_v)
        if speed >= MIN_MOVING_SPEED_MPS:
            seg_heading = (seg_v[0] / speed, seg_v[1] / speed)
        else:
            seg_heading = heading
        if t_s <= t1:
            u = (t_s - t0) / (t1 - t0)
            pos = (p0[0] + u * (p1[0] - p0[0]), p0[1] + u * (p1[1] - p0[1]))
            heading = seg_heading
            break
        heading = seg_heading
        pos = p1
    return pos, heading


def skeleton_at(actor: Actor, t_s: float) -> Optional[dict[str, tuple]]:
    """World keypoints of the actor at a time, or None outside its span."""
    pos, heading = _position_and_heading(actor, t_s)
    if pos is None:
        return None
    if actor.class_name == "robot":
        return {
            name: (pos[0], pos[1], h)
            for name, h in actor.robot_profile.keypoint_heights_m.items()
        }
    # unit left axis: 90 degrees counter-clockwise from the heading
    lx, ly = -heading[1], heading[0]
    hip_h = actor.hip_ratio * actor.stature_m
    shoulder_h = actor.shoulder_ratio * actor.stature_m
    half = {
        "ankle": actor.stance_width_m / 2,
        "hip": actor.hip_width_m / 2,
        "shoulder": actor.shoulder_width_m / 2,
    }
    bands = {"ankle": 0.0, "hip": hip_h, "shoulder": shoulder_h}
    skeleton = {}
    for band, h in bands.items():
        w = half[band]
        skeleton[f"left_{band}"] = (pos[0] + w * lx, pos[1] + w * ly, h)
        skeleton[f"right_{band}"] = (pos[0] - w * lx, pos[1] - w * ly, h)
    return skeleton


def actor_pose_at(actor: Actor, t_s: float):
    """(position, heading) ground truth, or (None, None) outside the span."""
    return _position_and_heading(actor, t_s)


@dataclass(frozen=True)
class TruthActor:
    name: str
    class_name: str
    position_m: tuple[float, float]
    heading: tuple[float, float]
    inside: dict[str, bool] = field(default_factory=dict)


@dataclass(frozen=True)
class TruthRecord:
    t_s: float
    actors: tuple[TruthActor, ...]


def _occluded(scenario: Scenario, actor: Actor, keypoint: str, t_s: float) -> bool:
    for name, keypoints, t0, t1 in scenario.occlusion_windows:
        if name == actor.name and keypoint in keypoints and t0 <= t_s <= t1:
            return True
    return False


def render_frame(scenario: Scenario, t_s: float, rng: np.random.Generator | None,
                 ) -> tuple[list[PoseFrame], TruthRecord]:
    """Project all actors into all views at one instant.

    Visibility (in front, inside the noiseless frame) is decided before noise
    so the set of emitted keypoints does not depend on the noise level.
    """
    if not 0 <= t_s <= scenario.duration_s:
        raise DomainError(f"t={t_s} outside scenario duration")
    sigma = scenario.pixel_noise_px
    confidence = BASE_CONFIDENCE - min(0.5, sigma / 10.0) if sigma > 0 \
        else BASE_CONFIDENCE
    detections: dict[str, list[Detection]] = {v.id: [] for v in scenario.views}
    truth_actors = []
    for actor in scenario.actors:
        skeleton = skeleton_at(actor, t_s)
        pos, heading = _position_and_heading(actor, t_s)
        if skeleton is None:
            continue
        inside = {}
        for sensor in scenario.sensors:
            if isinstance(sensor.geometry, (MatGeometry, OrientedMatGeometry)):
                inside[sensor.id] = point_in_polygon(pos, sensor.geometry.polygon_m)
        truth_actors.append(TruthActor(actor.name, actor.class_name,
                                       pos, heading, inside))
        for view in scenario.views:
            kp = {}
            for name in sorted(skeleton):
                if _occluded(scenario, actor, name, t_s):
                    continue
                px = world_point_to_view_pixel(scenario.camera, view,
                                               skeleton[name])
                if px is None:
                    continue
                u, v = float(px[0]), float(px[1])
                if not (0 <= u < view.width_px and 0 <= v < view.height_px):
                    continue
                if sigma > 0:
                    u += sigma * rng.standard_normal()
                    v += sigma * rng.standard_normal()
                kp[name] = (u, v, confidence)
            if kp:
                detections[view.id].append(
                    Detection(actor.class_name, kp, track_hint=actor.name))
    frames = [
        PoseFrame(t_s, view.id, tuple(detections[view.id]))
        for view in scenario.views
    ]
    return frames, TruthRecord(t_s, tuple(truth_actors))


def generate(scenario: Scenario, seed: int = 0,
             ) -> Iterator[tuple[list[PoseFrame], TruthRecord]]:
    """Yield (per-view pose frames, truth record) for every timestep."""
    rng = np.random.default_rng(seed) if scenario.pixel_noise_px > 0 else None
    for k in range(scenario.frame_count):
        yield render_frame(scenario, k / scenario.fps, rng)


def pose_frame_to_json_dict(frame: PoseFrame) -> dict:
    return {
        "t": frame.t_s,
        "view_id": frame.view_id,
        "detections": [
            {
                "class": d.class_name,
                "keypoints": {k: list(v) for k, v in sorted(d.keypoints.items())},
                **({"track_hint": d.track_hint} if d.track_hint else {}),
            }
            for d in frame.detections
        ],
    }


def truth_to_json_dict(rec: TruthRecord) -> dict:
    return {
        "t": rec.t_s,
        "actors": [
            {
                "name": a.name,
                "class": a.class_name,
                "position_m": list(a.position_m),
                "heading": list(a.heading),
                "inside": a.inside,
            }
            for a in rec.actors
        ],
    }


def run(scenario: Scenario, pose_path, truth_path=None, seed: int = 0) -> int:
    """Write the pose stream (and optionally ground truth) as NDJSON files."""
    frames_written = 0
    truth_file = open(truth_path, "w") if truth_path else None
    try:
        with open(pose_path, "w") as pose_file:
            for frames, truth in generate(scenario, seed):
                for frame in frames:
                    pose_file.write(json.dumps(pose_frame_to_json_dict(frame)))
                    pose_file.write("\n")
                if truth_file:
                    truth_file.write(json.dumps(truth_to_json_dict(truth)))
                    truth_file.write("\n")
                frames_written += 1
    finally:
        if truth_file:
            truth_file.close()
    return frames_written
