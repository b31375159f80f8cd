"""From per-view keypoint detections to tracked, metrically located entities.

Each detection's usable keypoints are lifted individually at their model
heights and fused into one ground position; shoulder (or hip) pairs give a
facing direction. Observations from overlapping views are merged by
proximity, then matched to existing tracks by greedy nearest neighbor with
a speed-dependent gate. Positions are exponentially smoothed.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

from .calibration import BodyModel, ViewCalibration, keypoint_height, lift_at_height
from .errors import ConfigError, HorizonError, StreamError
from .sensors import HUMAN, ROBOT

logger = logging.getLogger(__name__)

CONFIDENCE_FLOOR = 0.2
MERGE_RADIUS_M = 0.3
GATE_BASE_M = 0.5
GATE_SPEED_MPS = 2.0
TRACK_TIMEOUT_S = 0.5
POSITION_SMOOTHING = 0.6
MIN_SHOULDER_SEPARATION_M = 0.05

SOURCE_FEET = "feet"
SOURCE_HEIGHT_CORRECTED = "height_corrected"
SOURCE_MIXED = "mixed"


@dataclass(frozen=True)
class Detection:
    """One detected skeleton in one view: name -> (u, v, confidence)."""

    class_name: str  # "human" | "robot"
    keypoints: dict[str, tuple[float, float, float]]
    track_hint: Optional[str] = None

    def __post_init__(self):
        if self.class_name not in (HUMAN, ROBOT):
            raise StreamError(f"unknown detection class {self.class_name!r}")
        if not any(c > 0 for _, _, c in self.keypoints.values()):
            raise StreamError("detection carries no keypoint with confidence > 0")


@dataclass(frozen=True)
class PoseFrame:
    """All detections of one view at one stream timestamp."""

    t_s: float
    view_id: str
    detections: tuple[Detection, ...] = ()


@dataclass(frozen=True)
class RobotProfile:
    """Fixed keypoint heights standing in for an articulated robot model."""

    name: str
    keypoint_heights_m: dict[str, float]
    base_keypoint: str

    def __post_init__(self):
        if self.base_keypoint not in self.keypoint_heights_m:
            raise StreamError(
                f"robot profile {self.name!r}: base keypoint "
                f"{self.base_keypoint!r} has no configured height")


@dataclass
class EntityState:
    """A tracked human or robot on the ground plane."""

    entity_id: int
    class_name: str
    position_m: tuple[float, float]
    orientation: Optional[tuple[float, float]]
    position_source: str
    last_seen_s: float
    velocity_mps: tuple[float, float] = (0.0, 0.0)


@dataclass(frozen=True)
class Observation:
    """A localized detection, possibly merged across views."""

    class_name: str
    position_m: tuple[float, float]
    orientation: Optional[tuple[float, float]]
    source: str
    confidence: float
    track_hint: Optional[str] = None
    keypoint_count: int = 1


@dataclass(frozen=True)
class TrackNotice:
    kind: str  # "new" | "lost"
    entity_id: int
    t_s: float


def _height_for(det_class: str, name: str, body, robot) -> Optional[float]:
    if det_class == HUMAN:
        try:
            return keypoint_height(body, name)
        except Exception:
            return None
    if robot is None:
        return None
    return robot.keypoint_heights_m.get(name)


def localize_detection(det: Detection, calib: ViewCalibration,
                       body: BodyModel,
                       robot: Optional[RobotProfile] = None,
                       confidence_floor: float = CONFIDENCE_FLOOR,
                       ) -> Optional[Observation]:
    """Fuse all usable keypoints of one detection into a ground position.

    Every keypoint above the confidence floor is lifted at its model height
    and the candidates are confidence-weighted. Returns None when nothing is
    usable (the caller counts such drops).
    """
    weighted = []
    ground_level = elevated = False
    for name, (u, v, conf) in sorted(det.keypoints.items()):
        if conf < confidence_floor:
            continue
        h = _height_for(det.class_name, name, body, robot)
        if h is None:
            logger.debug("no height model for keypoint %r, skipping", name)
            continue
        try:
            pos = lift_at_height(calib, (u, v), h)
        except HorizonError:
            continue
        weighted.append((conf, pos))
        if h == 0.0:
            ground_level = True
        else:
            elevated = True
    if not weighted:
        return None
    total = sum(w for w, _ in weighted)
    x = sum(w * p[0] for w, p in weighted) / total
    y = sum(w * p[1] for w, p in weighted) / total
    if ground_level and elevated:
        source = SOURCE_MIXED
    elif ground_level:
        source = SOURCE_FEET
    else:
        source = SOURCE_HEIGHT_CORRECTED
    return Observation(
        class_name=det.class_name,
        position_m=(x, y),
        orientation=body_orientation(det, calib, body),
        source=source,
        confidence=total / len(weighted),
        track_hint=det.track_hint,
        keypoint_count=len(weighted),
    )


def _pair_ground(det, calib, body, left, right, floor):
    kp = det.keypoints
    if left not in kp or right not in kp:
        return None
    (lu, lv, lc), (ru, rv, rc) = kp[left], kp[right]
    if lc < floor or rc < floor:
        return None
    h = keypoint_height(body, left)
    try:
        return (lift_at_height(calib, (lu, lv), h),
                lift_at_height(calib, (ru, rv), h))
    except HorizonError:
        return None


def body_orientation(det: Detection, calib: ViewCalibration, body: BodyModel,
                     confidence_floor: float = CONFIDENCE_FLOOR,
                     ) -> Optional[tuple[float, float]]:
    """Facing direction from the shoulder pair (hips as fallback).

    With left/right ground positions L and R, facing is rot90_ccw(R - L)
    normalized: someone facing +x carries the left shoulder on the +y side.
    """
    if det.class_name != HUMAN:
        return None
    pair = _pair_ground(det, calib, body, "left_shoulder", "right_shoulder",
                        confidence_floor)
    if pair is None:
        pair = _pair_ground(det, calib, body, "left_hip", "right_hip",
                            confidence_floor)
    if pair is None:
        return None
    left, right = pair
    dx, dy = right[0] - left[0], right[1] - left[1]
    norm = math.hypot(dx, dy)
    if norm < MIN_SHOULDER_SEPARATION_M:
        return None
    return (-dy / norm, dx / norm)


def merge_observations(observations: list[Observation],
                       radius_m: float = MERGE_RADIUS_M) -> list[Observation]:
    """Collapse duplicate sightings of one person from overlapping views.

    All views share a single optical center, so duplicates cannot be
    triangulated apart; same-class observations closer than the merge radius
    are averaged (confidence-weighted). A view that clips the skeleton at its
    frame edge yields a laterally biased position, so only the sightings with
    the fullest keypoint support in each group are kept for the average.
    """
    merged: list[list[Observation]] = []
    for obs in observations:
        target = None
        for group in merged:
            ref = group[0]
            if ref.class_name != obs.class_name:
                continue
            if math.dist(ref.position_m, obs.position_m) < radius_m:
                target = group
                break
        if target is None:
            merged.append([obs])
        else:
            target.append(obs)
    out = []
    for group in merged:
        if len(group) == 1:
            out.append(group[0])
            continue
        best = max(o.keypoint_count for o in group)
        group = [o for o in group if o.keypoint_count == best]
        if len(group) == 1:
            out.append(group[0])
            continue
        total = sum(o.confidence for o in group)
        x = sum(o.confidence * o.position_m[0] for o in group) / total
        y = sum(o.confidence * o.position_m[1] for o in group) / total
        oris = [o.orientation for o in group if o.orientation is not None]
        if oris:
            ox = sum(v[0] for v in oris)
            oy = sum(v[1] for v in oris)
            n = math.hypot(ox, oy)
            orientation = (ox / n, oy / n) if n > 1e-9 else oris[0]
        else:
            orientation = None
        sources = {o.source for o in group}
        source = sources.pop() if len(sources) == 1 else SOURCE_MIXED
        hint = next((o.track_hint for o in group if o.track_hint), None)
        out.append(Observation(group[0].class_name, (x, y), orientation,
                               source, total / len(group), hint, best))
    return out


def greedy_match(track_positions: list[tuple[float, float]],
                 obs_positions: list[tuple[float, float]],
                 gate: float) -> list[tuple[int, int]]:
    """Greedy gated matching: repeatedly take the globally closest pair.

    Ties break on (distance, track index, observation index), which keeps the
    result deterministic. Returns (track index, observation index) pairs.
    """
    candidates = []
    for ti, tp in enumerate(track_positions):
        for oi, op in enumerate(obs_positions):
            d = math.dist(tp, op)
            if d <= gate:
                candidates.append((d, ti, oi))
    candidates.sort()
    used_t: set[int] = set()
    used_o: set[int] = set()
    pairs = []
    for d, ti, oi in candidates:
        if ti in used_t or oi in used_o:
            continue
        used_t.add(ti)
        used_o.add(oi)
        pairs.append((ti, oi))
    return sorted(pairs)


class Tracker:
    """Greedy nearest-neighbor tracker over fused per-frame observations.

    Entity ids are handed out by a monotonic counter and never reused.
    Association is partitioned by class; matches must fall inside the gate
    0.5 m + 2 m/s * dt. Unseen tracks expire after 0.5 s.
    """

    def __init__(self,
                 gate_base_m: float = GATE_BASE_M,
                 gate_speed_mps: float = GATE_SPEED_MPS,
                 timeout_s: float = TRACK_TIMEOUT_S,
                 smoothing: float = POSITION_SMOOTHING):
        self.gate_base_m = gate_base_m
        self.gate_speed_mps = gate_speed_mps
        self.timeout_s = timeout_s
        self.smoothing = smoothing
        self.tracks: dict[int, EntityState] = {}
        self._next_id = 1
        self._last_t: Optional[float] = None

    def entities(self) -> list[EntityState]:
        return [self.tracks[k] for k in sorted(self.tracks)]

    def step(self, t_s: float, observations: list[Observation],
             ) -> tuple[list[EntityState], list[TrackNotice]]:
        """Advance one fused frame; returns live entities and new/lost notices."""
        if self._last_t is not None and t_s < self._last_t - 1e-12:
            raise StreamError(
                f"non-monotonic stream time {t_s} after {self._last_t}")
        dt = 0.0 if self._last_t is None else max(0.0, t_s - self._last_t)
        self._last_t = t_s

        notices: list[TrackNotice] = []
        gate = self.gate_base_m + self.gate_speed_mps * dt

        # association is partitioned by class; ids stay class-pure
        matched_obs: set[int] = set()
        for cls in (HUMAN, ROBOT):
            tids = [tid for tid in sorted(self.tracks)
                    if self.tracks[tid].class_name == cls]
            ois = [oi for oi, o in enumerate(observations) if o.class_name == cls]
            pairs = greedy_match(
                [self.tracks[tid].position_m for tid in tids],
                [observations[oi].position_m for oi in ois],
                gate)
            for ti, oi in pairs:
                matched_obs.add(ois[oi])
                self._update_track(self.tracks[tids[ti]], observations[ois[oi]],
                                   t_s)

        for oi, obs in enumerate(observations):
            if oi in matched_obs:
                continue
            eid = self._next_id
            self._next_id += 1
            self.tracks[eid] = EntityState(
                entity_id=eid,
                class_name=obs.class_name,
                position_m=obs.position_m,
                orientation=obs.orientation,
                position_source=obs.source,
                last_seen_s=t_s,
                velocity_mps=(0.0, 0.0),
            )
            notices.append(TrackNotice("new", eid, t_s))

        for tid in sorted(self.tracks):
            if t_s - self.tracks[tid].last_seen_s > self.timeout_s:
                del self.tracks[tid]
                notices.append(TrackNotice("lost", tid, t_s))
                logger.info("track %d lost at t=%.3f", tid, t_s)

        return self.entities(), notices

    def _update_track(self, track: EntityState, obs: Observation, t_s: float):
        a = self.smoothing
        px, py = track.position_m
        nx = a * obs.position_m[0] + (1 - a) * px
        ny = a * obs.position_m[1] + (1 - a) * py
        seen_dt = t_s - track.last_seen_s
        if seen_dt > 1e-9:
            vx = a * ((nx - px) / seen_dt) + (1 - a) * track.velocity_mps[0]
            vy = a * ((ny - py) / seen_dt) + (1 - a) * track.velocity_mps[1]
        else:
            vx, vy = track.velocity_mps
        orientation = track.orientation
        if obs.orientation is not None:
            if orientation is None:
                orientation = obs.orientation
            else:
                ox = a * obs.orientation[0] + (1 - a) * orientation[0]
                oy = a * obs.orientation[1] + (1 - a) * orientation[1]
                n = math.hypot(ox, oy)
                orientation = (ox / n, oy / n) if n > 1e-9 else obs.orientation
        track.position_m = (nx, ny)
        track.velocity_mps = (vx, vy)
        track.orientation = orientation
        track.position_source = obs.source
        track.last_seen_s = t_s


class PosePipeline:
    """Localize + merge + track, over frames grouped by timestamp."""

    def __init__(self, calibrations: dict[str, ViewCalibration],
                 body: BodyModel,
                 robot_profiles: list[RobotProfile] | None = None,
                 tracker: Tracker | None = None):
        self.calibrations = dict(calibrations)
        self.body = body
        self.robot_profiles = list(robot_profiles or [])
        self.tracker = tracker or Tracker()
        self.dropped_detections = 0

    def _robot_profile_for(self, det: Detection) -> Optional[RobotProfile]:
        best, best_overlap = None, 0
        for profile in self.robot_profiles:
            overlap = len(set(det.keypoints) & set(profile.keypoint_heights_m))
            if overlap > best_overlap:
                best, best_overlap = profile, overlap
        return best

    def process(self, frames: list[PoseFrame],
                ) -> tuple[list[EntityState], list[TrackNotice]]:
        """Consume all views' frames for one timestamp; returns tracker output."""
        if not frames:
            raise StreamError("empty fused frame")
        t_values = {f.t_s for f in frames}
        if len(t_values) > 1:
            raise StreamError(f"fused frame mixes timestamps {sorted(t_values)}")
        t_s = frames[0].t_s
        observations = []
        for frame in frames:
            calib = self.calibrations.get(frame.view_id)
            if calib is None:
                raise ConfigError(f"unknown view id {frame.view_id!r}")
            for det in frame.detections:
                robot = self._robot_profile_for(det) if det.class_name == ROBOT \
                    else None
                obs = localize_detection(det, calib, self.body, robot)
                if obs is None:
                    self.dropped_detections += 1
                    continue
                observations.append(obs)
        return self.tracker.step(t_s, merge_observations(observations))
