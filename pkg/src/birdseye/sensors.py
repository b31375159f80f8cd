"""Virtual sensors over the ground plane and the event engine evaluating them.

Four sensor kinds replace their physical counterparts: light barriers
(directed segment crossings), step-on mats (debounced polygon containment),
proximity sensors (hysteresis level automaton on the closest distance), and
orientation-aware mats (containment gated by facing direction).

The engine owns all mutable debounce/level state; evaluation order is fixed
(sensor id, then entity id) so identical inputs yield identical event streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

from .errors import ConfigError, DomainError

BOUNDARY_EPS = 1e-9
HUMAN = "human"
ROBOT = "robot"
VALID_CLASSES = frozenset({HUMAN, ROBOT})

DEFAULT_DEBOUNCE_ON_S = 0.10
DEFAULT_DEBOUNCE_OFF_S = 0.25
DEFAULT_PROXIMITY_LEVELS_M = (3.0, 1.5, 0.7)
DEFAULT_HYSTERESIS_M = 0.15
DEFAULT_CONE_HALF_ANGLE_RAD = math.pi / 4


def _cross(ax, ay, bx, by) -> float:
    return ax * by - ay * bx


def _dist_point_segment_sq(px, py, ax, ay, bx, by) -> float:
    abx, aby = bx - ax, by - ay
    denom = abx * abx + aby * aby
    if denom <= 0.0:
        dx, dy = px - ax, py - ay
        return dx * dx + dy * dy
    t = ((px - ax) * abx + (py - ay) * aby) / denom
    t = 0.0 if t < 0.0 else (1.0 if t > 1.0 else t)
    dx, dy = px - (ax + t * abx), py - (ay + t * aby)
    return dx * dx + dy * dy


def polygon_signed_area(vertices) -> float:
    area = 0.0
    n = len(vertices)
    for i in range(n):
        x0, y0 = vertices[i]
        x1, y1 = vertices[(i + 1) % n]
        area += x0 * y1 - x1 * y0
    return 0.5 * area


def _segments_properly_intersect(p0, p1, q0, q1) -> bool:
    """Strict interior crossing of two segments (shared endpoints excluded)."""
    d1 = _cross(q1[0] - q0[0], q1[1] - q0[1], p0[0] - q0[0], p0[1] - q0[1])
    d2 = _cross(q1[0] - q0[0], q1[1] - q0[1], p1[0] - q0[0], p1[1] - q0[1])
    d3 = _cross(p1[0] - p0[0], p1[1] - p0[1], q0[0] - p0[0], q0[1] - p0[1])
    d4 = _cross(p1[0] - p0[0], p1[1] - p0[1], q1[0] - p0[0], q1[1] - p0[1])
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and \
        d1 != 0 and d2 != 0 and d3 != 0 and d4 != 0


def polygon_is_simple(vertices) -> bool:
    """No two non-adjacent edges intersect (O(n^2), fine for sensor shapes)."""
    n = len(vertices)
    edges = [(vertices[i], vertices[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue  # adjacent edges share a vertex
            if _segments_properly_intersect(*edges[i], *edges[j]):
                return False
    return True


@dataclass(frozen=True)
class BarrierGeometry:
    """Virtual light barrier: a directed segment from a to b."""

    a_m: tuple[float, float]
    b_m: tuple[float, float]

    def __post_init__(self):
        if math.dist(self.a_m, self.b_m) <= 0.01:
            raise DomainError("barrier endpoints must be > 0.01 m apart")


@dataclass(frozen=True)
class MatGeometry:
    """Freeform step-on mat: a simple CCW polygon with non-trivial area."""

    polygon_m: tuple[tuple[float, float], ...]

    def __post_init__(self):
        poly = tuple(tuple(map(float, v)) for v in self.polygon_m)
        object.__setattr__(self, "polygon_m", poly)
        if len(poly) < 3:
            raise DomainError("mat polygon needs at least 3 vertices")
        if not polygon_is_simple(poly):
            raise DomainError("mat polygon is self-intersecting")
        area = polygon_signed_area(poly)
        if abs(area) <= 0.01:
            raise DomainError(f"mat polygon area {abs(area):.4f} m^2 too small")
        if area < 0:
            raise DomainError("mat polygon must be counter-clockwise")

    @property
    def area_m2(self) -> float:
        return polygon_signed_area(self.polygon_m)


@dataclass(frozen=True)
class ProximityGeometry:
    """Distance thresholds around a fixed point or the nearest robot base."""

    anchor: Union[tuple[float, float], str]  # static point or a class name
    levels_m: tuple[float, ...] = DEFAULT_PROXIMITY_LEVELS_M
    hysteresis_m: float = DEFAULT_HYSTERESIS_M

    def __post_init__(self):
        object.__setattr__(self, "levels_m", tuple(float(v) for v in self.levels_m))
        if isinstance(self.anchor, str):
            if self.anchor not in VALID_CLASSES:
                raise ConfigError(f"unknown dynamic anchor class {self.anchor!r}")
        else:
            object.__setattr__(self, "anchor", tuple(map(float, self.anchor)))
        if not self.levels_m:
            raise DomainError("proximity sensor needs at least one level")
        if any(b >= a for a, b in zip(self.levels_m, self.levels_m[1:])):
            raise DomainError("proximity levels must be strictly decreasing")
        gaps = [a - b for a, b in zip(self.levels_m, self.levels_m[1:])]
        min_gap = min(gaps) if gaps else math.inf
        if self.hysteresis_m < 0 or self.hysteresis_m >= min_gap / 2:
            raise DomainError(
                f"hysteresis {self.hysteresis_m} must lie in [0, min level gap / 2)"
            )

    @property
    def dynamic(self) -> bool:
        return isinstance(self.anchor, str)


@dataclass(frozen=True)
class OrientedMatGeometry:
    """Mat that only reacts to entities facing (roughly) a given direction."""

    polygon_m: tuple[tuple[float, float], ...]
    facing_dir: tuple[float, float]
    cone_half_angle_rad: float = DEFAULT_CONE_HALF_ANGLE_RAD

    def __post_init__(self):
        mat = MatGeometry(self.polygon_m)  # reuse the mat validity rules
        object.__setattr__(self, "polygon_m", mat.polygon_m)
        n = math.hypot(*self.facing_dir)
        if n < 1e-9:
            raise DomainError("facing_dir must be a nonzero vector")
        object.__setattr__(self, "facing_dir",
                           (self.facing_dir[0] / n, self.facing_dir[1] / n))
        if not 0 < self.cone_half_angle_rad <= math.pi:
            raise DomainError("cone_half_angle_rad must lie in (0, pi]")


Geometry = Union[BarrierGeometry, MatGeometry, ProximityGeometry, OrientedMatGeometry]

_KIND_FOR_GEOMETRY = {
    BarrierGeometry: "barrier",
    MatGeometry: "mat",
    ProximityGeometry: "proximity",
    OrientedMatGeometry: "oriented_mat",
}


@dataclass
class VirtualSensor:
    """A configured sensor instance; geometry decides its kind."""

    id: str
    geometry: Geometry
    classes: frozenset[str] = frozenset({HUMAN})
    armed: bool = True
    debounce_on_s: float = DEFAULT_DEBOUNCE_ON_S
    debounce_off_s: float = DEFAULT_DEBOUNCE_OFF_S

    def __post_init__(self):
        self.classes = frozenset(self.classes)
        unknown = self.classes - VALID_CLASSES
        if unknown:
            raise ConfigError(f"sensor {self.id!r}: unknown classes {sorted(unknown)}")
        if not self.classes:
            raise ConfigError(f"sensor {self.id!r}: empty sensitivity class set")
        if self.debounce_on_s < 0 or self.debounce_off_s < 0:
            raise ConfigError(f"sensor {self.id!r}: negative debounce")

    @property
    def kind(self) -> str:
        return _KIND_FOR_GEOMETRY[type(self.geometry)]


@dataclass(frozen=True)
class InteractionEvent:
    """A debounced state transition raised by one sensor."""

    t_s: float
    sensor_id: str
    entity_id: Optional[int]
    type: str  # enter | leave | crossed | proximity_level
    payload: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        d = {"t": self.t_s, "sensor_id": self.sensor_id,
             "entity_id": self.entity_id, "type": self.type}
        d.update(self.payload)
        return d


def point_in_polygon(point, polygon) -> bool:
    """Even-odd ray containment; points on the boundary count as inside."""
    if isinstance(polygon, (MatGeometry, OrientedMatGeometry)):
        polygon = polygon.polygon_m
    px, py = float(point[0]), float(point[1])
    n = len(polygon)
    eps_sq = BOUNDARY_EPS * BOUNDARY_EPS
    for i in range(n):
        ax, ay = polygon[i]
        bx, by = polygon[(i + 1) % n]
        if _dist_point_segment_sq(px, py, ax, ay, bx, by) <= eps_sq:
            return True
    inside = False
    for i in range(n):
        ax, ay = polygon[i]
        bx, by = polygon[(i + 1) % n]
        if (ay > py) != (by > py):
            x_cross = ax + (py - ay) * (bx - ax) / (by - ay)
            if px < x_cross:
                inside = not inside
    return inside


def segment_crossing(prev, cur, barrier: BarrierGeometry) -> Optional[int]:
    """Signed crossing of the motion segment prev->cur over the barrier.

    Returns +1/-1 (the sign of cross(b - a, cur - prev)) when the motion
    crosses, None otherwise. A point exactly on the barrier line is treated
    as already on the positive side, so touching the line counts as one
    crossing on approach and nothing while resting on it.
    """
    ax, ay = barrier.a_m
    bx, by = barrier.b_m
    ex, ey = bx - ax, by - ay
    s_prev = _cross(ex, ey, prev[0] - ax, prev[1] - ay)
    s_cur = _cross(ex, ey, cur[0] - ax, cur[1] - ay)
    if (s_prev >= 0) == (s_cur >= 0):
        return None
    # where the motion meets the barrier line, as a fraction of the motion
    t = s_prev / (s_prev - s_cur)
    hx = prev[0] + t * (cur[0] - prev[0])
    hy = prev[1] + t * (cur[1] - prev[1])
    u = ((hx - ax) * ex + (hy - ay) * ey) / (ex * ex + ey * ey)
    if not 0.0 <= u <= 1.0:
        return None
    rx, ry = cur[0] - prev[0], cur[1] - prev[1]
    d = _cross(ex, ey, rx, ry)
    return 1 if d > 0 else -1


def proximity_level(distance_m: float, levels, hysteresis_m: float,
                    prev_level: int) -> int:
    """Hysteresis level automaton: count of engaged thresholds.

    A threshold engages as soon as the distance falls below it and releases
    only once the distance exceeds threshold + hysteresis. Level k means the
    k widest thresholds are engaged; 0 is fully clear (e.g. full robot speed).
    """
    level = 0
    for i, th in enumerate(levels):
        engaged_before = i < prev_level
        if th > distance_m or (engaged_before and distance_m <= th + hysteresis_m):
            level += 1
        else:
            break  # thresholds are descending; nothing tighter can hold
    return level


@dataclass
class _DebounceState:
    raw: bool
    raw_since: float
    emitted: bool = False


class SensorEngine:
    """Evaluates all sensors against each frame's entities, with debouncing.

    State is keyed by (sensor id, entity id) for mats/oriented mats and by
    sensor id for proximity automata; previous entity positions feed barrier
    crossing checks. Disarming (or removing) a sensor silently resets its
    state; re-arming starts clean.
    """

    def __init__(self, sensors: list[VirtualSensor] | None = None):
        self.sensors: dict[str, VirtualSensor] = {}
        self._occupancy: dict[tuple[str, int], _DebounceState] = {}
        self._prox_level: dict[str, int] = {}
        self._prev_positions: dict[int, tuple[float, float]] = {}
        for s in sensors or []:
            self.add(s)

    def add(self, sensor: VirtualSensor):
        if sensor.id in self.sensors:
            raise ConfigError(f"duplicate sensor id {sensor.id!r}")
        self.sensors[sensor.id] = sensor

    def remove(self, sensor_id: str):
        if sensor_id not in self.sensors:
            raise ConfigError(f"unknown sensor id {sensor_id!r}")
        del self.sensors[sensor_id]
        self._reset_sensor_state(sensor_id)

    def set_armed(self, sensor_id: str, armed: bool):
        try:
            sensor = self.sensors[sensor_id]
        except KeyError:
            raise ConfigError(f"unknown sensor id {sensor_id!r}") from None
        if sensor.armed and not armed:
            self._reset_sensor_state(sensor_id)
        sensor.armed = armed

    def _reset_sensor_state(self, sensor_id: str):
        self._occupancy = {k: v for k, v in self._occupancy.items()
                           if k[0] != sensor_id}
        self._prox_level.pop(sensor_id, None)

    def evaluate_frame(self, t_s: float, entities) -> list[InteractionEvent]:
        """Run every armed sensor against this frame's entity states.

        ``entities`` is an iterable of objects with ``entity_id``, ``class_name``,
        ``position_m`` and optional ``orientation`` attributes (EntityState
        satisfies this). Events come out ordered by (sensor id, entity id).
        """
        entities = list(entities)
        events: list[InteractionEvent] = []
        for sensor_id in sorted(self.sensors):
            sensor = self.sensors[sensor_id]
            if not sensor.armed:
                continue
            sensitive = sorted(
                (e for e in entities if e.class_name in sensor.classes),
                key=lambda e: e.entity_id)
            geom = sensor.geometry
            if isinstance(geom, (MatGeometry, OrientedMatGeometry)):
                events.extend(self._eval_mat(sensor, sensitive, t_s))
            elif isinstance(geom, BarrierGeometry):
                events.extend(self._eval_barrier(sensor, sensitive, t_s))
            else:
                events.extend(self._eval_proximity(sensor, sensitive, entities, t_s))
        self._prev_positions = {
            e.entity_id: (float(e.position_m[0]), float(e.position_m[1]))
            for e in entities
        }
        self._gc_occupancy({e.entity_id for e in entities}, t_s)
        return events

    def _raw_mat_state(self, sensor: VirtualSensor, entity) -> bool:
        geom = sensor.geometry
        inside = point_in_polygon(entity.position_m, geom.polygon_m)
        if not inside or isinstance(geom, MatGeometry):
            return inside
        # oriented mats additionally gate on facing direction
        o = entity.orientation
        if o is None:
            return False
        f = geom.facing_dir
        dot = max(-1.0, min(1.0, o[0] * f[0] + o[1] * f[1]))
        return math.acos(dot) <= geom.cone_half_angle_rad

    def _eval_mat(self, sensor, sensitive, t_s) -> list[InteractionEvent]:
        events = []
        present = set()
        for entity in sensitive:
            present.add(entity.entity_id)
            raw = self._raw_mat_state(sensor, entity)
            events.extend(self._debounce(sensor, entity.entity_id, raw, t_s))
        # entities no longer observed (or filtered) count as outside
        for (sid, eid), state in list(self._occupancy.items()):
            if sid == sensor.id and eid not in present:
                events.extend(self._debounce(sensor, eid, False, t_s))
        return sorted(events, key=lambda e: e.entity_id)

    def _debounce(self, sensor, entity_id, raw, t_s) -> list[InteractionEvent]:
        key = (sensor.id, entity_id)
        state = self._occupancy.get(key)
        if state is None:
            if not raw:
                return []  # nothing to track until first seen inside
            state = self._occupancy[key] = _DebounceState(raw=raw, raw_since=t_s)
        if raw != state.raw:
            state.raw = raw
            state.raw_since = t_s
        held = t_s - state.raw_since
        if state.raw and not state.emitted and held >= sensor.debounce_on_s:
            state.emitted = True
            return [InteractionEvent(t_s, sensor.id, entity_id, "enter")]
        if not state.raw and state.emitted and held >= sensor.debounce_off_s:
            state.emitted = False
            return [InteractionEvent(t_s, sensor.id, entity_id, "leave")]
        return []

    def _eval_barrier(self, sensor, sensitive, t_s) -> list[InteractionEvent]:
        events = []
        for entity in sensitive:
            prev = self._prev_positions.get(entity.entity_id)
            if prev is None:
                continue
            direction = segment_crossing(prev, entity.position_m, sensor.geometry)
            if direction is not None:
                events.append(InteractionEvent(
                    t_s, sensor.id, entity.entity_id, "crossed",
                    {"direction": direction}))
        return events

    def _eval_proximity(self, sensor, sensitive, all_entities,
                        t_s) -> list[InteractionEvent]:
        geom = sensor.geometry
        if geom.dynamic:
            anchors = [e.position_m for e in all_entities
                       if e.class_name == geom.anchor]
            if not anchors:
                return []  # dormant until an anchor entity shows up
        else:
            anchors = [geom.anchor]
        distance = math.inf
        nearest_entity = None
        for entity in sensitive:
            ex, ey = entity.position_m
            d = min(math.hypot(ex - ax, ey - ay) for ax, ay in anchors)
            if d < distance:
                distance = d
                nearest_entity = entity.entity_id
        prev = self._prox_level.get(sensor.id, 0)
        level = proximity_level(distance, geom.levels_m, geom.hysteresis_m, prev)
        if level == prev:
            return []
        self._prox_level[sensor.id] = level
        payload = {"level": level,
                   "distance_m": distance if math.isfinite(distance) else None}
        return [InteractionEvent(t_s, sensor.id, nearest_entity,
                                 "proximity_level", payload)]

    def _gc_occupancy(self, live_entity_ids, t_s):
        """Drop fully-relaxed state for entities that are gone."""
        for key, state in list(self._occupancy.items()):
            if key[1] not in live_entity_ids and not state.emitted and not state.raw:
                del self._occupancy[key]
