"""Long-running interaction engine: replay or live pose streams in, entity
snapshots and interaction events out, operator commands in between frames.

All debounce and hysteresis decisions run on logical stream time, so replay
speed only paces I/O and the event output is a deterministic function of
(pose stream, configs, command schedule). One asyncio loop owns all mutable
state; subscribers (WebSocket or plain NDJSON/TCP on the same port) get a
full snapshot on connect, then per-frame deltas and events.
"""

from __future__ import annotations

import asyncio
import json
import logging
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import wire
from .configio import (
    CalibrationSet,
    ReactionBinding,
    load_calibration_file,
    load_sensors_file,
    save_sensors_file,
    sensor_from_dict,
    sensor_to_dict,
)
from .errors import BirdsEyeError, ConfigError, StreamError, TeachError
from .pipeline import Detection, EntityState, PoseFrame, PosePipeline, TrackNotice
from .sensors import InteractionEvent, ProximityGeometry, SensorEngine
from .teach import TeachSession, finalize, record

logger = logging.getLogger(__name__)

TIME_TOL_S = 1e-9
SUBSCRIBER_QUEUE_LIMIT = 256


# ---------------------------------------------------------------------------
# stream parsing and fusion

def parse_pose_frame(obj: dict) -> PoseFrame:
    """Validate one NDJSON pose record; raises StreamError when malformed."""
    try:
        t_s = float(obj["t"])
        view_id = str(obj["view_id"])
        detections = []
        for d in obj.get("detections", []):
            keypoints = {
                str(name): (float(v[0]), float(v[1]), float(v[2]))
                for name, v in d["keypoints"].items()
            }
            detections.append(Detection(
                class_name=str(d["class"]),
                keypoints=keypoints,
                track_hint=d.get("track_hint"),
            ))
        return PoseFrame(t_s=t_s, view_id=view_id, detections=tuple(detections))
    except StreamError:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise StreamError(f"malformed pose frame: {exc}") from exc


class FrameGrouper:
    """Group per-view frames sharing one timestamp into fused frames."""

    def __init__(self):
        self._pending: list[PoseFrame] = []
        self._t: Optional[float] = None

    def push(self, frame: PoseFrame) -> list[list[PoseFrame]]:
        if self._t is None or abs(frame.t_s - self._t) <= TIME_TOL_S:
            self._pending.append(frame)
            self._t = frame.t_s if self._t is None else self._t
            return []
        if frame.t_s < self._t - TIME_TOL_S:
            raise StreamError(
                f"pose stream went backwards: {frame.t_s} after {self._t}")
        group, self._pending, self._t = self._pending, [frame], frame.t_s
        return [group]

    def flush(self) -> list[list[PoseFrame]]:
        if not self._pending:
            return []
        group, self._pending, self._t = self._pending, [], None
        return [group]


# ---------------------------------------------------------------------------
# engine core (pure of I/O except sensor persistence on request)

@dataclass
class FrameResult:
    t_s: float
    entities: list[EntityState]
    events: list[InteractionEvent]
    notices: list[TrackNotice]
    flags: dict[str, bool]
    robot_speed: float


def entity_to_dict(e: EntityState) -> dict:
    return {
        "id": e.entity_id,
        "class": e.class_name,
        "position_m": [e.position_m[0], e.position_m[1]],
        "orientation": list(e.orientation) if e.orientation else None,
        "source": e.position_source,
        "velocity_mps": [e.velocity_mps[0], e.velocity_mps[1]],
    }


class Engine:
    """Pipeline + sensors + reactions + teach, stepped one fused frame at a time."""

    def __init__(self, calibration_set: CalibrationSet, sensors,
                 reactions: list[ReactionBinding],
                 sensors_path: Optional[Path] = None):
        self.pipeline = PosePipeline(
            calibration_set.calibrations,
            calibration_set.body_model,
            calibration_set.robot_profiles,
        )
        self.sensor_engine = SensorEngine(sensors)
        self.reactions = list(reactions)
        self.sensors_path = Path(sensors_path) if sensors_path else None
        self.flags: dict[str, bool] = {}
        self.robot_speed = 1.0
        self.frame_index = 0
        self.last_t: Optional[float] = None
        self.teach_session: Optional[TeachSession] = None
        self._teach_counter = 0

    @classmethod
    def from_files(cls, calib_path, sensors_path) -> "Engine":
        calibration_set = load_calibration_file(calib_path)
        sensors, reactions = load_sensors_file(sensors_path)
        return cls(calibration_set, sensors, reactions, Path(sensors_path))

    # -- frame processing --------------------------------------------------

    def step(self, frames: list[PoseFrame]) -> FrameResult:
        entities, notices = self.pipeline.process(frames)
        t_s = frames[0].t_s
        self.last_t = t_s
        self.frame_index += 1
        self._record_teach(entities)
        events = self.sensor_engine.evaluate_frame(t_s, entities)
        for event in events:
            self._apply_reactions(event)
        return FrameResult(t_s, entities, events, notices,
                           dict(self.flags), self.robot_speed)

    def _record_teach(self, entities: list[EntityState]):
        session = self.teach_session
        if session is None or session.state != "recording":
            return
        for entity in entities:
            if entity.entity_id == session.entity_id:
                record(session, entity)

    def _apply_reactions(self, event: InteractionEvent):
        for binding in self.reactions:
            if binding.sensor_id != event.sensor_id:
                continue
            if binding.event_type != event.type:
                continue
            r = binding.reaction
            if r.get("log"):
                logger.info("reaction[%s]: %s", binding.sensor_id,
                            json.dumps(event.to_json_dict()))
            if "set_flag" in r:
                self.flags[r["set_flag"]] = True
            if r.get("robot_speed_from_level") and event.type == "proximity_level":
                sensor = self.sensor_engine.sensors.get(event.sensor_id)
                if isinstance(sensor.geometry, ProximityGeometry):
                    n_levels = len(sensor.geometry.levels_m)
                    level = event.payload["level"]
                    self.robot_speed = max(0.0, 1.0 - level / n_levels)

    # -- operator commands ---------------------------------------------------

    def apply_command(self, cmd: dict) -> dict:
        """Execute one operator command; returns an ack payload (ok or error)."""
        name = cmd.get("cmd")
        try:
            handler = {
                "arm": self._cmd_arm,
                "disarm": self._cmd_disarm,
                "add_sensor": self._cmd_add_sensor,
                "remove_sensor": self._cmd_remove_sensor,
                "teach_start": self._cmd_teach_start,
                "teach_stop": self._cmd_teach_stop,
                "save_sensors": self._cmd_save_sensors,
            }.get(name)
            if handler is None:
                raise ConfigError(f"unknown command {name!r}")
            result = handler(cmd)
        except BirdsEyeError as exc:
            logger.warning("command %s failed: %s", name, exc)
            return {"ok": False, "cmd": name, "error": str(exc)}
        return {"ok": True, "cmd": name, "result": result}

    def _cmd_arm(self, cmd):
        self.sensor_engine.set_armed(str(cmd["sensor_id"]), True)
        return {"sensor_id": cmd["sensor_id"], "armed": True}

    def _cmd_disarm(self, cmd):
        self.sensor_engine.set_armed(str(cmd["sensor_id"]), False)
        return {"sensor_id": cmd["sensor_id"], "armed": False}

    def _cmd_add_sensor(self, cmd):
        sensor = sensor_from_dict(cmd["sensor"])
        self.sensor_engine.add(sensor)
        return {"sensor": sensor_to_dict(sensor)}

    def _cmd_remove_sensor(self, cmd):
        self.sensor_engine.remove(str(cmd["sensor_id"]))
        return {"sensor_id": cmd["sensor_id"]}

    def _cmd_teach_start(self, cmd):
        if self.teach_session and self.teach_session.state == "recording":
            raise TeachError("a teach session is already recording")
        entity_id = int(cmd["entity_id"])
        if entity_id not in self.pipeline.tracker.tracks:
            raise TeachError(f"unknown entity {entity_id}")
        self._teach_counter += 1
        self.teach_session = TeachSession(
            session_id=f"teach-{self._teach_counter}", entity_id=entity_id)
        return {"session_id": self.teach_session.session_id,
                "entity_id": entity_id}

    def _cmd_teach_stop(self, cmd):
        session = self.teach_session
        if session is None or session.state != "recording":
            raise TeachError("no teach session is recording")
        sensor_id = str(cmd["sensor_id"])
        if sensor_id in self.sensor_engine.sensors:
            raise ConfigError(f"duplicate sensor id {sensor_id!r}")
        result = finalize(session)
        self.teach_session = None
        from .sensors import VirtualSensor
        sensor = VirtualSensor(
            id=sensor_id,
            geometry=result.geometry,
            classes=frozenset(cmd.get("classes", ["human"])),
        )
        self.sensor_engine.add(sensor)
        persisted = self._persist_sensors()
        return {"sensor": sensor_to_dict(sensor),
                "hull_fallback": result.hull_fallback,
                "persisted": persisted}

    def _cmd_save_sensors(self, cmd):
        return {"path": str(self.sensors_path), "saved": self._persist_sensors()}

    def _persist_sensors(self) -> bool:
        if self.sensors_path is None:
            return False
        save_sensors_file(self.sensors_path,
                          [self.sensor_engine.sensors[k]
                           for k in sorted(self.sensor_engine.sensors)],
                          self.reactions)
        return True

    # -- messages ------------------------------------------------------------

    def snapshot_message(self) -> dict:
        return {
            "type": "snapshot",
            "t": self.last_t,
            "sensors": [sensor_to_dict(self.sensor_engine.sensors[k])
                        for k in sorted(self.sensor_engine.sensors)],
            "entities": [entity_to_dict(e)
                         for e in self.pipeline.tracker.entities()],
            "flags": dict(self.flags),
            "robot_speed": self.robot_speed,
        }


def entities_message(result: FrameResult) -> dict:
    return {
        "type": "entities",
        "t": result.t_s,
        "entities": [entity_to_dict(e) for e in result.entities],
        "flags": result.flags,
        "robot_speed": result.robot_speed,
    }


def event_message(event: InteractionEvent) -> dict:
    # nested so the envelope's "type" cannot collide with the event's own
    return {"type": "event", "event": event.to_json_dict()}


# ---------------------------------------------------------------------------
# runtime configuration

@dataclass
class RuntimeConfig:
    calib_path: Path
    sensors_path: Path
    replay_path: Optional[Path] = None
    listen_port: Optional[int] = None
    speed: float = 1.0
    out_path: Optional[Path] = None
    serve_port: Optional[int] = None
    commands_path: Optional[Path] = None
    strict: bool = False
    linger: bool = False
    host: str = "127.0.0.1"

    def __post_init__(self):
        if (self.replay_path is None) == (self.listen_port is None):
            raise ConfigError("exactly one pose source (replay or listen) required")


def load_command_schedule(path) -> list[tuple[int, dict]]:
    """[{"at_frame": N, "cmd": {...}}, ...] sorted by frame index."""
    with open(path) as f:
        data = json.load(f)
    schedule = [(int(item["at_frame"]), dict(item["cmd"])) for item in data]
    return sorted(schedule, key=lambda x: x[0])


# ---------------------------------------------------------------------------
# publisher

class Subscriber:
    _ids = 0

    def __init__(self, writer: asyncio.StreamWriter, is_ws: bool):
        Subscriber._ids += 1
        self.id = Subscriber._ids
        self.writer = writer
        self.is_ws = is_ws
        self.queue: deque[tuple[bytes, bool]] = deque()
        self.wake = asyncio.Event()
        self.alive = True
        self.task: Optional[asyncio.Task] = None

    def _encode(self, msg: dict) -> bytes:
        payload = json.dumps(msg).encode()
        if self.is_ws:
            return wire.encode_frame(payload)
        return payload + b"\n"

    def send(self, msg: dict, droppable: bool = False):
        if not self.alive:
            return
        if len(self.queue) >= SUBSCRIBER_QUEUE_LIMIT:
            if droppable:
                for i, (_, d) in enumerate(self.queue):
                    if d:
                        del self.queue[i]
                        break
                else:
                    self.abort("queue full of undroppable messages")
                    return
            else:
                # never drop events; a subscriber that cannot keep up is cut
                self.abort("event backpressure")
                return
        self.queue.append((self._encode(msg), droppable))
        self.wake.set()

    def abort(self, reason: str):
        if self.alive:
            logger.warning("subscriber %d aborted: %s", self.id, reason)
        self.alive = False
        self.wake.set()

    async def writer_loop(self):
        try:
            while True:
                if not self.queue:
                    self.wake.clear()
                    await self.wake.wait()
                if not self.alive:
                    break
                if not self.queue:
                    continue
                data, _ = self.queue.popleft()
                self.writer.write(data)
                await self.writer.drain()
        except (ConnectionError, asyncio.CancelledError):
            pass
        finally:
            self.alive = False
            try:
                self.writer.close()
            except RuntimeError:
                pass


class Publisher:
    """Fans engine output out to subscribers; collects inbound commands."""

    def __init__(self, engine: Engine, inbox: asyncio.Queue):
        self.engine = engine
        self.inbox = inbox
        self.subscribers: dict[int, Subscriber] = {}

    def broadcast(self, result: FrameResult):
        ent_msg = entities_message(result)
        evt_msgs = [event_message(e) for e in result.events]
        for sub in list(self.subscribers.values()):
            sub.send(ent_msg, droppable=True)
            for msg in evt_msgs:
                sub.send(msg, droppable=False)
            if not sub.alive:
                self.subscribers.pop(sub.id, None)

    def send_ack(self, subscriber: Optional[Subscriber], ack: dict,
                 cmd_id=None):
        if subscriber is None or not subscriber.alive:
            return
        msg = {"type": "ack", **ack}
        if cmd_id is not None:
            msg["cmd_id"] = cmd_id
        subscriber.send(msg, droppable=False)

    async def handle_connection(self, reader: asyncio.StreamReader,
                                writer: asyncio.StreamWriter):
        stream = wire.BufferedStream(reader)
        # sniff the protocol: HTTP GET means WebSocket, else NDJSON/TCP
        try:
            await asyncio.wait_for(stream._fill(), timeout=0.25)
        except (asyncio.TimeoutError, ConnectionError):
            pass
        is_ws = bytes(stream._buf[:4]) == b"GET "
        if is_ws:
            try:
                head = await stream.read_until(b"\r\n\r\n")
            except (asyncio.IncompleteReadError, ValueError):
                writer.close()
                return
            if not await wire.websocket_handshake(stream, writer, head):
                writer.close()
                return
        sub = Subscriber(writer, is_ws)
        sub.task = asyncio.create_task(sub.writer_loop())
        self.subscribers[sub.id] = sub
        sub.send(self.engine.snapshot_message(), droppable=False)
        logger.info("subscriber %d connected (%s)", sub.id,
                    "websocket" if is_ws else "tcp")
        try:
            while sub.alive:
                if is_ws:
                    raw = await wire.read_message(stream, writer)
                    if raw is None:
                        break
                else:
                    raw = await stream.readline()
                    if not raw:
                        break
                text = raw.decode().strip()
                if not text:
                    continue
                try:
                    cmd = json.loads(text)
                except json.JSONDecodeError as exc:
                    self.send_ack(sub, {"ok": False, "error": f"bad JSON: {exc}"})
                    continue
                await self.inbox.put(("cmd", (cmd, sub)))
        except (ConnectionError, asyncio.IncompleteReadError):
            pass
        finally:
            sub.abort("connection closed")
            self.subscribers.pop(sub.id, None)


# ---------------------------------------------------------------------------
# engine runtime

class EngineRuntime:
    """Owns the engine loop; frames and commands arrive through one inbox."""

    def __init__(self, config: RuntimeConfig):
        self.config = config
        self.engine = Engine.from_files(config.calib_path, config.sensors_path)
        self.inbox: asyncio.Queue = asyncio.Queue(maxsize=64)
        self.publisher = Publisher(self.engine, self.inbox)
        self.schedule = (load_command_schedule(config.commands_path)
                         if config.commands_path else [])
        self._schedule_pos = 0
        self.out_file = None
        self.events_written = 0
        self.frames_processed = 0
        self.replay_done = asyncio.Event()
        self.started = asyncio.Event()
        self.bound_serve_port: Optional[int] = None
        self.bound_listen_port: Optional[int] = None

    # -- frame handling ----------------------------------------------------

    def _apply_scheduled(self, frame_index: int):
        while (self._schedule_pos < len(self.schedule)
               and self.schedule[self._schedule_pos][0] <= frame_index):
            _, cmd = self.schedule[self._schedule_pos]
            self._schedule_pos += 1
            ack = self.engine.apply_command(cmd)
            logger.info("scheduled command %s -> %s", cmd.get("cmd"), ack)

    def _process_group(self, group: list[PoseFrame]):
        self._apply_scheduled(self.engine.frame_index)
        try:
            result = self.engine.step(group)
        except StreamError as exc:
            logger.warning("skipping bad fused frame: %s", exc)
            if self.config.strict:
                raise
            return
        self.frames_processed += 1
        if self.out_file:
            for event in result.events:
                self.out_file.write(json.dumps(event.to_json_dict()))
                self.out_file.write("\n")
                self.events_written += 1
        self.publisher.broadcast(result)

    def _drain_schedule(self):
        self._apply_scheduled(float("inf"))

    # -- sources -------------------------------------------------------------

    async def _replay_task(self):
        config = self.config
        grouper = FrameGrouper()
        prev_t: Optional[float] = None
        with open(config.replay_path) as f:
            for line_no, line in enumerate(f, 1):
                line = line.strip()
                if not line:
                    continue
                try:
                    frame = parse_pose_frame(json.loads(line))
                    groups = grouper.push(frame)
                except (StreamError, json.JSONDecodeError) as exc:
                    if self.config.strict:
                        raise StreamError(f"line {line_no}: {exc}") from exc
                    logger.warning("skipping line %d: %s", line_no, exc)
                    continue
                for group in groups:
                    t = group[0].t_s
                    if config.speed > 0 and prev_t is not None:
                        await asyncio.sleep(max(0.0, (t - prev_t) / config.speed))
                    prev_t = t
                    await self.inbox.put(("frames", group))
        for group in grouper.flush():
            await self.inbox.put(("frames", group))
        await self.inbox.put(("eof", None))

    async def _ingest_connection(self, reader, writer):
        stream = wire.BufferedStream(reader)
        peer = writer.get_extra_info("peername")
        logger.info("pose ingest connected: %s", peer)
        try:
            while True:
                raw = await stream.readline()
                if not raw:
                    break
                text = raw.decode().strip()
                if not text:
                    continue
                try:
                    frame = parse_pose_frame(json.loads(text))
                except (StreamError, json.JSONDecodeError) as exc:
                    logger.warning("bad ingest line: %s", exc)
                    continue
                await self.inbox.put(("pose", frame))
        except ConnectionError:
            pass
        finally:
            writer.close()
            logger.info("pose ingest disconnected: %s", peer)

    # -- main loop -----------------------------------------------------------

    async def run(self) -> int:
        config = self.config
        servers = []
        tasks = []
        if config.out_path:
            self.out_file = open(config.out_path, "w")
        try:
            if config.serve_port is not None:
                server = await asyncio.start_server(
                    self.publisher.handle_connection, config.host,
                    config.serve_port)
                servers.append(server)
                self.bound_serve_port = server.sockets[0].getsockname()[1]
                logger.info("serving subscribers on %s:%d", config.host,
                            self.bound_serve_port)
            self._live_grouper = FrameGrouper()
            if config.listen_port is not None:
                server = await asyncio.start_server(
                    self._ingest_connection, config.host, config.listen_port)
                servers.append(server)
                self.bound_listen_port = server.sockets[0].getsockname()[1]
                logger.info("listening for poses on %s:%d", config.host,
                            self.bound_listen_port)
            else:
                tasks.append(asyncio.create_task(self._replay_task()))
            self.started.set()

            eof = False
            while True:
                if eof and not config.linger and self.inbox.empty():
                    break
                try:
                    kind, payload = await asyncio.wait_for(
                        self.inbox.get(), timeout=0.1 if eof else None)
                except asyncio.TimeoutError:
                    continue
                if kind == "cmd":
                    cmd, sub = payload
                    ack = self.engine.apply_command(cmd)
                    self.publisher.send_ack(sub, ack, cmd.get("cmd_id"))
                elif kind == "frames":
                    self._process_group(payload)
                elif kind == "pose":
                    try:
                        groups = self._live_grouper.push(payload)
                    except StreamError as exc:
                        if config.strict:
                            raise
                        logger.warning("dropping pose frame: %s", exc)
                        continue
                    for group in groups:
                        self._process_group(group)
                elif kind == "eof":
                    for group in self._live_grouper.flush():
                        self._process_group(group)
                    self._drain_schedule()
                    self.replay_done.set()
                    eof = True
                    if self.out_file:
                        self.out_file.flush()
                    logger.info("replay finished: %d frames, %d events",
                                self.frames_processed, self.events_written)
            return 0
        finally:
            for task in tasks:
                task.cancel()
            for server in servers:
                server.close()
                await server.wait_closed()
            for sub in list(self.publisher.subscribers.values()):
                sub.abort("engine shutdown")
            if self.out_file:
                self.out_file.close()


def run_engine(config: RuntimeConfig) -> int:
    """Blocking entry point; returns a process exit status."""
    try:
        return asyncio.run(EngineRuntime(config).run())
    except KeyboardInterrupt:
        return 130
    except BirdsEyeError as exc:
        logger.error("engine failed: %s", exc)
        return 1


# ---------------------------------------------------------------------------
# control client

async def send_command_async(host: str, port: int, cmd: dict,
                             timeout: float = 10.0) -> dict:
    """Connect as a plain TCP peer, issue one command, return its ack."""
    reader, writer = await asyncio.open_connection(host, port)
    stream = wire.BufferedStream(reader)
    try:
        writer.write((json.dumps(cmd) + "\n").encode())
        await writer.drain()

        async def wait_ack():
            while True:
                raw = await stream.readline()
                if not raw:
                    raise ConnectionError("server closed before ack")
                msg = json.loads(raw)
                if msg.get("type") == "ack":
                    return msg

        return await asyncio.wait_for(wait_ack(), timeout)
    finally:
        writer.close()


def send_command(host: str, port: int, cmd: dict, timeout: float = 10.0) -> dict:
    return asyncio.run(send_command_async(host, port, cmd, timeout))
