/**
 * Console state: the latest engine snapshot plus applied deltas. Rendering
 * reads this model only; the model changes engine configuration exclusively
 * through commands and reconciles itself from the engine's acks (no
 * optimistic config commits).
 */

import type {
  AckMsg,
  Command,
  EntityDto,
  EventRecord,
  SensorDto,
  ServerMsg,
} from "./protocol.js";

export interface TickerEntry {
  t: number;
  text: string;
}

interface PendingCommand {
  command: Command;
  resolve: (ack: AckMsg) => void;
}

const TICKER_LIMIT = 200;
const FLASH_SECONDS = 0.6;

export class ConsoleModel {
  connected = false;
  snapshotAt: number | null = null;
  streamT = 0;
  sensors = new Map<string, SensorDto>();
  entities: EntityDto[] = [];
  flags: Record<string, boolean> = {};
  robotSpeed = 1.0;
  ticker: TickerEntry[] = [];

  /** entities currently inside, per sensor (driven by enter/leave events) */
  private occupants = new Map<string, Set<number>>();
  /** stream time of the last event per sensor, for flash styling */
  private lastEventT = new Map<string, number>();
  /** live teach recording overlay */
  teachEntity: number | null = null;
  teachTrace: [number, number][] = [];

  private nextCmdId = 1;
  private pending = new Map<number, PendingCommand>();

  // -- inbound --------------------------------------------------------------

  apply(msg: ServerMsg): void {
    switch (msg.type) {
      case "snapshot":
        this.snapshotAt = Date.now();
        this.sensors = new Map(msg.sensors.map((s) => [s.id, s]));
        this.entities = msg.entities;
        this.flags = msg.flags;
        this.robotSpeed = msg.robot_speed;
        this.occupants.clear();
        this.lastEventT.clear();
        if (msg.t !== null) this.streamT = msg.t;
        break;
      case "entities":
        this.streamT = msg.t;
        this.entities = msg.entities;
        this.flags = msg.flags;
        this.robotSpeed = msg.robot_speed;
        this.recordTeachTrace();
        break;
      case "event":
        this.applyEvent(msg.event);
        break;
      case "ack":
        this.applyAck(msg);
        break;
    }
  }

  private applyEvent(ev: EventRecord): void {
    this.streamT = Math.max(this.streamT, ev.t);
    this.lastEventT.set(ev.sensor_id, ev.t);
    if (ev.entity_id !== null) {
      const occupied = this.occupants.get(ev.sensor_id) ?? new Set<number>();
      if (ev.type === "enter") occupied.add(ev.entity_id);
      if (ev.type === "leave") occupied.delete(ev.entity_id);
      this.occupants.set(ev.sensor_id, occupied);
    }
    const extra =
      ev.type === "crossed" ? ` dir ${ev.direction}` :
      ev.type === "proximity_level" ? ` level ${ev.level}` : "";
    this.ticker.unshift({
      t: ev.t,
      text: `[${ev.t.toFixed(2)}s] ${ev.sensor_id} ${ev.type}` +
        `${extra}${ev.entity_id !== null ? ` (entity ${ev.entity_id})` : ""}`,
    });
    if (this.ticker.length > TICKER_LIMIT) this.ticker.pop();
  }

  private applyAck(msg: AckMsg): void {
    if (msg.cmd_id === undefined) return;
    const pending = this.pending.get(msg.cmd_id);
    if (!pending) return;
    this.pending.delete(msg.cmd_id);
    if (msg.ok) this.reconcile(pending.command, msg);
    pending.resolve(msg);
  }

  private recordTeachTrace(): void {
    if (this.teachEntity === null) return;
    const entity = this.entities.find((e) => e.id === this.teachEntity);
    if (!entity) return;
    const last = this.teachTrace[this.teachTrace.length - 1];
    if (!last || Math.hypot(last[0] - entity.position_m[0],
                            last[1] - entity.position_m[1]) >= 0.02) {
      this.teachTrace.push([entity.position_m[0], entity.position_m[1]]);
    }
  }

  /** Fold a confirmed command result into the rendered configuration. */
  private reconcile(command: Command, ack: AckMsg): void {
    const result = ack.result ?? {};
    switch (command.cmd) {
      case "arm":
      case "disarm": {
        const sensor = this.sensors.get(command.sensor_id);
        if (sensor) sensor.armed = Boolean(result["armed"]);
        break;
      }
      case "remove_sensor":
        this.sensors.delete(command.sensor_id);
        this.occupants.delete(command.sensor_id);
        break;
      case "add_sensor":
      case "teach_stop": {
        const confirmed = result["sensor"] as SensorDto | undefined;
        if (confirmed) this.sensors.set(confirmed.id, confirmed);
        if (command.cmd === "teach_stop") {
          this.teachEntity = null;
          this.teachTrace = [];
        }
        break;
      }
      case "teach_start":
        this.teachEntity = (result["entity_id"] as number) ?? null;
        this.teachTrace = [];
        break;
      case "save_sensors":
        break;
    }
  }

  // -- outbound ---------------------------------------------------------------

  /** Stamp a command with a cmd_id and register its ack continuation. */
  prepare(command: Command, resolve: (ack: AckMsg) => void = () => {}):
      Command {
    const cmdId = this.nextCmdId++;
    const stamped = { ...command, cmd_id: cmdId };
    this.pending.set(cmdId, { command, resolve });
    return stamped;
  }

  // -- render state -------------------------------------------------------

  isOccupied(sensorId: string): boolean {
    return (this.occupants.get(sensorId)?.size ?? 0) > 0;
  }

  isFlashing(sensorId: string): boolean {
    const t = this.lastEventT.get(sensorId);
    return t !== undefined && this.streamT - t < FLASH_SECONDS;
  }
}
