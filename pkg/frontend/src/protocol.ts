/**
 * Message and config types for the engine's wire protocol. The same JSON
 * schema travels over WebSocket (one message per text frame) and plain TCP
 * (one message per line); the console only uses the WebSocket flavor.
 */

export type EntityClass = "human" | "robot";

export interface EntityDto {
  id: number;
  class: EntityClass;
  position_m: [number, number];
  orientation: [number, number] | null;
  source: string;
  velocity_mps: [number, number];
}

export type SensorKind = "mat" | "barrier" | "proximity" | "oriented_mat";

export interface SensorDto {
  id: string;
  kind: SensorKind;
  classes: EntityClass[];
  armed: boolean;
  debounce_on_s: number;
  debounce_off_s: number;
  polygon_m?: [number, number][];
  a_m?: [number, number];
  b_m?: [number, number];
  anchor?: { static: [number, number] } | { dynamic: { class: EntityClass } };
  levels_m?: number[];
  hysteresis_m?: number;
  facing_dir?: [number, number];
  cone_half_angle_rad?: number;
}

export interface SnapshotMsg {
  type: "snapshot";
  t: number | null;
  sensors: SensorDto[];
  entities: EntityDto[];
  flags: Record<string, boolean>;
  robot_speed: number;
}

export interface EntitiesMsg {
  type: "entities";
  t: number;
  entities: EntityDto[];
  flags: Record<string, boolean>;
  robot_speed: number;
}

export type EventType = "enter" | "leave" | "crossed" | "proximity_level";

export interface EventRecord {
  t: number;
  sensor_id: string;
  entity_id: number | null;
  type: EventType;
  direction?: 1 | -1;
  level?: number;
  distance_m?: number | null;
}

export interface EventMsg {
  type: "event";
  event: EventRecord;
}

export interface AckMsg {
  type: "ack";
  ok: boolean;
  cmd?: string;
  cmd_id?: number;
  error?: string;
  result?: Record<string, unknown>;
}

export type ServerMsg = SnapshotMsg | EntitiesMsg | EventMsg | AckMsg;

export type Command =
  | { cmd: "arm" | "disarm" | "remove_sensor"; sensor_id: string; cmd_id?: number }
  | { cmd: "add_sensor"; sensor: SensorDto; cmd_id?: number }
  | { cmd: "teach_start"; entity_id: number; cmd_id?: number }
  | { cmd: "teach_stop"; sensor_id: string; cmd_id?: number }
  | { cmd: "save_sensors"; cmd_id?: number };

export function parseServerMsg(raw: string): ServerMsg | null {
  try {
    const msg = JSON.parse(raw);
    if (msg && typeof msg.type === "string") return msg as ServerMsg;
  } catch {
    /* tolerate garbage; the engine never sends it */
  }
  return null;
}
