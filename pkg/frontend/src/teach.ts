/**
 * Teach-by-demonstration controls: start recording a tracked entity, watch
 * the live trace grow on the map (the model collects it), and stop to turn
 * it into a named mat sensor. The stop control stays disabled until a
 * session is actually recording.
 */

import type { EngineClient } from "./client.js";
import type { ConsoleModel } from "./model.js";
import type { AckMsg } from "./protocol.js";

export class TeachControls {
  lastError: string | null = null;

  constructor(private client: EngineClient, private model: ConsoleModel) {}

  get recording(): boolean {
    return this.model.teachEntity !== null;
  }

  get canStart(): boolean {
    return !this.recording && this.model.entities.length > 0;
  }

  get canStop(): boolean {
    return this.recording;
  }

  async start(entityId: number): Promise<AckMsg> {
    const ack = await this.client.send({ cmd: "teach_start", entity_id: entityId });
    this.lastError = ack.ok ? null : ack.error ?? "teach start failed";
    return ack;
  }

  async stop(sensorId: string): Promise<AckMsg> {
    if (!this.canStop) {
      const ack: AckMsg = { type: "ack", ok: false, error: "not recording" };
      this.lastError = ack.error!;
      return ack;
    }
    const ack = await this.client.send({ cmd: "teach_stop", sensor_id: sensorId });
    this.lastError = ack.ok ? null : ack.error ?? "teach stop failed";
    if (ack.ok && ack.result && ack.result["hull_fallback"]) {
      this.lastError = "trace crossed itself: convex hull used";
    }
    return ack;
  }
}
