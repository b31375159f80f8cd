/**
 * Engine connection: applies every server message to the model, stamps
 * outgoing commands, and resyncs automatically after a dropped connection
 * (the engine sends a fresh snapshot on every connect).
 */

import type { ConsoleModel } from "./model.js";
import type { AckMsg, Command } from "./protocol.js";
import { parseServerMsg } from "./protocol.js";

/** The subset of the WebSocket API the client needs (test-injectable). */
export interface SocketLike {
  send(data: string): void;
  close(): void;
  // eslint-style `any` keeps both browser WebSocket and ws assignable
  onopen: ((ev?: any) => void) | null;
  onclose: ((ev?: any) => void) | null;
  onmessage: ((ev: any) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

const RECONNECT_DELAY_MS = 1000;

export class EngineClient {
  private socket: SocketLike | null = null;
  private closed = false;
  private reconnectTimer: ReturnType<typeof setTimeout> | null = null;
  onchange: () => void = () => {};

  constructor(
    private url: string,
    private model: ConsoleModel,
    private factory: SocketFactory,
  ) {}

  connect(): void {
    this.closed = false;
    this.open();
  }

  private open(): void {
    const socket = this.factory(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.model.connected = true;
      this.onchange();
    };
    socket.onmessage = (ev) => {
      const msg = parseServerMsg(String(ev.data));
      if (msg) {
        this.model.apply(msg);
        this.onchange();
      }
    };
    socket.onclose = () => {
      this.model.connected = false;
      this.onchange();
      if (!this.closed) this.scheduleReconnect();
    };
  }

  private scheduleReconnect(): void {
    if (this.reconnectTimer !== null) return;
    this.reconnectTimer = setTimeout(() => {
      this.reconnectTimer = null;
      if (!this.closed) this.open();
    }, RECONNECT_DELAY_MS);
  }

  /** Send a command; the promise resolves with the engine's ack. */
  send(command: Command): Promise<AckMsg> {
    return new Promise((resolve, reject) => {
      if (!this.socket || !this.model.connected) {
        reject(new Error("not connected"));
        return;
      }
      const stamped = this.model.prepare(command, resolve);
      this.socket.send(JSON.stringify(stamped));
    });
  }

  close(): void {
    this.closed = true;
    if (this.reconnectTimer !== null) clearTimeout(this.reconnectTimer);
    this.socket?.close();
  }
}
