/** Console entry point: wires the socket, model, canvas, and toolbar. */

import { EngineClient } from "./client.js";
import { ConsoleModel } from "./model.js";
import { SensorDraft, type DraftKind } from "./authoring.js";
import { TeachControls } from "./teach.js";
import { Viewport } from "./viewport.js";
import { drawScene } from "./render.js";

const params = new URLSearchParams(location.search);
const url = params.get("engine") ??
  `ws://${location.hostname || "127.0.0.1"}:${params.get("port") ?? "8080"}`;

const canvas = document.getElementById("map") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const statusEl = document.getElementById("status")!;
const tickerEl = document.getElementById("ticker")!;
const sensorsEl = document.getElementById("sensors")!;
const errorEl = document.getElementById("draft-error")!;

const model = new ConsoleModel();
const viewport = new Viewport(canvas.clientWidth, canvas.clientHeight);
const client = new EngineClient(url, model, (u) => new WebSocket(u));
const teach = new TeachControls(client, model);

let draft: SensorDraft | null = null;
let panFrom: { x: number; y: number } | null = null;
let sensorCounter = 1;

function resize(): void {
  canvas.width = canvas.clientWidth * devicePixelRatio;
  canvas.height = canvas.clientHeight * devicePixelRatio;
  ctx.setTransform(devicePixelRatio, 0, 0, devicePixelRatio, 0, 0);
  viewport.resize(canvas.clientWidth, canvas.clientHeight);
  redraw();
}

function redraw(): void {
  drawScene(ctx, viewport, model, draft?.state() ?? null);
  statusEl.textContent = model.connected
    ? `connected · t=${model.streamT.toFixed(2)}s · ` +
      `robot speed ${(model.robotSpeed * 100).toFixed(0)}% · ` +
      `flags ${JSON.stringify(model.flags)}`
    : "disconnected — retrying…";
  statusEl.className = model.connected ? "ok" : "bad";
  tickerEl.replaceChildren(...model.ticker.slice(0, 30).map((e) => {
    const li = document.createElement("li");
    li.textContent = e.text;
    return li;
  }));
  renderSensorList();
  errorEl.textContent = draft?.error ?? teach.lastError ?? "";
}

function renderSensorList(): void {
  sensorsEl.replaceChildren(...[...model.sensors.values()].map((s) => {
    const li = document.createElement("li");
    const armBtn = document.createElement("button");
    armBtn.textContent = s.armed ? "disarm" : "arm";
    armBtn.onclick = () =>
      client.send({ cmd: s.armed ? "disarm" : "arm", sensor_id: s.id })
        .then(redraw);
    const rmBtn = document.createElement("button");
    rmBtn.textContent = "✕";
    rmBtn.onclick = () =>
      client.send({ cmd: "remove_sensor", sensor_id: s.id }).then(redraw);
    const label = document.createElement("span");
    label.textContent = `${s.id} (${s.kind}${s.armed ? "" : ", disarmed"})`;
    li.append(label, armBtn, rmBtn);
    return li;
  }));
}

function metricPoint(ev: MouseEvent): { x: number; y: number } {
  const rect = canvas.getBoundingClientRect();
  return viewport.toMetric({ x: ev.clientX - rect.left, y: ev.clientY - rect.top });
}

canvas.addEventListener("mousedown", (ev) => {
  if (draft) {
    draft.pointerDown(metricPoint(ev));
  } else {
    panFrom = { x: ev.clientX, y: ev.clientY };
  }
  redraw();
});
canvas.addEventListener("mousemove", (ev) => {
  if (draft) {
    draft.pointerMove(metricPoint(ev));
    redraw();
  } else if (panFrom) {
    viewport.panByScreen(ev.clientX - panFrom.x, ev.clientY - panFrom.y);
    panFrom = { x: ev.clientX, y: ev.clientY };
    redraw();
  }
});
canvas.addEventListener("mouseup", (ev) => {
  panFrom = null;
  if (draft) {
    draft.pointerUp(metricPoint(ev));
    maybeSubmitDraft();
  }
});
canvas.addEventListener("dblclick", () => {
  draft?.finish();
  maybeSubmitDraft();
});
canvas.addEventListener("wheel", (ev) => {
  ev.preventDefault();
  const rect = canvas.getBoundingClientRect();
  viewport.zoomAt({ x: ev.clientX - rect.left, y: ev.clientY - rect.top },
                  ev.deltaY < 0 ? 1.15 : 1 / 1.15);
  redraw();
});

function maybeSubmitDraft(): void {
  if (!draft?.complete) {
    redraw();
    return;
  }
  const sensor = draft.toSensor(`drawn_${sensorCounter++}`);
  draft = null;
  if (sensor) {
    client.send({ cmd: "add_sensor", sensor })
      .then((ack) => {
        if (ack.ok) return client.send({ cmd: "save_sensors" });
        errorEl.textContent = ack.error ?? "add failed";
        return undefined;
      })
      .then(redraw);
  }
  redraw();
}

for (const kind of ["rectangle", "polygon", "barrier"] as DraftKind[]) {
  document.getElementById(`draw-${kind}`)!.addEventListener("click", () => {
    draft = new SensorDraft(kind);
    redraw();
  });
}
document.getElementById("draw-cancel")!.addEventListener("click", () => {
  draft = null;
  redraw();
});

document.getElementById("teach-start")!.addEventListener("click", () => {
  const first = model.entities.find((e) => e.class === "human");
  if (first) teach.start(first.id).then(redraw);
});
document.getElementById("teach-stop")!.addEventListener("click", () => {
  teach.stop(`taught_${sensorCounter++}`)
    .then((ack) => {
      if (ack.ok) return client.send({ cmd: "save_sensors" });
      return undefined;
    })
    .then(redraw);
});

window.addEventListener("resize", resize);
client.onchange = redraw;
client.connect();
resize();
