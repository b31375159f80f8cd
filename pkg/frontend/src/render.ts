/** Canvas painter: draws the model through a viewport. No state of its own. */

import type { ConsoleModel } from "./model.js";
import type { DraftState } from "./authoring.js";
import type { EntityDto, SensorDto } from "./protocol.js";
import type { Point, Viewport } from "./viewport.js";

const COLORS = {
  grid: "#2a2f36",
  axis: "#3d444d",
  matIdle: "rgba(80, 160, 255, 0.25)",
  matOccupied: "rgba(80, 255, 140, 0.45)",
  matFlash: "rgba(255, 220, 80, 0.6)",
  disarmed: "rgba(128, 128, 128, 0.18)",
  outline: "#7fb4ff",
  outlineDisarmed: "#6a6f76",
  barrier: "#ff8c5a",
  proximity: "#b48cff",
  human: "#5ad1ff",
  robot: "#ffb35a",
  teach: "#5aff9e",
  draft: "#ffffff",
  draftBad: "#ff5a5a",
};

export function drawScene(
  ctx: CanvasRenderingContext2D,
  vp: Viewport,
  model: ConsoleModel,
  draft: DraftState | null,
): void {
  ctx.clearRect(0, 0, vp.widthPx, vp.heightPx);
  drawGrid(ctx, vp);
  for (const sensor of model.sensors.values()) {
    drawSensor(ctx, vp, sensor, model);
  }
  if (model.teachTrace.length > 1) {
    drawPolyline(ctx, vp, model.teachTrace.map(([x, y]) => ({ x, y })),
                 COLORS.teach, 2, [6, 4]);
  }
  for (const entity of model.entities) {
    drawEntity(ctx, vp, entity);
  }
  if (draft) drawDraft(ctx, vp, draft);
}

function drawGrid(ctx: CanvasRenderingContext2D, vp: Viewport): void {
  const topLeft = vp.toMetric({ x: 0, y: 0 });
  const bottomRight = vp.toMetric({ x: vp.widthPx, y: vp.heightPx });
  ctx.lineWidth = 1;
  for (let x = Math.floor(topLeft.x); x <= Math.ceil(bottomRight.x); x++) {
    const s0 = vp.toScreen({ x, y: topLeft.y });
    const s1 = vp.toScreen({ x, y: bottomRight.y });
    ctx.strokeStyle = x === 0 ? COLORS.axis : COLORS.grid;
    line(ctx, s0, s1);
  }
  for (let y = Math.ceil(bottomRight.y); y <= Math.floor(topLeft.y); y++) {
    const s0 = vp.toScreen({ x: topLeft.x, y });
    const s1 = vp.toScreen({ x: bottomRight.x, y });
    ctx.strokeStyle = y === 0 ? COLORS.axis : COLORS.grid;
    line(ctx, s0, s1);
  }
}

function drawSensor(ctx: CanvasRenderingContext2D, vp: Viewport,
                    sensor: SensorDto, model: ConsoleModel): void {
  const occupied = model.isOccupied(sensor.id);
  const flashing = model.isFlashing(sensor.id);
  const fill = !sensor.armed ? COLORS.disarmed
    : flashing ? COLORS.matFlash
    : occupied ? COLORS.matOccupied
    : COLORS.matIdle;
  const stroke = sensor.armed ? COLORS.outline : COLORS.outlineDisarmed;
  ctx.setLineDash(sensor.armed ? [] : [5, 5]);

  if (sensor.polygon_m) {
    const pts = sensor.polygon_m.map(([x, y]) => vp.toScreen({ x, y }));
    ctx.beginPath();
    pts.forEach((p, i) => (i ? ctx.lineTo(p.x, p.y) : ctx.moveTo(p.x, p.y)));
    ctx.closePath();
    ctx.fillStyle = fill;
    ctx.fill();
    ctx.strokeStyle = stroke;
    ctx.lineWidth = 2;
    ctx.stroke();
    if (sensor.facing_dir) {
      const c = centroid(sensor.polygon_m);
      arrow(ctx, vp.toScreen(c),
            vp.toScreen({ x: c.x + sensor.facing_dir[0] * 0.5,
                          y: c.y + sensor.facing_dir[1] * 0.5 }),
            stroke);
    }
  } else if (sensor.a_m && sensor.b_m) {
    ctx.strokeStyle = flashing ? COLORS.matFlash : COLORS.barrier;
    ctx.lineWidth = 3;
    line(ctx, vp.toScreen({ x: sensor.a_m[0], y: sensor.a_m[1] }),
         vp.toScreen({ x: sensor.b_m[0], y: sensor.b_m[1] }));
  } else if (sensor.levels_m) {
    const anchors = proximityAnchors(sensor, model);
    ctx.lineWidth = 1.5;
    for (const anchor of anchors) {
      for (const radius of sensor.levels_m) {
        ctx.strokeStyle = flashing ? COLORS.matFlash : COLORS.proximity;
        ctx.beginPath();
        const c = vp.toScreen(anchor);
        ctx.arc(c.x, c.y, radius * vp.pxPerM, 0, 2 * Math.PI);
        ctx.stroke();
      }
    }
  }
  ctx.setLineDash([]);

  const label = labelAnchor(sensor, model);
  if (label) {
    const s = vp.toScreen(label);
    ctx.fillStyle = stroke;
    ctx.font = "12px sans-serif";
    ctx.fillText(sensor.id, s.x + 4, s.y - 4);
  }
}

function proximityAnchors(sensor: SensorDto, model: ConsoleModel): Point[] {
  const anchor = sensor.anchor;
  if (anchor && "static" in anchor) {
    return [{ x: anchor.static[0], y: anchor.static[1] }];
  }
  if (anchor && "dynamic" in anchor) {
    return model.entities
      .filter((e) => e.class === anchor.dynamic.class)
      .map((e) => ({ x: e.position_m[0], y: e.position_m[1] }));
  }
  return [];
}

function labelAnchor(sensor: SensorDto, model: ConsoleModel): Point | null {
  if (sensor.polygon_m) return centroid(sensor.polygon_m);
  if (sensor.a_m) return { x: sensor.a_m[0], y: sensor.a_m[1] };
  const anchors = proximityAnchors(sensor, model);
  return anchors[0] ?? null;
}

function drawEntity(ctx: CanvasRenderingContext2D, vp: Viewport,
                    entity: EntityDto): void {
  const color = entity.class === "human" ? COLORS.human : COLORS.robot;
  const c = vp.toScreen({ x: entity.position_m[0], y: entity.position_m[1] });
  const r = Math.max(5, 0.18 * vp.pxPerM);
  ctx.fillStyle = color;
  ctx.beginPath();
  if (entity.class === "human") {
    ctx.arc(c.x, c.y, r, 0, 2 * Math.PI);
  } else {
    ctx.rect(c.x - r, c.y - r, 2 * r, 2 * r);
  }
  ctx.fill();
  if (entity.orientation) {
    const tip = vp.toScreen({
      x: entity.position_m[0] + entity.orientation[0] * 0.45,
      y: entity.position_m[1] + entity.orientation[1] * 0.45,
    });
    arrow(ctx, c, tip, color);
  }
  ctx.fillStyle = "#dde2e8";
  ctx.font = "11px sans-serif";
  ctx.fillText(`${entity.class === "human" ? "H" : "R"}${entity.id}`,
               c.x + r + 3, c.y + 4);
}

function drawDraft(ctx: CanvasRenderingContext2D, vp: Viewport,
                   draft: DraftState): void {
  const color = draft.error ? COLORS.draftBad : COLORS.draft;
  const pts = [...draft.points];
  if (draft.cursor && !draft.complete && draft.kind !== "rectangle") {
    pts.push(draft.cursor);
  }
  if (pts.length >= 2) {
    drawPolyline(ctx, vp, pts, color, 1.5, [4, 4]);
    if (draft.complete && draft.kind !== "barrier") {
      line(ctx, vp.toScreen(pts[pts.length - 1]), vp.toScreen(pts[0]));
    }
  }
  for (const p of draft.points) {
    const s = vp.toScreen(p);
    ctx.fillStyle = color;
    ctx.fillRect(s.x - 3, s.y - 3, 6, 6);
  }
}

function drawPolyline(ctx: CanvasRenderingContext2D, vp: Viewport,
                      pts: Point[], color: string, width: number,
                      dash: number[]): void {
  ctx.strokeStyle = color;
  ctx.lineWidth = width;
  ctx.setLineDash(dash);
  ctx.beginPath();
  pts.forEach((p, i) => {
    const s = vp.toScreen(p);
    i ? ctx.lineTo(s.x, s.y) : ctx.moveTo(s.x, s.y);
  });
  ctx.stroke();
  ctx.setLineDash([]);
}

function line(ctx: CanvasRenderingContext2D, a: Point, b: Point): void {
  ctx.beginPath();
  ctx.moveTo(a.x, a.y);
  ctx.lineTo(b.x, b.y);
  ctx.stroke();
}

function arrow(ctx: CanvasRenderingContext2D, from: Point, to: Point,
               color: string): void {
  ctx.strokeStyle = color;
  ctx.lineWidth = 2;
  line(ctx, from, to);
  const angle = Math.atan2(to.y - from.y, to.x - from.x);
  const w = 6;
  ctx.beginPath();
  ctx.moveTo(to.x, to.y);
  ctx.lineTo(to.x - w * Math.cos(angle - 0.5), to.y - w * Math.sin(angle - 0.5));
  ctx.moveTo(to.x, to.y);
  ctx.lineTo(to.x - w * Math.cos(angle + 0.5), to.y - w * Math.sin(angle + 0.5));
  ctx.stroke();
}

function centroid(poly: [number, number][]): Point {
  let x = 0;
  let y = 0;
  for (const [px, py] of poly) {
    x += px;
    y += py;
  }
  return { x: x / poly.length, y: y / poly.length };
}
