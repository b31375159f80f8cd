/**
 * Sensor authoring: pointer gestures in metric space become sensor configs.
 *
 *  - rectangle: press-drag-release
 *  - polygon:   click per vertex, finish() (double-click / Enter) to close
 *  - barrier:   two clicks
 *
 * Drafts are validated client-side (simplicity, minimum size) before they are
 * offered as an add_sensor command; the engine remains the authority.
 */

import { dist, isSimplePolygon, signedArea, toCcw } from "./geometry.js";
import type { Point } from "./viewport.js";
import type { EntityClass, SensorDto, SensorKind } from "./protocol.js";

export type DraftKind = "rectangle" | "polygon" | "barrier";

export interface DraftState {
  kind: DraftKind;
  points: Point[];
  cursor: Point | null;
  complete: boolean;
  error: string | null;
}

const MIN_AREA_M2 = 0.01;
const MIN_BARRIER_M = 0.01;

export class SensorDraft {
  points: Point[] = [];
  cursor: Point | null = null;
  complete = false;
  error: string | null = null;

  constructor(public kind: DraftKind) {}

  pointerDown(p: Point): void {
    if (this.complete) return;
    this.error = null;
    if (this.kind === "rectangle") {
      this.points = [p];
    } else {
      this.points.push(p);
      if (this.kind === "barrier" && this.points.length === 2) {
        this.validate();
        this.complete = this.error === null;
        if (!this.complete) this.points.pop();
      }
    }
  }

  pointerMove(p: Point): void {
    if (!this.complete) this.cursor = p;
  }

  pointerUp(p: Point): void {
    if (this.kind !== "rectangle" || this.points.length !== 1 || this.complete) {
      return;
    }
    const a = this.points[0];
    this.points = [a, { x: p.x, y: a.y }, p, { x: a.x, y: p.y }];
    this.validate();
    this.complete = this.error === null;
    if (!this.complete) this.points = [];
  }

  /** Close a polygon draft (double-click / Enter). */
  finish(): void {
    if (this.kind !== "polygon" || this.complete) return;
    this.validate();
    this.complete = this.error === null;
  }

  private validate(): void {
    this.error = null;
    if (this.kind === "barrier") {
      if (this.points.length !== 2) {
        this.error = "a barrier needs exactly two points";
      } else if (dist(this.points[0], this.points[1]) <= MIN_BARRIER_M) {
        this.error = "barrier endpoints are too close";
      }
      return;
    }
    if (this.points.length < 3) {
      this.error = "a region needs at least three vertices";
      return;
    }
    if (!isSimplePolygon(this.points)) {
      this.error = "the outline crosses itself";
      return;
    }
    if (Math.abs(signedArea(this.points)) <= MIN_AREA_M2) {
      this.error = "the region is too small";
    }
  }

  /** Engine-facing sensor config, or null while the draft is unfinished. */
  toSensor(id: string, classes: EntityClass[] = ["human"]): SensorDto | null {
    if (!this.complete) return null;
    if (this.kind === "barrier") {
      return {
        id,
        kind: "barrier" as SensorKind,
        classes,
        armed: true,
        debounce_on_s: 0.1,
        debounce_off_s: 0.25,
        a_m: [this.points[0].x, this.points[0].y],
        b_m: [this.points[1].x, this.points[1].y],
      };
    }
    const ccw = toCcw(this.points);
    return {
      id,
      kind: "mat",
      classes,
      armed: true,
      debounce_on_s: 0.1,
      debounce_off_s: 0.25,
      polygon_m: ccw.map((p) => [p.x, p.y] as [number, number]),
    };
  }

  state(): DraftState {
    return {
      kind: this.kind,
      points: [...this.points],
      cursor: this.cursor,
      complete: this.complete,
      error: this.error,
    };
  }
}
