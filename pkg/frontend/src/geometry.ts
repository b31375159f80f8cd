/** Small planar helpers used by sensor authoring validation. */

import type { Point } from "./viewport.js";

export function signedArea(poly: Point[]): number {
  let area = 0;
  for (let i = 0; i < poly.length; i++) {
    const a = poly[i];
    const b = poly[(i + 1) % poly.length];
    area += a.x * b.y - b.x * a.y;
  }
  return area / 2;
}

function cross(ox: number, oy: number, ax: number, ay: number): number {
  return ox * ay - oy * ax;
}

function properIntersection(p0: Point, p1: Point, q0: Point, q1: Point): boolean {
  const d1 = cross(q1.x - q0.x, q1.y - q0.y, p0.x - q0.x, p0.y - q0.y);
  const d2 = cross(q1.x - q0.x, q1.y - q0.y, p1.x - q0.x, p1.y - q0.y);
  const d3 = cross(p1.x - p0.x, p1.y - p0.y, q0.x - p0.x, q0.y - p0.y);
  const d4 = cross(p1.x - p0.x, p1.y - p0.y, q1.x - p0.x, q1.y - p0.y);
  return d1 * d2 < 0 && d3 * d4 < 0;
}

/** True when no two non-adjacent edges of the closed polygon intersect. */
export function isSimplePolygon(poly: Point[]): boolean {
  const n = poly.length;
  if (n < 3) return false;
  for (let i = 0; i < n; i++) {
    for (let j = i + 1; j < n; j++) {
      if (j === i || (j + 1) % n === i || (i + 1) % n === j) continue;
      const a0 = poly[i];
      const a1 = poly[(i + 1) % n];
      const b0 = poly[j];
      const b1 = poly[(j + 1) % n];
      if (properIntersection(a0, a1, b0, b1)) return false;
    }
  }
  return true;
}

/** Counter-clockwise copy of the polygon (the engine's storage order). */
export function toCcw(poly: Point[]): Point[] {
  return signedArea(poly) < 0 ? [...poly].reverse() : [...poly];
}

export function dist(a: Point, b: Point): number {
  return Math.hypot(a.x - b.x, a.y - b.y);
}
