/**
 * Metric <-> screen transform. World coordinates are meters with y up;
 * screen coordinates are CSS pixels with y down. The viewport keeps the
 * world anchor that maps to the screen center, plus pixels-per-meter zoom.
 */

export interface Point {
  x: number;
  y: number;
}

export class Viewport {
  constructor(
    public widthPx: number,
    public heightPx: number,
    public centerM: Point = { x: 0, y: 2.5 },
    public pxPerM = 120,
  ) {}

  resize(widthPx: number, heightPx: number): void {
    this.widthPx = widthPx;
    this.heightPx = heightPx;
  }

  toScreen(p: Point): Point {
    return {
      x: this.widthPx / 2 + (p.x - this.centerM.x) * this.pxPerM,
      y: this.heightPx / 2 - (p.y - this.centerM.y) * this.pxPerM,
    };
  }

  toMetric(s: Point): Point {
    return {
      x: this.centerM.x + (s.x - this.widthPx / 2) / this.pxPerM,
      y: this.centerM.y - (s.y - this.heightPx / 2) / this.pxPerM,
    };
  }

  /** Pan by a screen-space delta (e.g. a pointer drag). */
  panByScreen(dxPx: number, dyPx: number): void {
    this.centerM = {
      x: this.centerM.x - dxPx / this.pxPerM,
      y: this.centerM.y + dyPx / this.pxPerM,
    };
  }

  /** Zoom by a factor, keeping the metric point under `anchorPx` fixed. */
  zoomAt(anchorPx: Point, factor: number): void {
    const before = this.toMetric(anchorPx);
    this.pxPerM = Math.min(2000, Math.max(5, this.pxPerM * factor));
    const after = this.toMetric(anchorPx);
    this.centerM = {
      x: this.centerM.x + (before.x - after.x),
      y: this.centerM.y + (before.y - after.y),
    };
  }
}
