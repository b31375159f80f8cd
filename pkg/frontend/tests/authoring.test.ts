import { describe, expect, it } from "vitest";
import { SensorDraft } from "../src/authoring.js";
import { isSimplePolygon, signedArea, toCcw } from "../src/geometry.js";

describe("geometry validation", () => {
  it("detects self-intersection", () => {
    const bowtie = [
      { x: 0, y: 0 }, { x: 1, y: 1 }, { x: 1, y: 0 }, { x: 0, y: 1 },
    ];
    expect(isSimplePolygon(bowtie)).toBe(false);
    const square = [
      { x: 0, y: 0 }, { x: 1, y: 0 }, { x: 1, y: 1 }, { x: 0, y: 1 },
    ];
    expect(isSimplePolygon(square)).toBe(true);
  });

  it("orients polygons counter-clockwise", () => {
    const cw = [
      { x: 0, y: 0 }, { x: 0, y: 1 }, { x: 1, y: 1 }, { x: 1, y: 0 },
    ];
    expect(signedArea(cw)).toBeLessThan(0);
    expect(signedArea(toCcw(cw))).toBeGreaterThan(0);
  });
});

describe("SensorDraft", () => {
  it("builds a 4-vertex mat from a rectangle drag", () => {
    const draft = new SensorDraft("rectangle");
    draft.pointerDown({ x: 0, y: 0 });
    draft.pointerMove({ x: 1, y: 0.5 });
    draft.pointerUp({ x: 2, y: 1.5 });
    expect(draft.complete).toBe(true);
    const sensor = draft.toSensor("drawn_1")!;
    expect(sensor.kind).toBe("mat");
    expect(sensor.polygon_m).toHaveLength(4);
    expect(signedArea(sensor.polygon_m!.map(([x, y]) => ({ x, y }))))
      .toBeGreaterThan(0);
  });

  it("rejects a degenerate rectangle", () => {
    const draft = new SensorDraft("rectangle");
    draft.pointerDown({ x: 0, y: 0 });
    draft.pointerUp({ x: 0.05, y: 0.05 });
    expect(draft.complete).toBe(false);
    expect(draft.error).toContain("too small");
  });

  it("flags a self-intersecting polygon sketch inline", () => {
    const draft = new SensorDraft("polygon");
    for (const p of [{ x: 0, y: 0 }, { x: 1, y: 1 }, { x: 1, y: 0 },
                     { x: 0, y: 1 }]) {
      draft.pointerDown(p);
    }
    draft.finish();
    expect(draft.complete).toBe(false);
    expect(draft.error).toContain("crosses itself");
    expect(draft.toSensor("x")).toBeNull();
  });

  it("accepts a valid polygon sketch", () => {
    const draft = new SensorDraft("polygon");
    for (const p of [{ x: 0, y: 0 }, { x: 1.5, y: 0 }, { x: 1.5, y: 1 },
                     { x: 0, y: 1 }]) {
      draft.pointerDown(p);
    }
    draft.finish();
    expect(draft.complete).toBe(true);
    expect(draft.toSensor("poly")!.polygon_m).toHaveLength(4);
  });

  it("builds a barrier from two clicks", () => {
    const draft = new SensorDraft("barrier");
    draft.pointerDown({ x: 0, y: 0 });
    expect(draft.complete).toBe(false);
    draft.pointerDown({ x: 0, y: 2 });
    expect(draft.complete).toBe(true);
    const sensor = draft.toSensor("gate")!;
    expect(sensor.kind).toBe("barrier");
    expect(sensor.a_m).toEqual([0, 0]);
    expect(sensor.b_m).toEqual([0, 2]);
  });

  it("rejects a zero-length barrier", () => {
    const draft = new SensorDraft("barrier");
    draft.pointerDown({ x: 0, y: 0 });
    draft.pointerDown({ x: 0.005, y: 0 });
    expect(draft.complete).toBe(false);
    expect(draft.error).toContain("too close");
  });
});
