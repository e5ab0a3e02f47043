import { describe, expect, it } from "vitest";

import { belowHorizon, canvasToNormalized, normalizedToCanvas, pickLight } from "../src/coords.js";

const SIZE = { width: 512, height: 256 };

describe("canvas coordinate mapping", () => {
  it("maps the canvas center-top to (0.5, 0.25) within a pixel", () => {
    const { x, y } = canvasToNormalized(256, 64, SIZE);
    expect(Math.abs(x - 0.5)).toBeLessThanOrEqual(1 / 512);
    expect(Math.abs(y - 0.25)).toBeLessThanOrEqual(1 / 256);
  });

  it("is the inverse of normalizedToCanvas", () => {
    for (const [x, y] of [[0.1, 0.9], [0.73, 0.25], [0.0, 0.0]] as const) {
      const { px, py } = normalizedToCanvas(x, y, SIZE);
      const back = canvasToNormalized(px, py, SIZE);
      expect(back.x).toBeCloseTo(x, 10);
      expect(back.y).toBeCloseTo(y, 10);
    }
  });

  it("clamps clicks outside the canvas", () => {
    expect(canvasToNormalized(-40, 9999, SIZE)).toEqual({ x: 0, y: 1 });
  });

  it("picks the nearest light handle, wrapping the azimuth seam", () => {
    const lights = [
      { x: 0.01, y: 0.3 },
      { x: 0.6, y: 0.3 },
    ];
    expect(pickLight(5, 77, lights, SIZE)).toBe(0);
    expect(pickLight(0.6 * 512, 77, lights, SIZE)).toBe(1);
    // click just left of the seam still reaches the light at x=0.01
    expect(pickLight(510, 77, lights, SIZE)).toBe(0);
    expect(pickLight(200, 200, lights, SIZE)).toBe(-1);
  });

  it("flags positions on or below the horizon", () => {
    expect(belowHorizon(0.49)).toBe(false);
    expect(belowHorizon(0.5)).toBe(true);
    expect(belowHorizon(0.9)).toBe(true);
  });
});
