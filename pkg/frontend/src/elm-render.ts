// Client-side preview of the Gaussian mixture, mirroring the service's
// rasterization (wrapping azimuth, 3-sigma truncation). Returns raw float
// values; the canvas layer tone-maps them for display.

import { ElmDoc } from "./types.js";

export function rasterizeMixture(
  doc: ElmDoc,
  width: number,
  height: number,
): Float32Array {
  const out = new Float32Array(width * height).fill(doc.ambient);
  for (const light of doc.lights) {
    const cutoff = 9 * light.sigma2;
    const inv = 1 / (2 * light.sigma2);
    for (let row = 0; row < height; row++) {
      const v = (row + 0.5) / height;
      const dy = v - light.y;
      const dy2 = dy * dy;
      if (dy2 > cutoff) continue;
      for (let col = 0; col < width; col++) {
        const u = (col + 0.5) / width;
        let du = Math.abs(u - light.x);
        du = Math.min(du, 1 - du);
        const d2 = du * du + dy2;
        if (d2 <= cutoff) {
          out[row * width + col] += light.intensity * Math.exp(-d2 * inv);
        }
      }
    }
  }
  return out;
}

/** Tone-map raster values into 8-bit grayscale RGBA for an ImageData buffer. */
export function toRgba(values: Float32Array, peak?: number): Uint8ClampedArray<ArrayBuffer> {
  const maxVal = peak ?? values.reduce((a, b) => Math.max(a, b), 0);
  const rgba = new Uint8ClampedArray(values.length * 4);
  const scale = maxVal > 0 ? 255 / maxVal : 0;
  for (let i = 0; i < values.length; i++) {
    const g = values[i] * scale;
    rgba[4 * i] = g;
    rgba[4 * i + 1] = g;
    rgba[4 * i + 2] = g;
    rgba[4 * i + 3] = 255;
  }
  return rgba;
}
