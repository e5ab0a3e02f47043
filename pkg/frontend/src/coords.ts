// Canvas pixel <-> normalized panorama coordinate mapping. The ELM canvas
// renders the full 512x256 panorama scaled to its CSS size.

export interface CanvasSize {
  width: number;
  height: number;
}

export function canvasToNormalized(
  px: number,
  py: number,
  size: CanvasSize,
): { x: number; y: number } {
  const x = Math.min(Math.max(px / size.width, 0), 1);
  const y = Math.min(Math.max(py / size.height, 0), 1);
  return { x, y };
}

export function normalizedToCanvas(
  x: number,
  y: number,
  size: CanvasSize,
): { px: number; py: number } {
  return { px: x * size.width, py: y * size.height };
}

/** Hit test against light handles; returns the nearest index within reach. */
export function pickLight(
  px: number,
  py: number,
  lights: { x: number; y: number }[],
  size: CanvasSize,
  reachPx = 10,
): number {
  let best = -1;
  let bestDist = reachPx;
  lights.forEach((light, i) => {
    const at = normalizedToCanvas(light.x, light.y, size);
    // azimuth wraps: consider the mirrored position across the seam too
    const dxs = [at.px - px, at.px - px + size.width, at.px - px - size.width];
    for (const dx of dxs) {
      const d = Math.hypot(dx, at.py - py);
      if (d < bestDist) {
        bestDist = d;
        best = i;
      }
    }
  });
  return best;
}

/** True when a normalized position is below the shadow-casting half. */
export function belowHorizon(y: number): boolean {
  return y >= 0.5;
}
