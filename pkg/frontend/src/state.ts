// Editor light-list state. Every mutation clamps into the service's valid
// parameter ranges so any state is expressible as a valid light map document.

import {
  AMBIENT_MAX,
  DEFAULT_LIGHT,
  ELM_HEIGHT,
  ELM_WIDTH,
  ElmDoc,
  GaussianLight,
  INTENSITY_MAX,
  SIGMA2_MAX,
  SIGMA2_MIN,
} from "./types.js";

const clamp = (v: number, lo: number, hi: number) => Math.min(Math.max(v, lo), hi);

export function clampLight(light: GaussianLight): GaussianLight {
  return {
    x: clamp(light.x, 0, 1),
    y: clamp(light.y, 0, 1),
    intensity: clamp(light.intensity, 0, INTENSITY_MAX),
    sigma2: clamp(light.sigma2, SIGMA2_MIN, SIGMA2_MAX),
  };
}

export class EditorState {
  lights: GaussianLight[] = [];
  ambient = 0.0;
  selected = -1;

  addLight(x: number, y: number): number {
    this.lights.push(clampLight({ x, y, ...DEFAULT_LIGHT }));
    this.selected = this.lights.length - 1;
    return this.selected;
  }

  moveLight(index: number, x: number, y: number): void {
    const light = this.lights[index];
    if (!light) return;
    this.lights[index] = clampLight({ ...light, x, y });
  }

  /** Wheel gesture: scales sigma^2; with the modifier, intensity instead. */
  adjustLight(index: number, factor: number, intensity: boolean): void {
    const light = this.lights[index];
    if (!light) return;
    this.lights[index] = clampLight(
      intensity
        ? { ...light, intensity: light.intensity * factor }
        : { ...light, sigma2: light.sigma2 * factor },
    );
  }

  removeLight(index: number): void {
    this.lights.splice(index, 1);
    if (this.selected >= this.lights.length) this.selected = this.lights.length - 1;
  }

  setAmbient(value: number): void {
    this.ambient = clamp(value, 0, AMBIENT_MAX);
  }

  toDoc(): ElmDoc {
    return {
      width: ELM_WIDTH,
      height: ELM_HEIGHT,
      ambient: this.ambient,
      lights: this.lights.map((l) => ({ ...l })),
    };
  }

  loadDoc(doc: ElmDoc): void {
    this.ambient = clamp(doc.ambient ?? 0, 0, AMBIENT_MAX);
    this.lights = (doc.lights ?? []).map(clampLight);
    this.selected = -1;
  }

  serialize(): string {
    return JSON.stringify(this.toDoc());
  }

  static parse(text: string): EditorState {
    const state = new EditorState();
    state.loadDoc(JSON.parse(text) as ElmDoc);
    return state;
  }
}
