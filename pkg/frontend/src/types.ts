// Light map schema shared with the service, plus the parameter ranges the
// editor enforces on every gesture.

export interface GaussianLight {
  x: number; // azimuth in [0, 1], periodic
  y: number; // polar in [0, 1], 0 = zenith row
  intensity: number; // [0, 3]
  sigma2: number; // (0, 0.1]
}

export interface ElmDoc {
  width: number;
  height: number;
  ambient: number;
  lights: GaussianLight[];
}

export const ELM_WIDTH = 512;
export const ELM_HEIGHT = 256;

export const INTENSITY_MAX = 3.0;
export const SIGMA2_MIN = 1e-4;
export const SIGMA2_MAX = 0.1;
export const AMBIENT_MAX = 0.05;

export const DEFAULT_LIGHT: Omit<GaussianLight, "x" | "y"> = {
  intensity: 2.0,
  sigma2: 0.01,
};
