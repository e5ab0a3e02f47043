"""Environment light maps: 2D Gaussian mixtures over an equirectangular panorama.

Lights live in normalized [0,1]^2 panorama coordinates (x = azimuth with
wrap-around, y = polar from zenith). Only the top half of the panorama is
above the horizon and contributes to shadows; rasterization covers the full
map for display and weighting.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BoundsError, InvalidLightError

ELM_WIDTH = 512
ELM_HEIGHT = 256
PATCH_SIZE = 16
GRID_ROWS = (ELM_HEIGHT // 2) // PATCH_SIZE   # 8, top half only
GRID_COLS = ELM_WIDTH // PATCH_SIZE           # 32

# Sampling ranges for random light maps.
MAX_LIGHTS = 50
INTENSITY_RANGE = (0.0, 3.0)
SIGMA2_MAX = 0.1
AMBIENT_MAX = 0.05
TRUNCATION_SIGMAS = 3.0


@dataclass(frozen=True)
class GaussianLight:
    x: float          # azimuth in [0, 1], periodic
    y: float          # polar in [0, 1], 0 = zenith row
    intensity: float  # peak value, >= 0
    sigma2: float     # variance in normalized coords, > 0

    def validate(self) -> None:
        if not self.sigma2 > 0.0:
            raise InvalidLightError(f"sigma2 must be > 0, got {self.sigma2}")
        if self.intensity < 0.0:
            raise InvalidLightError(f"intensity must be >= 0, got {self.intensity}")


@dataclass(frozen=True)
class EnvLightMap:
    lights: tuple[GaussianLight, ...] = field(default_factory=tuple)
    ambient: float = 0.0
    width: int = ELM_WIDTH
    height: int = ELM_HEIGHT

    def to_json(self) -> str:
        doc = {
            "width": self.width,
            "height": self.height,
            "ambient": self.ambient,
            "lights": [
                {"x": l.x, "y": l.y, "intensity": l.intensity, "sigma2": l.sigma2}
                for l in self.lights
            ],
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "EnvLightMap":
        return cls.from_json_doc(json.loads(text))

    @classmethod
    def from_json_doc(cls, doc: dict) -> "EnvLightMap":
        lights = tuple(
            GaussianLight(
                x=float(l["x"]), y=float(l["y"]),
                intensity=float(l["intensity"]), sigma2=float(l["sigma2"]),
            )
            for l in doc.get("lights", [])
        )
        return cls(
            lights=lights,
            ambient=float(doc.get("ambient", 0.0)),
            width=int(doc.get("width", ELM_WIDTH)),
            height=int(doc.get("height", ELM_HEIGHT)),
        )


def rasterize_elm(elm: EnvLightMap) -> np.ndarray:
    """Evaluate the mixture at every pixel center -> float32 (height, width).

    Azimuth distance wraps; polar distance does not. Each Gaussian is
    truncated at 3 sigma to bound evaluation cost.
    """
    for light in elm.lights:
        light.validate()
    u = (np.arange(elm.width) + 0.5) / elm.width
    v = (np.arange(elm.height) + 0.5) / elm.height
    out = np.full((elm.height, elm.width), float(elm.ambient), dtype=np.float64)
    for light in elm.lights:
        du = np.abs(u - light.x)
        du = np.minimum(du, 1.0 - du)
        dv = v - light.y
        d2 = du[None, :] ** 2 + dv[:, None] ** 2
        cutoff = TRUNCATION_SIGMAS**2 * light.sigma2
        g = np.where(d2 <= cutoff, light.intensity * np.exp(-d2 / (2.0 * light.sigma2)), 0.0)
        out += g
    return out.astype(np.float32)


def sample_elm(rng_seed: int) -> EnvLightMap:
    """Random light map: K in 1..50 lights with parameters in the sampling ranges."""
    rng = np.random.default_rng(rng_seed)
    k = int(rng.integers(1, MAX_LIGHTS + 1))
    xs = rng.uniform(0.0, 1.0, size=k)
    ys = rng.uniform(0.0, 1.0, size=k)
    intensities = rng.uniform(*INTENSITY_RANGE, size=k)
    # (0, SIGMA2_MAX]: rng.random() is in [0, 1)
    sigma2s = SIGMA2_MAX * (1.0 - rng.random(size=k))
    ambient = float(rng.uniform(0.0, AMBIENT_MAX))
    lights = tuple(
        GaussianLight(x=float(x), y=float(y), intensity=float(i), sigma2=float(s2))
        for x, y, i, s2 in zip(xs, ys, intensities, sigma2s)
    )
    return EnvLightMap(lights=lights, ambient=ambient)


def pixel_direction(u: int, v: int) -> np.ndarray:
    """Unit world direction for panorama pixel (column u, row v).

    Lat-long convention: azimuth phi = 2*pi*(u+0.5)/W from +x toward +z,
    polar theta = pi*(v+0.5)/H from zenith; rows v < H/2 point above the
    horizon.
    """
    if not (0 <= u < ELM_WIDTH and 0 <= v < ELM_HEIGHT):
        raise BoundsError(f"pixel ({u}, {v}) outside {ELM_WIDTH}x{ELM_HEIGHT}")
    phi = 2.0 * math.pi * (u + 0.5) / ELM_WIDTH
    theta = math.pi * (v + 0.5) / ELM_HEIGHT
    s = math.sin(theta)
    return np.array([s * math.cos(phi), math.cos(theta), s * math.sin(phi)])


def patch_directions(patch_row: int, patch_col: int) -> np.ndarray:
    """World directions of the 256 panorama pixels in top-half patch (row, col).

    Row-major over the patch, matching the flattened raster order used by
    the patch weights.
    """
    if not (0 <= patch_row < GRID_ROWS and 0 <= patch_col < GRID_COLS):
        raise BoundsError(f"patch ({patch_row}, {patch_col}) outside {GRID_ROWS}x{GRID_COLS}")
    vs, us = np.mgrid[
        patch_row * PATCH_SIZE:(patch_row + 1) * PATCH_SIZE,
        patch_col * PATCH_SIZE:(patch_col + 1) * PATCH_SIZE,
    ]
    phi = 2.0 * np.pi * (us.ravel() + 0.5) / ELM_WIDTH
    theta = np.pi * (vs.ravel() + 0.5) / ELM_HEIGHT
    s = np.sin(theta)
    return np.ascontiguousarray(np.stack([s * np.cos(phi), np.cos(theta), s * np.sin(phi)], axis=1))


def patch_values(raster: np.ndarray, patch_row: int, patch_col: int) -> np.ndarray:
    """Raster values of a top-half patch, flattened in patch_directions order."""
    r0 = patch_row * PATCH_SIZE
    c0 = patch_col * PATCH_SIZE
    return raster[r0:r0 + PATCH_SIZE, c0:c0 + PATCH_SIZE].reshape(-1)


def patch_weights(raster: np.ndarray) -> np.ndarray:
    """Mean raster value per top-half 16x16 patch -> float64 (8, 32)."""
    if raster.shape != (ELM_HEIGHT, ELM_WIDTH):
        raise InvalidLightError(
            f"raster must be {ELM_HEIGHT}x{ELM_WIDTH}, got {raster.shape[0]}x{raster.shape[1]}"
        )
    top = raster[: ELM_HEIGHT // 2].astype(np.float64)
    return top.reshape(GRID_ROWS, PATCH_SIZE, GRID_COLS, PATCH_SIZE).mean(axis=(1, 3))


def total_top_intensity(raster: np.ndarray) -> float:
    """Total unoccluded incident sum: all top-half raster values."""
    return float(raster[: ELM_HEIGHT // 2].sum(dtype=np.float64))
