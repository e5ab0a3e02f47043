"""Ground ambient occlusion by cosine-weighted hemisphere sampling.

AO follows the hemispherical visibility integral with cosine weighting;
cosine-weighted sampling makes the unoccluded estimate exactly 1 and a
one-third exponent boosts contrast as the final per-pixel step. Occluded is
0, exposed is 1; non-receiver pixels are 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import grey_dilation, grey_erosion

from . import _kernels as kernels
from .camera import CameraPose, GroundPlane, ViewFrame
from .geometry import Mesh

AO_EXPONENT = 1.0 / 3.0
DEFAULT_SPP = 256
PERTURB_RADII = (1, 5)  # inclusive kernel radius range, px


@dataclass
class AOMap:
    pixels: np.ndarray  # float32 (H, W) in [0, 1]
    samples_per_pixel: int


def compute_ao(
    mesh: Mesh,
    pose: CameraPose,
    ground: GroundPlane,
    spp: int = DEFAULT_SPP,
    seed: int = 0,
    frame: ViewFrame | None = None,
    apply_exponent: bool = True,
) -> AOMap:
    """Monte-Carlo AO on the receiver plane, contrast-boosted by A**(1/3).

    The estimator stratifies each pixel's samples over a fixed 4x4 grid so
    its variance scales as 1/spp; the per-pixel RNG stream depends only on
    (seed, pixel), never on scheduling. ``apply_exponent=False`` returns the
    raw visibility integral estimate (used by convergence checks).
    """
    if spp < 1:
        raise ValueError(f"spp must be >= 1, got {spp}")
    if frame is None:
        frame = ViewFrame(mesh, pose)
    gmask, pts = frame.ground_geometry(mesh, ground)
    a = kernels.ao_hemisphere(*mesh.kernel_args(), pts, spp, seed)
    img = np.ones(frame.height * frame.width, dtype=np.float32)
    img[np.flatnonzero(gmask.ravel())] = (a ** AO_EXPONENT if apply_exponent else a)
    return AOMap(img.reshape(frame.height, frame.width), spp)


def ao_at_points(mesh: Mesh, points: np.ndarray, spp: int, seed: int = 0) -> np.ndarray:
    """Raw AO estimates (pre-exponent) at explicit receiver points."""
    pts = np.ascontiguousarray(np.atleast_2d(points), dtype=np.float64)
    return kernels.ao_hemisphere(*mesh.kernel_args(), pts, spp, seed)


def _disk(radius: int) -> np.ndarray:
    r = int(radius)
    yy, xx = np.mgrid[-r:r + 1, -r:r + 1]
    return (yy**2 + xx**2) <= r**2


def apply_morphology(ao: AOMap, op: str, radius: int) -> AOMap:
    """Erode or dilate the occlusion channel (1 - A) with a disk kernel."""
    occ = 1.0 - ao.pixels.astype(np.float64)
    footprint = _disk(radius)
    if op == "erode":
        occ = grey_erosion(occ, footprint=footprint)
    elif op == "dilate":
        occ = grey_dilation(occ, footprint=footprint)
    else:
        raise ValueError(f"op must be 'erode' or 'dilate', got {op!r}")
    pixels = np.clip(1.0 - occ, 0.0, 1.0).astype(np.float32)
    return AOMap(pixels, ao.samples_per_pixel)


def perturb_ao(ao: AOMap, rng_seed: int) -> AOMap:
    """Training-time perturbation: random erosion or dilation of the occlusion."""
    rng = np.random.default_rng(rng_seed)
    op = "erode" if rng.random() < 0.5 else "dilate"
    radius = int(rng.integers(PERTURB_RADII[0], PERTURB_RADII[1] + 1))
    return apply_morphology(ao, op, radius)
