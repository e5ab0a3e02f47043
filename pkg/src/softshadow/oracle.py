"""Brute-force reference renderer: per-pixel-light soft shadows.

Sums every top-half panorama pixel's hard shadow weighted by its own raster
value, with no patch aggregation — the ground truth that basis composition
is validated against. Patch partials are combined with a pairwise reduction
in fixed row-major patch order, so outputs are bit-stable run to run.
"""

from __future__ import annotations

import numpy as np

from . import _kernels as kernels
from .bases import INVERSE, ShadowMap, _resolve_raster
from .camera import CameraPose, GroundPlane, ViewFrame
from .elm import GRID_COLS, GRID_ROWS, patch_directions, patch_values
from .geometry import Mesh


class _PairwiseSum:
    """Power-of-two pairwise accumulator; O(log n) partials alive."""

    def __init__(self):
        self._stack: list[tuple[int, np.ndarray]] = []

    def add(self, term: np.ndarray) -> None:
        n, s = 1, term
        while self._stack and self._stack[-1][0] == n:
            n2, s2 = self._stack.pop()
            s = s + s2
            n += n2
        self._stack.append((n, s))

    def total(self) -> np.ndarray:
        total = None
        for _, s in reversed(self._stack):
            total = s if total is None else total + s
        return total


def render_oracle_many(
    mesh: Mesh,
    pose: CameraPose,
    ground: GroundPlane,
    elms,
    progress=None,
) -> list[ShadowMap]:
    """Reference render for several light maps in one pass over directions."""
    rasters = [_resolve_raster(e).astype(np.float64) for e in elms]
    frame = ViewFrame(mesh, pose)
    gmask, pts = frame.ground_geometry(mesh, ground)
    gidx = np.flatnonzero(gmask.ravel())
    h, w = frame.height, frame.width
    scene = mesh.kernel_args()
    acc = [_PairwiseSum() for _ in rasters]
    for pr in range(GRID_ROWS):
        for pc in range(GRID_COLS):
            dirs = frame.world_dirs_to_mesh(patch_directions(pr, pc))
            occ = kernels.occlusion_matrix(*scene, pts, dirs).astype(np.float64)
            for i, raster in enumerate(rasters):
                acc[i].add(patch_values(raster, pr, pc) @ occ)
        if progress is not None:
            progress((pr + 1) / GRID_ROWS)
    out = []
    for a in acc:
        flat = np.zeros(h * w, dtype=np.float32)
        total = a.total()
        if total is not None and len(gidx):
            flat[gidx] = total.astype(np.float32)
        out.append(ShadowMap(flat.reshape(h, w), INVERSE, ground_mask=gmask))
    return out


def render_oracle(mesh: Mesh, pose: CameraPose, ground: GroundPlane, elm) -> ShadowMap:
    """Reference render for a single light map."""
    return render_oracle_many(mesh, pose, ground, [elm])[0]
