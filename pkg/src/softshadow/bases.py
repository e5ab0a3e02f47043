"""Hard-shadow bases and soft-shadow composition.

A basis set holds, per top-half 16x16 panorama patch, the sum of the 256
binary hard shadows cast by that patch's pixel directions. By light
linearity a soft shadow for any light map is the patch-mean-weighted sum of
bases; the result lives natively in the inverse domain (blocked light,
zero where fully lit).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as kernels
from .camera import CameraPose, GroundPlane, ViewFrame
from .elm import (
    ELM_HEIGHT,
    ELM_WIDTH,
    GRID_COLS,
    GRID_ROWS,
    PATCH_SIZE,
    EnvLightMap,
    patch_directions,
    patch_weights,
    rasterize_elm,
    total_top_intensity,
)
from .errors import BasisFormatError, GeometryMismatchError, InvalidDirectionError
from .geometry import Mesh

SSBB_MAGIC = b"SSBB"
SSBB_VERSION = 1
_HEADER = struct.Struct("<4sHHHHHH")  # magic, version, w, h, rows, cols, patch

INVERSE = "inverse"
RADIANCE = "radiance"


@dataclass
class ShadowMap:
    pixels: np.ndarray               # float32 (H, W)
    domain: str                      # "inverse" | "radiance"
    ground_mask: np.ndarray | None = None  # bool (H, W); None = treat all as ground


@dataclass
class ShadowBasisSet:
    grid: np.ndarray                 # float32 (rows, cols, H, W)
    image_size: tuple[int, int]      # (width, height)
    patch_size: int = PATCH_SIZE
    provenance: tuple | None = None  # (mesh id, pose)
    ground_mask: np.ndarray | None = None
    _matrix: np.ndarray | None = field(default=None, repr=False)

    @property
    def grid_rows(self) -> int:
        return self.grid.shape[0]

    @property
    def grid_cols(self) -> int:
        return self.grid.shape[1]

    @property
    def matrix(self) -> np.ndarray:
        """(rows*cols, H*W) float32 view used by the compose GEMV."""
        if self._matrix is None:
            n = self.grid_rows * self.grid_cols
            self._matrix = np.ascontiguousarray(self.grid.reshape(n, -1))
        return self._matrix


def _resolve_raster(elm) -> np.ndarray:
    if isinstance(elm, EnvLightMap):
        return rasterize_elm(elm)
    raster = np.asarray(elm)
    if raster.shape != (ELM_HEIGHT, ELM_WIDTH):
        raise GeometryMismatchError(
            f"light raster must be {ELM_HEIGHT}x{ELM_WIDTH}, got {raster.shape}"
        )
    return raster


def hard_shadow(
    mesh: Mesh,
    pose: CameraPose,
    ground: GroundPlane,
    direction,
    frame: ViewFrame | None = None,
) -> np.ndarray:
    """Binary occlusion image for a single world light direction.

    Receiver pixels shadowed along ``direction`` are 1; object pixels and
    pixels above the horizon are 0.
    """
    direction = np.asarray(direction, dtype=np.float64)
    if direction[1] <= 0.0:
        raise InvalidDirectionError(f"light direction must be above the horizon, got y={direction[1]}")
    direction = direction / np.linalg.norm(direction)
    if frame is None:
        frame = ViewFrame(mesh, pose)
    gmask, pts = frame.ground_geometry(mesh, ground)
    d_mesh = frame.world_dirs_to_mesh(direction)
    occ = kernels.occlusion_matrix(*mesh.kernel_args(), pts, d_mesh)
    img = np.zeros(frame.height * frame.width, dtype=np.float32)
    img[np.flatnonzero(gmask.ravel())] = occ[0]
    return img.reshape(frame.height, frame.width)


def build_bases(mesh: Mesh, pose: CameraPose, ground: GroundPlane,
                progress=None) -> ShadowBasisSet:
    """Accumulate the 8x32 grid of hard-shadow sums for one (mesh, view).

    ``progress`` is an optional callback taking a fraction in [0, 1].
    """
    frame = ViewFrame(mesh, pose)
    gmask, pts = frame.ground_geometry(mesh, ground)
    gidx = np.flatnonzero(gmask.ravel())
    h, w = frame.height, frame.width
    grid = np.zeros((GRID_ROWS, GRID_COLS, h, w), dtype=np.float32)
    scene = mesh.kernel_args()
    flat = np.zeros(h * w, dtype=np.float32)
    for pr in range(GRID_ROWS):
        for pc in range(GRID_COLS):
            dirs = frame.world_dirs_to_mesh(patch_directions(pr, pc))
            occ = kernels.occlusion_matrix(*scene, pts, dirs)
            flat[:] = 0.0
            flat[gidx] = occ.sum(axis=0, dtype=np.uint16)
            grid[pr, pc] = flat.reshape(h, w)
        if progress is not None:
            progress((pr + 1) / GRID_ROWS)
    return ShadowBasisSet(
        grid=grid,
        image_size=(w, h),
        patch_size=PATCH_SIZE,
        provenance=(mesh.mesh_id, pose),
        ground_mask=gmask,
    )


def compose(bases: ShadowBasisSet, elm) -> ShadowMap:
    """Weight every basis by its patch-mean light value and sum.

    ``elm`` is an EnvLightMap or a raw (256, 512) raster. Output is in the
    inverse domain.
    """
    raster = _resolve_raster(elm)
    weights = patch_weights(raster)
    if weights.shape != (bases.grid_rows, bases.grid_cols):
        raise GeometryMismatchError(
            f"basis grid {bases.grid_rows}x{bases.grid_cols} does not match "
            f"weight grid {weights.shape[0]}x{weights.shape[1]}"
        )
    w, h = bases.image_size
    flat = weights.astype(np.float32).ravel() @ bases.matrix
    return ShadowMap(flat.reshape(h, w), INVERSE, ground_mask=bases.ground_mask)


def to_radiance(shadow: ShadowMap, elm) -> ShadowMap:
    """Inverse -> radiance: T - s on receiver pixels, 0 elsewhere.

    T is the total unoccluded incident sum of the light map's top half.
    Without a ground mask every pixel is treated as receiver.
    """
    if shadow.domain != INVERSE:
        raise GeometryMismatchError(f"to_radiance expects an inverse-domain map, got {shadow.domain!r}")
    raster = _resolve_raster(elm)
    total = np.float32(total_top_intensity(raster))
    radiance = total - shadow.pixels
    if shadow.ground_mask is not None:
        radiance = np.where(shadow.ground_mask, radiance, np.float32(0.0))
    return ShadowMap(radiance.astype(np.float32), RADIANCE, ground_mask=shadow.ground_mask)


def save_bases(path, bases: ShadowBasisSet) -> None:
    w, h = bases.image_size
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(SSBB_MAGIC, SSBB_VERSION, w, h,
                              bases.grid_rows, bases.grid_cols, bases.patch_size))
        fh.write(np.ascontiguousarray(bases.grid, dtype="<f4").tobytes())


def bases_bytes(bases: ShadowBasisSet) -> bytes:
    w, h = bases.image_size
    head = _HEADER.pack(SSBB_MAGIC, SSBB_VERSION, w, h,
                        bases.grid_rows, bases.grid_cols, bases.patch_size)
    return head + np.ascontiguousarray(bases.grid, dtype="<f4").tobytes()


def _check(cond: bool, fieldname: str, detail: str) -> None:
    if not cond:
        raise BasisFormatError(f"bad basis file field '{fieldname}': {detail}")


def load_bases_bytes(data: bytes) -> ShadowBasisSet:
    _check(len(data) >= _HEADER.size, "magic", f"file too short ({len(data)} bytes) for header")
    magic, version, w, h, rows, cols, patch = _HEADER.unpack_from(data)
    _check(magic == SSBB_MAGIC, "magic", f"expected {SSBB_MAGIC!r}, got {magic!r}")
    _check(version == SSBB_VERSION, "version", f"expected {SSBB_VERSION}, got {version}")
    _check(w > 0, "image_w", f"got {w}")
    _check(h > 0, "image_h", f"got {h}")
    _check(rows == GRID_ROWS, "grid_rows", f"expected {GRID_ROWS}, got {rows}")
    _check(cols == GRID_COLS, "grid_cols", f"expected {GRID_COLS}, got {cols}")
    _check(patch == PATCH_SIZE, "patch", f"expected {PATCH_SIZE}, got {patch}")
    expect = rows * cols * h * w * 4
    payload = data[_HEADER.size:]
    _check(
        len(payload) == expect, "pixels",
        f"payload is {len(payload)} bytes, expected {expect}",
    )
    grid = np.frombuffer(payload, dtype="<f4").reshape(rows, cols, h, w).copy()
    return ShadowBasisSet(grid=grid, image_size=(w, h), patch_size=patch)


def load_bases(path) -> ShadowBasisSet:
    with open(path, "rb") as fh:
        return load_bases_bytes(fh.read())
