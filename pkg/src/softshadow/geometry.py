"""Triangle meshes: OBJ ingest, canonical normalization, BVH build.

Meshes are immutable after construction; all ray queries go through the
kernel backends in :mod:`softshadow._kernels`.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateMeshError, MeshFormatError

LEAF_SIZE = 4
MAX_BVH_DEPTH = 64


@dataclass(frozen=True)
class Bvh:
    """Flat median-split BVH over triangles.

    ``left`` holds the left-child index for internal nodes (right child is
    ``left + 1``) and the first-triangle offset for leaves; ``count`` is zero
    for internal nodes. Triangle data is stored leaf-contiguous, so kernels
    never chase the original index order.
    """

    bounds: np.ndarray  # (n, 6) float64: min xyz, max xyz
    left: np.ndarray    # (n,) int32
    count: np.ndarray   # (n,) int32
    order: np.ndarray   # (T,) int32, BVH order -> original triangle index


@dataclass(frozen=True)
class Mesh:
    vertices: np.ndarray   # (V, 3) float64
    triangles: np.ndarray  # (T, 3) int32
    bvh: Bvh
    # Moller-Trumbore precomputation in BVH triangle order.
    tri_v0: np.ndarray = field(repr=False, default=None)
    tri_e1: np.ndarray = field(repr=False, default=None)
    tri_e2: np.ndarray = field(repr=False, default=None)
    mesh_id: str = ""

    @property
    def bounds_min(self) -> np.ndarray:
        return self.vertices.min(axis=0)

    @property
    def bounds_max(self) -> np.ndarray:
        return self.vertices.max(axis=0)

    def kernel_args(self) -> tuple:
        """Array bundle consumed by every kernel entry point."""
        b = self.bvh
        return (b.bounds, b.left, b.count, self.tri_v0, self.tri_e1, self.tri_e2)


def normalize_vertices(vertices: np.ndarray) -> np.ndarray:
    """Center the min-max box at the origin and scale its longest edge to 1."""
    lo = vertices.min(axis=0)
    hi = vertices.max(axis=0)
    extent = float((hi - lo).max())
    if extent <= 0.0:
        raise DegenerateMeshError("mesh has zero spatial extent")
    center = 0.5 * (lo + hi)
    return (vertices - center) / extent


_SAH_BINS = 16


def _box_area(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    e = hi - lo
    return e[..., 0] * e[..., 1] + e[..., 1] * e[..., 2] + e[..., 2] * e[..., 0]


def _sah_split(idx, tri_lo, tri_hi, centroids):
    """Best binned-SAH partition of `idx`; None when no useful split exists."""
    c = centroids[idx]
    c_lo = c.min(axis=0)
    c_ext = c.max(axis=0) - c_lo
    axis = int(np.argmax(c_ext))
    if c_ext[axis] <= 0.0:
        return None
    bins = np.minimum(
        (_SAH_BINS * (c[:, axis] - c_lo[axis]) / c_ext[axis]).astype(np.int64),
        _SAH_BINS - 1,
    )
    b_lo = np.full((_SAH_BINS, 3), np.inf)
    b_hi = np.full((_SAH_BINS, 3), -np.inf)
    np.minimum.at(b_lo, bins, tri_lo[idx])
    np.maximum.at(b_hi, bins, tri_hi[idx])
    n = np.bincount(bins, minlength=_SAH_BINS)
    lo_acc = np.minimum.accumulate(b_lo, axis=0)
    hi_acc = np.maximum.accumulate(b_hi, axis=0)
    lo_racc = np.minimum.accumulate(b_lo[::-1], axis=0)[::-1]
    hi_racc = np.maximum.accumulate(b_hi[::-1], axis=0)[::-1]
    n_l = np.cumsum(n)[:-1]
    n_r = len(idx) - n_l
    cost = np.where(
        (n_l > 0) & (n_r > 0),
        n_l * _box_area(lo_acc[:-1], hi_acc[:-1]) + n_r * _box_area(lo_racc[1:], hi_racc[1:]),
        np.inf,
    )
    best = int(np.argmin(cost))
    if not np.isfinite(cost[best]):
        return None
    return bins <= best


def build_bvh(vertices: np.ndarray, triangles: np.ndarray, leaf_size: int = LEAF_SIZE) -> Bvh:
    n_tris = len(triangles)
    if n_tris == 0:
        z = np.zeros(0, dtype=np.int32)
        return Bvh(np.zeros((0, 6)), z, z, z)

    tri_lo = vertices[triangles].min(axis=1)  # (T, 3)
    tri_hi = vertices[triangles].max(axis=1)
    centroids = 0.5 * (tri_lo + tri_hi)

    order = np.arange(n_tris, dtype=np.int32)
    bounds: list[np.ndarray] = []
    left: list[int] = []
    count: list[int] = []

    # (node index, lo, hi, depth) ranges into `order`
    stack = [(0, 0, n_tris, 0)]
    bounds.append(np.empty(6))
    left.append(0)
    count.append(0)
    while stack:
        node, lo, hi, depth = stack.pop()
        idx = order[lo:hi]
        bounds[node] = np.concatenate([tri_lo[idx].min(axis=0), tri_hi[idx].max(axis=0)])
        if hi - lo <= leaf_size or depth >= MAX_BVH_DEPTH - 2:
            left[node] = lo
            count[node] = hi - lo
            continue
        go_left = _sah_split(idx, tri_lo, tri_hi, centroids)
        if go_left is None:
            mid = (hi - lo) // 2
            axis = int(np.argmax(np.ptp(centroids[idx], axis=0)))
            part = np.argpartition(centroids[idx, axis], mid)
            order[lo:hi] = idx[part]
        else:
            mid = int(go_left.sum())
            order[lo:hi] = np.concatenate([idx[go_left], idx[~go_left]])
        child = len(bounds)
        left[node] = child
        count[node] = 0
        for _ in range(2):
            bounds.append(np.empty(6))
            left.append(0)
            count.append(0)
        stack.append((child, lo, lo + mid, depth + 1))
        stack.append((child + 1, lo + mid, hi, depth + 1))

    return Bvh(
        bounds=np.asarray(bounds, dtype=np.float64),
        left=np.asarray(left, dtype=np.int32),
        count=np.asarray(count, dtype=np.int32),
        order=order,
    )


def make_mesh(vertices, triangles, normalize: bool = True, mesh_id: str = "") -> Mesh:
    """Build a Mesh (and its BVH) from raw arrays.

    Normalization is idempotent; pass ``normalize=False`` only for synthetic
    fixtures that are already in canonical position.
    """
    vertices = np.ascontiguousarray(vertices, dtype=np.float64)
    triangles = np.ascontiguousarray(triangles, dtype=np.int32).reshape(-1, 3)
    if len(triangles) and (triangles.min() < 0 or triangles.max() >= len(vertices)):
        raise MeshFormatError("triangle index out of range")
    if normalize:
        if len(vertices) == 0:
            raise DegenerateMeshError("mesh has no vertices")
        vertices = normalize_vertices(vertices)
    bvh = build_bvh(vertices, triangles)
    ordered = triangles[bvh.order] if len(triangles) else triangles
    v0 = np.ascontiguousarray(vertices[ordered[:, 0]]) if len(triangles) else np.zeros((0, 3))
    v1 = vertices[ordered[:, 1]] if len(triangles) else np.zeros((0, 3))
    v2 = vertices[ordered[:, 2]] if len(triangles) else np.zeros((0, 3))
    if not mesh_id:
        h = hashlib.sha1()
        h.update(vertices.tobytes())
        h.update(triangles.tobytes())
        mesh_id = h.hexdigest()[:12]
    return Mesh(
        vertices=vertices,
        triangles=triangles,
        bvh=bvh,
        tri_v0=v0,
        tri_e1=np.ascontiguousarray(v1 - v0),
        tri_e2=np.ascontiguousarray(v2 - v0),
        mesh_id=mesh_id,
    )


def _parse_face_vertex(token: str, n_vertices: int, lineno: int) -> int:
    part = token.split("/")[0]
    try:
        idx = int(part)
    except ValueError:
        raise MeshFormatError(f"line {lineno}: bad face index {token!r}") from None
    if idx < 0:
        idx = n_vertices + idx
    else:
        idx -= 1
    if not 0 <= idx < n_vertices:
        raise MeshFormatError(f"line {lineno}: face index {token!r} out of range")
    return idx


def _parse_obj(lines, source: str) -> tuple[np.ndarray, np.ndarray]:
    vertices: list[list[float]] = []
    faces: list[tuple[int, int, int]] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if fields[0] == "v":
            if len(fields) < 4:
                raise MeshFormatError(f"{source}, line {lineno}: vertex needs 3 coordinates")
            try:
                vertices.append([float(fields[1]), float(fields[2]), float(fields[3])])
            except ValueError:
                raise MeshFormatError(f"{source}, line {lineno}: bad vertex coordinate") from None
        elif fields[0] == "f":
            if len(fields) < 4:
                raise MeshFormatError(f"{source}, line {lineno}: face needs at least 3 vertices")
            idx = [_parse_face_vertex(t, len(vertices), lineno) for t in fields[1:]]
            for k in range(1, len(idx) - 1):
                faces.append((idx[0], idx[k], idx[k + 1]))
        # vn/vt/usemtl/... ignored
    if not faces:
        raise DegenerateMeshError(f"{source}: no faces found")
    return np.asarray(vertices), np.asarray(faces, dtype=np.int32)


def load_mesh(path, mesh_id: str = "") -> Mesh:
    """Load an OBJ triangle mesh (v/f records; polygons fan-triangulated).

    The result is normalized into canonical position. Normals, texture
    coordinates and materials are ignored.
    """
    with open(path, "r", errors="replace") as fh:
        vertices, faces = _parse_obj(fh, str(path))
    if not mesh_id:
        import os

        mesh_id = os.path.splitext(os.path.basename(str(path)))[0]
    return make_mesh(vertices, faces, mesh_id=mesh_id)


def load_mesh_text(text: str, mesh_id: str = "upload") -> Mesh:
    """Parse OBJ source from a string (e.g. an uploaded payload)."""
    vertices, faces = _parse_obj(text.splitlines(), mesh_id)
    return make_mesh(vertices, faces, mesh_id=mesh_id)


def mesh_to_obj(mesh: Mesh) -> str:
    """Serialize to OBJ text (for export fixtures and round-trips)."""
    out = []
    for v in mesh.vertices:
        out.append(f"v {v[0]:.9g} {v[1]:.9g} {v[2]:.9g}")
    for t in mesh.triangles:
        out.append(f"f {t[0] + 1} {t[1] + 1} {t[2] + 1}")
    return "\n".join(out) + "\n"
