"""Procedural meshes for tests, benchmarks, and demos."""

from __future__ import annotations

import numpy as np

from .geometry import Mesh, make_mesh

_BOX_FACES = np.array(
    [
        [0, 2, 1], [0, 3, 2],  # bottom (y-)
        [4, 5, 6], [4, 6, 7],  # top (y+)
        [0, 1, 5], [0, 5, 4],
        [1, 2, 6], [1, 6, 5],
        [2, 3, 7], [2, 7, 6],
        [3, 0, 4], [3, 4, 7],
    ],
    dtype=np.int32,
)


def make_box(size=(1.0, 1.0, 1.0), center=(0.0, 0.0, 0.0), normalize=True, mesh_id="box") -> Mesh:
    sx, sy, sz = np.asarray(size, float) / 2.0
    cx, cy, cz = center
    v = np.array(
        [
            [cx - sx, cy - sy, cz - sz],
            [cx + sx, cy - sy, cz - sz],
            [cx + sx, cy - sy, cz + sz],
            [cx - sx, cy - sy, cz + sz],
            [cx - sx, cy + sy, cz - sz],
            [cx + sx, cy + sy, cz - sz],
            [cx + sx, cy + sy, cz + sz],
            [cx - sx, cy + sy, cz + sz],
        ]
    )
    return make_mesh(v, _BOX_FACES, normalize=normalize, mesh_id=mesh_id)


def make_cube(normalize=True) -> Mesh:
    return make_box(normalize=normalize, mesh_id="cube")


def make_sphere(n_lat=24, n_lon=32, radius=0.5, normalize=True, mesh_id="sphere") -> Mesh:
    """UV sphere; ~2 * n_lat * n_lon triangles."""
    verts = [(0.0, radius, 0.0)]
    for i in range(1, n_lat):
        theta = np.pi * i / n_lat
        for j in range(n_lon):
            phi = 2.0 * np.pi * j / n_lon
            verts.append(
                (
                    radius * np.sin(theta) * np.cos(phi),
                    radius * np.cos(theta),
                    radius * np.sin(theta) * np.sin(phi),
                )
            )
    verts.append((0.0, -radius, 0.0))
    south = len(verts) - 1
    tris = []
    for j in range(n_lon):
        tris.append((0, 1 + (j + 1) % n_lon, 1 + j))
    for i in range(n_lat - 2):
        row0 = 1 + i * n_lon
        row1 = row0 + n_lon
        for j in range(n_lon):
            j1 = (j + 1) % n_lon
            tris.append((row0 + j, row0 + j1, row1 + j1))
            tris.append((row0 + j, row1 + j1, row1 + j))
    row = 1 + (n_lat - 2) * n_lon
    for j in range(n_lon):
        tris.append((south, row + j, row + (j + 1) % n_lon))
    return make_mesh(np.asarray(verts), np.asarray(tris, dtype=np.int32), normalize=normalize, mesh_id=mesh_id)


def make_torus(n_major=50, n_minor=50, major=0.35, minor=0.15, normalize=True, mesh_id="torus") -> Mesh:
    """Torus with 2 * n_major * n_minor triangles; ~5k at the defaults."""
    verts = []
    for i in range(n_major):
        a = 2.0 * np.pi * i / n_major
        ca, sa = np.cos(a), np.sin(a)
        for j in range(n_minor):
            b = 2.0 * np.pi * j / n_minor
            r = major + minor * np.cos(b)
            verts.append((r * ca, minor * np.sin(b), r * sa))
    tris = []
    for i in range(n_major):
        i1 = (i + 1) % n_major
        for j in range(n_minor):
            j1 = (j + 1) % n_minor
            a = i * n_minor + j
            b = i1 * n_minor + j
            c = i1 * n_minor + j1
            d = i * n_minor + j1
            tris.append((a, b, c))
            tris.append((a, c, d))
    return make_mesh(np.asarray(verts), np.asarray(tris, dtype=np.int32), normalize=normalize, mesh_id=mesh_id)


def make_pole(width=0.08, height=1.0, normalize=True) -> Mesh:
    """Thin vertical box, useful for long-shadow fixtures."""
    return make_box(size=(width, height, width), normalize=normalize, mesh_id="pole")


def random_triangle_soup(n_tris: int, seed: int = 0, scale: float = 1.0) -> Mesh:
    """Unstructured triangles in a unit-ish ball (BVH stress fixture)."""
    rng = np.random.default_rng(seed)
    centers = rng.uniform(-0.4, 0.4, size=(n_tris, 1, 3))
    offsets = rng.uniform(-0.1, 0.1, size=(n_tris, 3, 3))
    v = ((centers + offsets) * scale).reshape(-1, 3)
    t = np.arange(3 * n_tris, dtype=np.int32).reshape(-1, 3)
    return make_mesh(v, t, normalize=False, mesh_id=f"soup{n_tris}")
