"""Kernel backend benchmark: compiled core vs pure-NumPy fallback.

Each backend runs a workload sized to its throughput and the comparison is
reported as rays per second, so the fallback does not stall the run.
"""

from __future__ import annotations

import time

import numpy as np

from . import _kernels as kernels
from .bases import ShadowBasisSet, compose
from .camera import CameraPose, ViewFrame, ground_for
from .elm import patch_directions, rasterize_elm, sample_elm
from .procgen import make_sphere

# fallback runs this fraction of the compiled workload
_PY_FRACTION = 16


def _time(fn, repeat: int) -> float:
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run_benchmark(image: int = 96, spp: int = 64, quiet: bool = False) -> dict:
    """Time the hot kernels on both backends plus the compose GEMV."""
    mesh = make_sphere(n_lat=16, n_lon=24)
    pose = CameraPose(yaw=30, pitch=15, image_size=(image, image))
    frame = ViewFrame(mesh, pose)
    _, pts = frame.ground_geometry(mesh, ground_for(mesh))
    dirs = frame.world_dirs_to_mesh(patch_directions(4, 8))
    rays = frame.rays
    origins = np.ascontiguousarray(np.broadcast_to(frame.origin, rays.shape))
    args = mesh.kernel_args()

    def cases(cut: int):
        n_pts = max(len(pts) // cut, 1)
        n_dirs = max(len(dirs) // cut, 1)
        n_rays = max(len(rays) // cut, 1)
        n_ao = max(256 // cut, 1)
        return {
            "closest_hit": (
                lambda b: b.closest_hit(*args, origins[:n_rays], rays[:n_rays]),
                n_rays,
            ),
            "occlusion": (
                lambda b: b.occlusion_matrix(*args, pts[:n_pts], dirs[:n_dirs]),
                n_pts * n_dirs,
            ),
            "ao_hemisphere": (
                lambda b: b.ao_hemisphere(*args, pts[:n_ao], spp, 7),
                n_ao * spp,
            ),
        }

    plans = {"compiled": cases(1), "python": cases(_PY_FRACTION)}
    results: dict = {"image": image, "spp": spp, "tris": len(mesh.triangles), "rows": []}
    for case in cases(1):
        row: dict = {"case": case}
        for name, plan in plans.items():
            try:
                backend = kernels.get_backend(name)
            except ImportError:
                continue
            fn, n_rays = plan[case]
            dt = _time(lambda: fn(backend), repeat=2)
            row[name] = n_rays / dt
        results["rows"].append(row)

    grid = np.random.default_rng(0).random((8, 32, 256, 256), dtype=np.float32)
    bs = ShadowBasisSet(grid=grid, image_size=(256, 256))
    raster = rasterize_elm(sample_elm(3))
    bs.matrix  # warm the GEMV operand
    results["compose_ms_256"] = _time(lambda: compose(bs, raster), repeat=20) * 1000.0

    if not quiet:
        print(f"kernel benchmark ({image}x{image} frame, sphere {results['tris']} tris)")
        print(f"{'case':<16}{'compiled rays/s':>18}{'python rays/s':>16}{'speedup':>10}")
        for row in results["rows"]:
            c = row.get("compiled")
            p = row.get("python")
            line = f"{row['case']:<16}"
            line += f"{c:>18,.0f}" if c else f"{'n/a':>18}"
            line += f"{p:>16,.0f}" if p else f"{'n/a':>16}"
            line += f"{c / p:>9.1f}x" if c and p else f"{'':>10}"
            print(line)
        print(f"compose 256x256 from 8x32 bases: {results['compose_ms_256']:.2f} ms")
        print(f"active backend: {kernels.BACKEND}")
    return results
