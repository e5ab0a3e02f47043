"""Pure-NumPy kernel fallback.

Same entry points and numerical conventions as the compiled core
(``_core.pyx``); intersection is vectorized brute force over all triangles
instead of BVH traversal, so results match while throughput is much lower.
"""

from __future__ import annotations

import numpy as np

T_EPS = 1e-9
DET_EPS = 1e-12
BARY_EPS = 1e-9
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_POINT_WEYL = np.uint64(0xD1B54A32D192ED03)
_INV_2_53 = 1.0 / 9007199254740992.0

# rays-per-chunk scaled so ray x triangle temporaries stay ~50 MB
_CHUNK_BUDGET = 1_500_000


def _mix64(z: np.ndarray) -> np.ndarray:
    z = z.astype(np.uint64, copy=True)
    with np.errstate(over="ignore"):
        z ^= z >> np.uint64(30)
        z *= np.uint64(0xBF58476D1CE4E5B9)
        z ^= z >> np.uint64(27)
        z *= np.uint64(0x94D049BB133111EB)
        z ^= z >> np.uint64(31)
    return z


def _counter_uniform(base: np.ndarray, ctr: int) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = base + np.uint64(ctr) * _GOLDEN
    return (_mix64(z) >> np.uint64(11)).astype(np.float64) * _INV_2_53


def _intersect_chunk(v0, e1, e2, origins, dirs):
    """Per-ray min hit distance against every triangle (inf = miss)."""
    d = dirs[:, None, :]
    pvec = np.cross(d, e2[None, :, :])
    det = np.einsum("tk,rtk->rt", e1, pvec)
    ok = np.abs(det) >= DET_EPS
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(ok, 1.0 / det, 0.0)
        tvec = origins[:, None, :] - v0[None, :, :]
        u = np.einsum("rtk,rtk->rt", tvec, pvec) * inv
        qvec = np.cross(tvec, e1[None, :, :])
        v = np.einsum("rk,rtk->rt", dirs, qvec) * inv
        t = np.einsum("tk,rtk->rt", e2, qvec) * inv
    valid = (
        ok
        & (u >= -BARY_EPS)
        & (u <= 1.0 + BARY_EPS)
        & (v >= -BARY_EPS)
        & (u + v <= 1.0 + BARY_EPS)
        & (t > T_EPS)
    )
    return np.where(valid, t, np.inf).min(axis=1)


def _min_t(v0, e1, e2, origins, dirs):
    n_rays = len(origins)
    n_tris = len(v0)
    if n_tris == 0 or n_rays == 0:
        return np.full(n_rays, np.inf)
    chunk = max(1, _CHUNK_BUDGET // max(n_tris, 1))
    out = np.empty(n_rays)
    for lo in range(0, n_rays, chunk):
        hi = min(lo + chunk, n_rays)
        out[lo:hi] = _intersect_chunk(v0, e1, e2, origins[lo:hi], dirs[lo:hi])
    return out


def closest_hit(bounds, left, count, v0, e1, e2, origins, dirs):
    t = _min_t(v0, e1, e2, np.asarray(origins, float), np.asarray(dirs, float))
    return (t != np.inf).astype(np.uint8), t


def any_hit(bounds, left, count, v0, e1, e2, origins, dirs, tmax=np.inf):
    t = _min_t(v0, e1, e2, np.asarray(origins, float), np.asarray(dirs, float))
    return (t < tmax).astype(np.uint8)


def occlusion_matrix(bounds, left, count, v0, e1, e2, points, dirs, eps=1e-6):
    points = np.asarray(points, float)
    dirs = np.asarray(dirs, float)
    out = np.empty((len(dirs), len(points)), dtype=np.uint8)
    for k, d in enumerate(dirs):
        origins = points + eps * d
        drep = np.broadcast_to(d, origins.shape)
        out[k] = any_hit(bounds, left, count, v0, e1, e2, origins, drep)
    return out


def ao_hemisphere(bounds, left, count, v0, e1, e2, points, spp, seed, eps=1e-4):
    points = np.asarray(points, float)
    n_pts = len(points)
    with np.errstate(over="ignore"):
        base = np.uint64(seed) + (np.arange(1, n_pts + 1, dtype=np.uint64)) * _POINT_WEYL
    origins = points + np.array([0.0, eps, 0.0])
    stratified = spp >= 16
    ssum = np.zeros((n_pts, 16))
    scnt = np.zeros(16, dtype=np.int64)
    for k in range(spp):
        u1 = _counter_uniform(base, 2 * k)
        u2 = _counter_uniform(base, 2 * k + 1)
        if stratified:
            g = k % 16
            u1 = ((g >> 2) + u1) * 0.25
            u2 = ((g & 3) + u2) * 0.25
        else:
            g = 0
        sin_t = np.sqrt(u1)
        phi = 2.0 * np.pi * u2
        d = np.stack([sin_t * np.cos(phi), np.sqrt(1.0 - u1), sin_t * np.sin(phi)], axis=1)
        blocked = any_hit(bounds, left, count, v0, e1, e2, origins, d)
        ssum[:, g] += 1.0 - blocked
        scnt[g] += 1
    if stratified:
        return (ssum / scnt).mean(axis=1)
    return ssum[:, 0] / spp
