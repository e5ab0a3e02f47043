# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled ray-casting core: BVH traversal, shadow batches, hemisphere AO.

Mirrors the signatures in ``softshadow._kernels._purepy``; the two backends
must return identical results on identical inputs.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, cos, fmax, fmin, sin, sqrt

cnp.import_array()

DEF STACK_CAP = 64

cdef double M_TWO_PI = 6.283185307179586476925287
cdef double T_EPS = 1e-9
cdef double DET_EPS = 1e-12
cdef double BARY_EPS = 1e-9
cdef double INV_2_53 = 1.0 / 9007199254740992.0


cdef struct SceneC:
    const double* bounds   # (n_nodes, 6)
    const int* left
    const int* count
    const double* v0       # (n_tris, 3), BVH order
    const double* e1
    const double* e2
    int n_nodes


cdef inline unsigned long long _mix64(unsigned long long z) nogil:
    z ^= z >> 30
    z *= <unsigned long long>0xBF58476D1CE4E5B9
    z ^= z >> 27
    z *= <unsigned long long>0x94D049BB133111EB
    z ^= z >> 31
    return z


cdef inline double _counter_uniform(unsigned long long base, unsigned long long ctr) nogil:
    cdef unsigned long long z = base + ctr * <unsigned long long>0x9E3779B97F4A7C15
    return <double>(_mix64(z) >> 11) * INV_2_53


cdef inline bint _box_hit(const double* b, double ox, double oy, double oz,
                          double ix, double iy, double iz, double tmax) nogil:
    # Slab test; fmin/fmax absorb the NaNs from 0 * inf on degenerate axes.
    cdef double t0, t1, lo = 0.0, hi = tmax
    t0 = (b[0] - ox) * ix
    t1 = (b[3] - ox) * ix
    lo = fmax(lo, fmin(t0, t1))
    hi = fmin(hi, fmax(t0, t1))
    t0 = (b[1] - oy) * iy
    t1 = (b[4] - oy) * iy
    lo = fmax(lo, fmin(t0, t1))
    hi = fmin(hi, fmax(t0, t1))
    if lo > hi:
        return False
    t0 = (b[2] - oz) * iz
    t1 = (b[5] - oz) * iz
    lo = fmax(lo, fmin(t0, t1))
    hi = fmin(hi, fmax(t0, t1))
    return lo <= hi


cdef inline double _tri_hit(const double* v0, const double* e1, const double* e2,
                            double ox, double oy, double oz,
                            double dx, double dy, double dz) nogil:
    # Moller-Trumbore; returns hit distance or -1. Edges are epsilon-inclusive
    # so rays through shared edges register on at least one triangle.
    cdef double px, py, pz, det, inv, tx, ty, tz, u, qx, qy, qz, v, t
    px = dy * e2[2] - dz * e2[1]
    py = dz * e2[0] - dx * e2[2]
    pz = dx * e2[1] - dy * e2[0]
    det = e1[0] * px + e1[1] * py + e1[2] * pz
    if -DET_EPS < det < DET_EPS:
        return -1.0
    inv = 1.0 / det
    tx = ox - v0[0]
    ty = oy - v0[1]
    tz = oz - v0[2]
    u = (tx * px + ty * py + tz * pz) * inv
    if u < -BARY_EPS or u > 1.0 + BARY_EPS:
        return -1.0
    qx = ty * e1[2] - tz * e1[1]
    qy = tz * e1[0] - tx * e1[2]
    qz = tx * e1[1] - ty * e1[0]
    v = (dx * qx + dy * qy + dz * qz) * inv
    if v < -BARY_EPS or u + v > 1.0 + BARY_EPS:
        return -1.0
    t = (e2[0] * qx + e2[1] * qy + e2[2] * qz) * inv
    if t <= T_EPS:
        return -1.0
    return t


cdef bint _any_hit_one(const SceneC* s, double ox, double oy, double oz,
                       double dx, double dy, double dz,
                       double ix, double iy, double iz, double tmax) nogil:
    cdef int stack[STACK_CAP]
    cdef int sp, node, i, first, n
    cdef double t
    if s.n_nodes == 0:
        return False
    if not _box_hit(s.bounds, ox, oy, oz, ix, iy, iz, tmax):
        return False
    stack[0] = 0
    sp = 1
    while sp > 0:
        sp -= 1
        node = stack[sp]
        n = s.count[node]
        if n == 0:
            i = s.left[node]
            if _box_hit(s.bounds + 6 * i, ox, oy, oz, ix, iy, iz, tmax):
                stack[sp] = i
                sp += 1
            if _box_hit(s.bounds + 6 * (i + 1), ox, oy, oz, ix, iy, iz, tmax):
                stack[sp] = i + 1
                sp += 1
        else:
            first = s.left[node]
            for i in range(first, first + n):
                t = _tri_hit(s.v0 + 3 * i, s.e1 + 3 * i, s.e2 + 3 * i,
                             ox, oy, oz, dx, dy, dz)
                if 0.0 < t < tmax:
                    return True
    return False


cdef double _closest_hit_one(const SceneC* s, double ox, double oy, double oz,
                             double dx, double dy, double dz,
                             double ix, double iy, double iz) nogil:
    cdef int stack[STACK_CAP]
    cdef int sp, node, i, first, n
    cdef double t, best = INFINITY
    if s.n_nodes == 0:
        return INFINITY
    stack[0] = 0
    sp = 1
    while sp > 0:
        sp -= 1
        node = stack[sp]
        if not _box_hit(s.bounds + 6 * node, ox, oy, oz, ix, iy, iz, best):
            continue
        n = s.count[node]
        if n == 0:
            stack[sp] = s.left[node]
            stack[sp + 1] = s.left[node] + 1
            sp += 2
        else:
            first = s.left[node]
            for i in range(first, first + n):
                t = _tri_hit(s.v0 + 3 * i, s.e1 + 3 * i, s.e2 + 3 * i,
                             ox, oy, oz, dx, dy, dz)
                if 0.0 < t < best:
                    best = t
    return best


cdef SceneC _scene(const double[:, ::1] bounds, const int[::1] left, const int[::1] count,
                   const double[:, ::1] v0, const double[:, ::1] e1, const double[:, ::1] e2):
    cdef SceneC s
    s.n_nodes = <int>bounds.shape[0]
    if s.n_nodes:
        s.bounds = &bounds[0, 0]
        s.left = &left[0]
        s.count = &count[0]
    else:
        s.bounds = NULL
        s.left = NULL
        s.count = NULL
    if v0.shape[0]:
        s.v0 = &v0[0, 0]
        s.e1 = &e1[0, 0]
        s.e2 = &e2[0, 0]
    else:
        s.v0 = NULL
        s.e1 = NULL
        s.e2 = NULL
    return s


def closest_hit(const double[:, ::1] bounds, const int[::1] left, const int[::1] count,
                const double[:, ::1] v0, const double[:, ::1] e1, const double[:, ::1] e2,
                const double[:, ::1] origins, const double[:, ::1] dirs):
    """Nearest intersection distance per ray; (hit uint8, t float64) arrays.

    Missed rays report t = inf.
    """
    cdef SceneC s = _scene(bounds, left, count, v0, e1, e2)
    cdef Py_ssize_t n = origins.shape[0], i
    t_out = np.empty(n, dtype=np.float64)
    hit_out = np.empty(n, dtype=np.uint8)
    cdef double[::1] t_v = t_out
    cdef unsigned char[::1] h_v = hit_out
    cdef double t, dx, dy, dz
    with nogil:
        for i in range(n):
            dx = dirs[i, 0]
            dy = dirs[i, 1]
            dz = dirs[i, 2]
            t = _closest_hit_one(&s, origins[i, 0], origins[i, 1], origins[i, 2],
                                 dx, dy, dz, 1.0 / dx, 1.0 / dy, 1.0 / dz)
            t_v[i] = t
            h_v[i] = t != INFINITY
    return hit_out, t_out


def any_hit(const double[:, ::1] bounds, const int[::1] left, const int[::1] count,
            const double[:, ::1] v0, const double[:, ::1] e1, const double[:, ::1] e2,
            const double[:, ::1] origins, const double[:, ::1] dirs, double tmax=INFINITY):
    """Boolean occlusion per ray within (0, tmax)."""
    cdef SceneC s = _scene(bounds, left, count, v0, e1, e2)
    cdef Py_ssize_t n = origins.shape[0], i
    out = np.empty(n, dtype=np.uint8)
    cdef unsigned char[::1] o_v = out
    cdef double dx, dy, dz
    with nogil:
        for i in range(n):
            dx = dirs[i, 0]
            dy = dirs[i, 1]
            dz = dirs[i, 2]
            o_v[i] = _any_hit_one(&s, origins[i, 0], origins[i, 1], origins[i, 2],
                                  dx, dy, dz, 1.0 / dx, 1.0 / dy, 1.0 / dz, tmax)
    return out


def occlusion_matrix(const double[:, ::1] bounds, const int[::1] left, const int[::1] count,
                     const double[:, ::1] v0, const double[:, ::1] e1, const double[:, ::1] e2,
                     const double[:, ::1] points, const double[:, ::1] dirs, double eps=1e-6):
    """Occlusion of every point along every direction: (K dirs, M points) uint8.

    Ray origins are nudged eps along the ray so receiver-plane geometry does
    not self-shadow at t = 0.
    """
    cdef SceneC s = _scene(bounds, left, count, v0, e1, e2)
    cdef Py_ssize_t n_dirs = dirs.shape[0], n_pts = points.shape[0], k, m
    out = np.empty((n_dirs, n_pts), dtype=np.uint8)
    cdef unsigned char[:, ::1] o_v = out
    cdef double dx, dy, dz, ix, iy, iz, ex, ey, ez
    if n_pts == 0:
        return out
    with nogil:
        for k in range(n_dirs):
            dx = dirs[k, 0]
            dy = dirs[k, 1]
            dz = dirs[k, 2]
            ix = 1.0 / dx
            iy = 1.0 / dy
            iz = 1.0 / dz
            ex = eps * dx
            ey = eps * dy
            ez = eps * dz
            for m in range(n_pts):
                o_v[k, m] = _any_hit_one(&s,
                                         points[m, 0] + ex, points[m, 1] + ey, points[m, 2] + ez,
                                         dx, dy, dz, ix, iy, iz, INFINITY)
    return out


cdef double _ao_point(const SceneC* s, double ox, double oy, double oz,
                      unsigned long long base, int spp, bint stratified) nogil:
    cdef int k, g
    cdef double u1, u2, phi, sin_t, dx, dy, dz, a
    cdef double ssum[16]
    cdef int scnt[16]
    for g in range(16):
        ssum[g] = 0.0
        scnt[g] = 0
    for k in range(spp):
        u1 = _counter_uniform(base, 2 * k)
        u2 = _counter_uniform(base, 2 * k + 1)
        if stratified:
            g = k % 16
            u1 = ((g >> 2) + u1) * 0.25
            u2 = ((g & 3) + u2) * 0.25
        else:
            g = 0
        sin_t = sqrt(u1)
        phi = M_TWO_PI * u2
        dx = sin_t * cos(phi)
        dy = sqrt(1.0 - u1)
        dz = sin_t * sin(phi)
        if not _any_hit_one(s, ox, oy, oz, dx, dy, dz,
                            1.0 / dx, 1.0 / dy, 1.0 / dz, INFINITY):
            ssum[g] += 1.0
        scnt[g] += 1
    if stratified:
        a = 0.0
        for g in range(16):
            a += ssum[g] / scnt[g]
        return a / 16.0
    return ssum[0] / spp


def ao_hemisphere(const double[:, ::1] bounds, const int[::1] left, const int[::1] count,
                  const double[:, ::1] v0, const double[:, ::1] e1, const double[:, ::1] e2,
                  const double[:, ::1] points, int spp, unsigned long long seed,
                  double eps=1e-4):
    """Cosine-weighted hemisphere visibility (up normal) per point.

    Samples are stratified over a fixed 4x4 grid (plain uniforms if spp < 16),
    with a counter-based per-point RNG so results do not depend on scheduling.
    """
    cdef SceneC s = _scene(bounds, left, count, v0, e1, e2)
    cdef Py_ssize_t n_pts = points.shape[0], m
    cdef unsigned long long base
    cdef bint stratified = spp >= 16
    out = np.empty(n_pts, dtype=np.float64)
    cdef double[::1] o_v = out
    with nogil:
        for m in range(n_pts):
            base = seed + (<unsigned long long>(m + 1)) * <unsigned long long>0xD1B54A32D192ED03
            o_v[m] = _ao_point(&s, points[m, 0], points[m, 1] + eps, points[m, 2],
                               base, spp, stratified)
    return out
