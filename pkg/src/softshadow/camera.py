"""Camera poses, view frames, ground plane, and cutout mask rendering.

A view is a pinhole camera with a vertically shifted film window: the window
offset is solved so the object's highest projected vertex lands on the top
image row, which keeps verticals vertical at pitch 0 and leaves the lower
frame to the ground plane where shadows land. Yaw spins the object about the
vertical axis; the implementation keeps one BVH per mesh and counter-rotates
the camera instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as kernels
from .geometry import Mesh

CANONICAL_YAWS = (0.0, 45.0, -45.0, 90.0, -90.0)
CANONICAL_PITCHES = (0.0, 15.0, 30.0)
DEFAULT_FOV_Y = 45.0
DEFAULT_IMAGE_SIZE = (256, 256)
DEFAULT_DISTANCE = 2.5


@dataclass(frozen=True)
class CameraPose:
    yaw: float
    pitch: float
    fov_y: float = DEFAULT_FOV_Y
    image_size: tuple[int, int] = DEFAULT_IMAGE_SIZE  # (width, height)


@dataclass(frozen=True)
class GroundPlane:
    height: float


def canonical_poses(image_size: tuple[int, int] = DEFAULT_IMAGE_SIZE) -> list[CameraPose]:
    """The 15 canonical views: yaw-major cross product of yaws and pitches."""
    return [
        CameraPose(yaw=y, pitch=p, image_size=image_size)
        for y in CANONICAL_YAWS
        for p in CANONICAL_PITCHES
    ]


def ground_for(mesh: Mesh) -> GroundPlane:
    """Receiver plane through the bottom face of the mesh's min-max box."""
    return GroundPlane(height=float(mesh.bounds_min[1]))


def _rot_y(deg: float) -> np.ndarray:
    t = math.radians(deg)
    c, s = math.cos(t), math.sin(t)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


class ViewFrame:
    """Resolved camera for one (mesh, pose) pair, expressed in mesh space."""

    def __init__(self, mesh: Mesh, pose: CameraPose, distance: float = DEFAULT_DISTANCE):
        self.pose = pose
        self.width, self.height = pose.image_size
        self.tan_half = math.tan(math.radians(pose.fov_y) / 2.0)
        self._to_mesh = _rot_y(-pose.yaw)

        alpha = math.radians(pose.pitch)
        c_stage = distance * np.array([0.0, math.sin(alpha), math.cos(alpha)])
        f_stage = -c_stage / np.linalg.norm(c_stage)
        r_stage = np.array([1.0, 0.0, 0.0])
        u_stage = np.cross(r_stage, f_stage)

        # Film shift: highest projected vertex goes to the top row's center.
        v_stage = mesh.vertices @ _rot_y(pose.yaw).T
        rel = v_stage - c_stage
        depth = rel @ f_stage
        safe = depth > 1e-9
        ndc_y = (rel[safe] @ u_stage) / (depth[safe] * self.tan_half)
        top = float(ndc_y.max()) if len(ndc_y) else 0.0
        self.shift = top - (1.0 - 1.0 / self.height)

        self.origin = self._to_mesh @ c_stage
        self.right = self._to_mesh @ r_stage
        self.up = self._to_mesh @ u_stage
        self.forward = self._to_mesh @ f_stage
        self._rays: np.ndarray | None = None
        self._hit_t: np.ndarray | None = None
        self._ground: dict[float, tuple[np.ndarray, np.ndarray]] = {}

    def world_dirs_to_mesh(self, dirs: np.ndarray) -> np.ndarray:
        """Rotate stage-space (yawed object) directions into mesh space."""
        return np.ascontiguousarray(np.atleast_2d(dirs) @ self._to_mesh.T)

    @property
    def rays(self) -> np.ndarray:
        """Unit mesh-space ray directions, row-major (H*W, 3)."""
        if self._rays is None:
            w, h = self.width, self.height
            xs = (2.0 * (np.arange(w) + 0.5) / w - 1.0) * self.tan_half * (w / h)
            ys = (1.0 - 2.0 * (np.arange(h) + 0.5) / h + self.shift) * self.tan_half
            d = (
                self.forward
                + xs[None, :, None] * self.right
                + ys[:, None, None] * self.up
            )
            d /= np.linalg.norm(d, axis=2, keepdims=True)
            self._rays = np.ascontiguousarray(d.reshape(-1, 3))
        return self._rays

    def mesh_hit_t(self, mesh: Mesh) -> np.ndarray:
        """Closest camera-ray hit distance per pixel (inf = miss)."""
        if self._hit_t is None:
            rays = self.rays
            origins = np.broadcast_to(self.origin, rays.shape)
            origins = np.ascontiguousarray(origins)
            _, t = kernels.closest_hit(*mesh.kernel_args(), origins, rays)
            self._hit_t = t
        return self._hit_t

    def ground_geometry(self, mesh: Mesh, ground: GroundPlane):
        """Receiver-pixel mask (H, W) and their world points (M, 3).

        A pixel is a receiver pixel when its camera ray reaches the plane
        before (or instead of) the mesh.
        """
        key = float(ground.height)
        if key not in self._ground:
            rays = self.rays
            dy = rays[:, 1]
            with np.errstate(divide="ignore", invalid="ignore"):
                t_plane = (ground.height - self.origin[1]) / dy
            t_plane = np.where((dy < 0.0) & (t_plane > 0.0), t_plane, np.inf)
            is_ground = t_plane < self.mesh_hit_t(mesh)
            pts = self.origin + t_plane[is_ground, None] * rays[is_ground]
            mask = is_ground.reshape(self.height, self.width)
            self._ground[key] = (mask, np.ascontiguousarray(pts))
        return self._ground[key]


def render_mask(mesh: Mesh, pose: CameraPose, distance: float = DEFAULT_DISTANCE) -> np.ndarray:
    """Binary cutout mask: 1 where the camera ray hits the mesh."""
    frame = ViewFrame(mesh, pose, distance)
    rays = frame.rays
    origins = np.ascontiguousarray(np.broadcast_to(frame.origin, rays.shape))
    hit = kernels.any_hit(*mesh.kernel_args(), origins, rays)
    return hit.reshape(frame.height, frame.width).astype(np.float32)
