"""Soft-shadow basis compiler and compositor.

Precomputes hard-shadow bases for a mesh seen from canonical views, then
composes physically consistent soft shadows for Gaussian-mixture environment
light maps in milliseconds, with ground ambient occlusion, quality metrics,
a brute-force validation renderer, dataset export, and an HTTP service for
interactive editing.
"""

from .ao import AOMap, apply_morphology, compute_ao, perturb_ao
from .camera import CameraPose, GroundPlane, ViewFrame, canonical_poses, ground_for, render_mask
from .elm import EnvLightMap, GaussianLight, pixel_direction, rasterize_elm, sample_elm
from .geometry import Bvh, Mesh, load_mesh, make_mesh
from .metrics import MetricReport, dssim, losses, rmse, rmse_s, zncc
from .oracle import render_oracle, render_oracle_many
from .bases import ShadowBasisSet, ShadowMap, build_bases, compose, hard_shadow, to_radiance
from .transform import invert_shadow

__version__ = "0.1.0"

__all__ = [
    "AOMap",
    "Bvh",
    "CameraPose",
    "EnvLightMap",
    "GaussianLight",
    "GroundPlane",
    "Mesh",
    "MetricReport",
    "ShadowBasisSet",
    "ShadowMap",
    "ViewFrame",
    "apply_morphology",
    "build_bases",
    "canonical_poses",
    "compose",
    "compute_ao",
    "dssim",
    "ground_for",
    "hard_shadow",
    "invert_shadow",
    "load_mesh",
    "losses",
    "make_mesh",
    "perturb_ao",
    "pixel_direction",
    "rasterize_elm",
    "render_mask",
    "render_oracle",
    "render_oracle_many",
    "rmse",
    "rmse_s",
    "sample_elm",
    "to_radiance",
    "zncc",
]
