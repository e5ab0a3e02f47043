"""Training triplet export: cutout mask, AO maps, shadow bases, manifest.

Bases are stored instead of pre-rendered soft shadows so consumers can
synthesize unlimited shadow targets on the fly; ``--materialize N`` can
additionally bake N seeded composed shadows for fixed-data consumers.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .ao import AOMap, compute_ao, perturb_ao
from .bases import ShadowBasisSet, ShadowMap, build_bases, compose, load_bases, save_bases
from .camera import CameraPose, GroundPlane, ViewFrame, canonical_poses, ground_for
from .elm import rasterize_elm, sample_elm
from .geometry import Mesh, load_mesh
from .imageio import read_mask_png, read_pfm, write_mask_png, write_pfm

MANIFEST_NAME = "manifest.jsonl"
# Salt mixed into per-pair seeds so pair AO perturbation and pair ELM draws
# use unrelated streams.
_PAIR_PERTURB_SALT = 0x5EED_A0


@dataclass
class DatasetTriplet:
    mask: np.ndarray
    ao: AOMap
    ao_perturbed: AOMap
    bases: ShadowBasisSet
    meta: dict


def _fmt_angle(v: float) -> str:
    return f"m{abs(v):g}" if v < 0 else f"{v:g}"


def triplet_stem(mesh_id: str, pose: CameraPose) -> str:
    return f"{mesh_id}_y{_fmt_angle(pose.yaw)}_p{_fmt_angle(pose.pitch)}"


def export_triplet(
    mesh: Mesh,
    pose: CameraPose,
    ground: GroundPlane,
    spp: int,
    out_dir,
    perturb_seed: int = 0,
    materialize: int = 0,
    manifest_path=None,
) -> dict:
    """Write one triplet's artifacts and append its manifest entry."""
    os.makedirs(out_dir, exist_ok=True)
    stem = triplet_stem(mesh.mesh_id, pose)
    frame = ViewFrame(mesh, pose)

    from .camera import render_mask

    mask = render_mask(mesh, pose)
    ao = compute_ao(mesh, pose, ground, spp=spp, frame=frame)
    ao_p = perturb_ao(ao, perturb_seed)
    bases = build_bases(mesh, pose, ground)

    names = {
        "mask": f"{stem}_mask.png",
        "ao": f"{stem}_ao.pfm",
        "ao_perturbed": f"{stem}_ao_perturbed.pfm",
        "bases": f"{stem}_bases.ssbb",
    }
    try:
        write_mask_png(os.path.join(out_dir, names["mask"]), mask)
        write_pfm(os.path.join(out_dir, names["ao"]), ao.pixels)
        write_pfm(os.path.join(out_dir, names["ao_perturbed"]), ao_p.pixels)
        save_bases(os.path.join(out_dir, names["bases"]), bases)
    except OSError as exc:
        raise OSError(f"failed writing triplet artifacts under {out_dir}: {exc}") from exc

    entry = {
        "mesh_id": mesh.mesh_id,
        "yaw": pose.yaw,
        "pitch": pose.pitch,
        "image_size": list(pose.image_size),
        "spp": spp,
        "perturb_seed": perturb_seed,
        **names,
    }
    if materialize > 0:
        shadows = []
        for k in range(materialize):
            sm = compose(bases, sample_elm(k))
            name = f"{stem}_shadow{k:03d}.pfm"
            write_pfm(os.path.join(out_dir, name), sm.pixels)
            shadows.append({"seed": k, "path": name})
        entry["materialized"] = shadows
    if manifest_path is None:
        manifest_path = os.path.join(out_dir, MANIFEST_NAME)
    with open(manifest_path, "a") as fh:
        fh.write(json.dumps(entry, sort_keys=True) + "\n")
    return entry


def export_dataset(mesh_paths, out_dir, spp: int = 256, materialize: int = 0,
                   image_size=(256, 256), base_seed: int = 0) -> list[dict]:
    """Export every mesh under all 15 canonical views."""
    entries = []
    for mesh_path in mesh_paths:
        mesh = load_mesh(mesh_path)
        ground = ground_for(mesh)
        for i, pose in enumerate(canonical_poses(image_size=image_size)):
            entries.append(
                export_triplet(
                    mesh, pose, ground, spp, out_dir,
                    perturb_seed=base_seed + i,
                    materialize=materialize,
                )
            )
    return entries


def read_manifest(out_dir) -> list[dict]:
    path = os.path.join(out_dir, MANIFEST_NAME)
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def load_triplet(out_dir, entry: dict) -> DatasetTriplet:
    mask = read_mask_png(os.path.join(out_dir, entry["mask"]))
    ao = AOMap(read_pfm(os.path.join(out_dir, entry["ao"])), entry["spp"])
    ao_p = AOMap(read_pfm(os.path.join(out_dir, entry["ao_perturbed"])), entry["spp"])
    bases = load_bases(os.path.join(out_dir, entry["bases"]))
    return DatasetTriplet(mask=mask, ao=ao, ao_perturbed=ao_p, bases=bases, meta=entry)


def sample_training_pair(triplet: DatasetTriplet, rng_seed: int):
    """One deterministic training sample from a triplet.

    Inputs are (mask, freshly perturbed AO, light raster); the target is the
    composed inverse-domain shadow for a seeded random light map.
    """
    elm = sample_elm(rng_seed)
    raster = rasterize_elm(elm)
    target: ShadowMap = compose(triplet.bases, raster)
    ao_p = perturb_ao(triplet.ao, rng_seed ^ _PAIR_PERTURB_SALT)
    inputs = {"mask": triplet.mask, "ao": ao_p.pixels, "elm": raster}
    return inputs, target
