"""Command-line interface."""

from __future__ import annotations

import glob
import json
import os
import sys

import click

from .ao import AOMap, compute_ao, perturb_ao
from .bases import build_bases, compose, load_bases, save_bases, to_radiance
from .camera import CameraPose, ground_for
from .elm import EnvLightMap, rasterize_elm, sample_elm
from .geometry import load_mesh
from .imageio import read_pfm, write_mask_png, write_pfm
from .metrics import evaluate_pair
from .oracle import render_oracle
from .transform import invert_pair, invert_shadow


def _pose(yaw: float, pitch: float, size: int) -> CameraPose:
    return CameraPose(yaw=yaw, pitch=pitch, image_size=(size, size))


def _load_elm_arg(path: str):
    """Light map argument: .json mixture document or .pfm raster."""
    if path.endswith(".pfm"):
        return read_pfm(path)
    with open(path) as fh:
        return EnvLightMap.from_json(fh.read())


@click.group()
def main():
    """Shadow basis compiler and soft-shadow compositor."""


@main.command()
@click.option("--mesh", required=True, type=click.Path(exists=True))
@click.option("--yaw", default=0.0, type=float)
@click.option("--pitch", default=0.0, type=float)
@click.option("--size", default=256, type=int, help="square image size in px")
@click.option("--out", required=True, type=click.Path())
def mask(mesh, yaw, pitch, size, out):
    """Render the binary cutout mask for one view."""
    from .camera import render_mask

    m = load_mesh(mesh)
    write_mask_png(out, render_mask(m, _pose(yaw, pitch, size)))
    click.echo(f"wrote {out}")


@main.command("sample-elm")
@click.option("--seed", required=True, type=int)
@click.option("--out", required=True, type=click.Path())
def sample_elm_cmd(seed, out):
    """Sample a random Gaussian-mixture light map."""
    elm = sample_elm(seed)
    with open(out, "w") as fh:
        fh.write(elm.to_json())
    click.echo(f"wrote {out} ({len(elm.lights)} lights, ambient {elm.ambient:.4f})")


@main.command("rasterize-elm")
@click.option("--in", "src", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
def rasterize_elm_cmd(src, out):
    """Rasterize a light map document to a 512x256 PFM."""
    with open(src) as fh:
        elm = EnvLightMap.from_json(fh.read())
    write_pfm(out, rasterize_elm(elm))
    click.echo(f"wrote {out}")


@main.command()
@click.option("--mesh", required=True, type=click.Path(exists=True))
@click.option("--yaw", default=0.0, type=float)
@click.option("--pitch", default=0.0, type=float)
@click.option("--size", default=256, type=int)
@click.option("--out", required=True, type=click.Path())
def bases(mesh, yaw, pitch, size, out):
    """Precompute the 8x32 hard-shadow basis grid for one view."""
    m = load_mesh(mesh)
    bs = build_bases(m, _pose(yaw, pitch, size), ground_for(m))
    save_bases(out, bs)
    click.echo(f"wrote {out}")


@main.command("compose")
@click.option("--bases", "bases_path", required=True, type=click.Path(exists=True))
@click.option("--elm", "elm_path", required=True, type=click.Path(exists=True),
              help="light map .json document or .pfm raster")
@click.option("--out", required=True, type=click.Path())
@click.option("--radiance", is_flag=True, help="write the radiance-domain map")
def compose_cmd(bases_path, elm_path, out, radiance):
    """Compose a soft shadow from a basis file and a light map."""
    bs = load_bases(bases_path)
    elm = _load_elm_arg(elm_path)
    shadow = compose(bs, elm)
    if radiance:
        shadow = to_radiance(shadow, elm)
    write_pfm(out, shadow.pixels)
    click.echo(f"wrote {out} ({shadow.domain} domain)")


@main.command()
@click.option("--mesh", required=True, type=click.Path(exists=True))
@click.option("--yaw", default=0.0, type=float)
@click.option("--pitch", default=0.0, type=float)
@click.option("--spp", default=256, type=int)
@click.option("--size", default=256, type=int)
@click.option("--seed", default=0, type=int)
@click.option("--out", required=True, type=click.Path())
def ao(mesh, yaw, pitch, spp, size, seed, out):
    """Compute the receiver-plane ambient occlusion map."""
    m = load_mesh(mesh)
    ao_map = compute_ao(m, _pose(yaw, pitch, size), ground_for(m), spp=spp, seed=seed)
    write_pfm(out, ao_map.pixels)
    click.echo(f"wrote {out}")


@main.command("perturb-ao")
@click.option("--in", "src", required=True, type=click.Path(exists=True))
@click.option("--seed", required=True, type=int)
@click.option("--out", required=True, type=click.Path())
def perturb_ao_cmd(src, seed, out):
    """Random erosion/dilation of an AO map's occlusion channel."""
    ao_map = AOMap(read_pfm(src), 0)
    write_pfm(out, perturb_ao(ao_map, seed).pixels)
    click.echo(f"wrote {out}")


@main.command()
@click.option("--in", "src", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
def invert(src, out):
    """Inverse shadow transform: max(s) - s."""
    write_pfm(out, invert_shadow(read_pfm(src)))
    click.echo(f"wrote {out}")


@main.command()
@click.option("--pred", required=True, type=click.Path(exists=True))
@click.option("--gt", required=True, type=click.Path(exists=True))
@click.option("--domain", default="inverse", type=click.Choice(["inverse", "radiance"]),
              help="domain of both maps")
@click.option("--pred-domain", default=None, type=click.Choice(["inverse", "radiance"]),
              help="override for the prediction only")
@click.option("--gt-domain", default=None, type=click.Choice(["inverse", "radiance"]),
              help="override for the ground truth only")
@click.option("--json", "as_json", is_flag=True)
def metrics(pred, gt, domain, pred_domain, gt_domain, as_json):
    """Shadow metrics between two maps, measured in the inverse domain."""
    pd = pred_domain or domain
    gd = gt_domain or domain
    if pd != gd:
        click.echo(f"error: mixed-domain pair refused (pred={pd}, gt={gd})", err=True)
        sys.exit(2)
    a = read_pfm(pred)
    b = read_pfm(gt)
    if pd == "radiance":
        a, b = invert_pair(a, b)
    report = evaluate_pair(a, b)
    if as_json:
        click.echo(report.to_json())
    else:
        click.echo(f"rmse    {report.rmse:.6f}")
        click.echo(f"rmse_s  {report.rmse_s:.6f}")
        click.echo(f"zncc    {report.zncc:.6f}")
        click.echo(f"dssim   {report.dssim:.6f}")


@main.command()
@click.option("--mesh", required=True, type=click.Path(exists=True))
@click.option("--yaw", default=0.0, type=float)
@click.option("--pitch", default=0.0, type=float)
@click.option("--size", default=256, type=int)
@click.option("--elm", "elm_path", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
def oracle(mesh, yaw, pitch, size, elm_path, out):
    """Brute-force per-pixel-light reference shadow render."""
    m = load_mesh(mesh)
    shadow = render_oracle(m, _pose(yaw, pitch, size), ground_for(m), _load_elm_arg(elm_path))
    write_pfm(out, shadow.pixels)
    click.echo(f"wrote {out}")


@main.command()
@click.option("--mesh-dir", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--spp", default=256, type=int)
@click.option("--size", default=256, type=int)
@click.option("--materialize", default=0, type=int,
              help="additionally bake N seeded composed shadows per triplet")
def export(mesh_dir, out_dir, spp, size, materialize):
    """Export mask/AO/bases triplets for every OBJ under all 15 views."""
    from .dataset import export_dataset

    meshes = sorted(glob.glob(os.path.join(mesh_dir, "*.obj")))
    if not meshes:
        raise click.UsageError(f"no .obj files in {mesh_dir}")
    entries = export_dataset(meshes, out_dir, spp=spp, materialize=materialize,
                             image_size=(size, size))
    click.echo(f"exported {len(entries)} triplets to {out_dir}")


@main.command()
@click.option("--port", default=8000, type=int, envvar="SOFTSHADOW_PORT",
              show_envvar=True)
@click.option("--host", default="127.0.0.1", envvar="SOFTSHADOW_HOST")
@click.option("--data-dir", default=None, type=click.Path(),
              help="optional directory for persisted session exports")
def serve(port, host, data_dir):
    """Run the interactive editing service."""
    if data_dir:
        os.makedirs(data_dir, exist_ok=True)
    from .service import serve as run

    click.echo(f"serving on http://{host}:{port}")
    run(port=port, host=host, data_dir=data_dir)


@main.command()
@click.option("--image", default=96, type=int)
@click.option("--spp", default=64, type=int)
def bench(image, spp):
    """Benchmark the compiled kernels against the pure-Python fallback."""
    from .bench import run_benchmark

    run_benchmark(image=image, spp=spp)


if __name__ == "__main__":
    main()
