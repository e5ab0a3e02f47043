"""HTTP session service for interactive shadow editing.

Sessions wrap one caster (uploaded mesh or prebuilt bases): the basis build
runs off the request path, light-map updates compose in milliseconds, the AO
map takes brush edits, and a background plus cutout can be composited under
the live shadow. Requests within a session are serialized by a per-session
lock; distinct sessions never share mutable state.
"""

from __future__ import annotations

import base64
import io
import os
import threading
import time
import uuid
import zipfile
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, HTTPException, Request, Response
from PIL import Image

from .ao import AOMap, compute_ao
from .bases import (
    ShadowBasisSet,
    ShadowMap,
    bases_bytes,
    build_bases,
    compose,
    load_bases_bytes,
    to_radiance,
)
from .camera import CameraPose, ViewFrame, ground_for, render_mask
from .elm import EnvLightMap, rasterize_elm, total_top_intensity
from .errors import BasisFormatError, DegenerateMeshError, MeshFormatError
from .geometry import load_mesh_text
from .imageio import (
    color_png_bytes,
    pfm_bytes,
    preview_png_bytes,
    read_color_png,
    read_pfm,
)

DEFAULT_TTL_S = 30 * 60
DEFAULT_SESSION_SPP = 64

BUILDING = "building"
READY = "ready"
ERROR = "error"


@dataclass
class Session:
    id: str
    lock: threading.Lock = field(default_factory=threading.Lock)
    status: str = BUILDING
    progress: float = 0.0
    error: str = ""
    image_size: tuple[int, int] = (256, 256)
    bases: ShadowBasisSet | None = None
    mask: np.ndarray | None = None
    ao: AOMap | None = None
    elm_doc: str | None = None
    raster: np.ndarray | None = None
    shadow: ShadowMap | None = None
    compose_ms: float = 0.0
    background: np.ndarray | None = None  # float RGBA (H, W, 4)
    cutout: np.ndarray | None = None      # float RGBA, session-frame sized
    cutout_pos: tuple[float, float] = (0.0, 0.0)
    cutout_scale: float = 1.0
    last_access: float = field(default_factory=time.monotonic)


class SessionStore:
    def __init__(self, ttl_s: float = DEFAULT_TTL_S):
        self.ttl_s = ttl_s
        self._lock = threading.Lock()
        self._sessions: dict[str, Session] = {}

    def create(self, **kwargs) -> Session:
        session = Session(id=uuid.uuid4().hex, **kwargs)
        with self._lock:
            self._expire_locked()
            self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session:
        with self._lock:
            self._expire_locked()
            session = self._sessions.get(session_id)
            if session is None:
                raise HTTPException(status_code=404, detail=f"no session {session_id}")
            session.last_access = time.monotonic()
            return session

    def _expire_locked(self) -> None:
        now = time.monotonic()
        dead = [
            sid for sid, s in self._sessions.items()
            if now - s.last_access > self.ttl_s and s.status != BUILDING
        ]
        for sid in dead:
            del self._sessions[sid]


def _b64_bytes(doc: dict, key: str) -> bytes | None:
    val = doc.get(key)
    if val is None:
        return None
    try:
        return base64.b64decode(val)
    except Exception:
        raise HTTPException(status_code=400, detail=f"field {key!r} is not valid base64")


def _build_session(session: Session, mesh, pose: CameraPose, spp: int,
                   data_dir: str | None = None) -> None:
    try:
        ground = ground_for(mesh)
        frame = ViewFrame(mesh, pose)
        session.mask = render_mask(mesh, pose)
        session.progress = 0.05
        session.ao = compute_ao(mesh, pose, ground, spp=spp, frame=frame)
        session.progress = 0.15

        def on_progress(frac: float) -> None:
            session.progress = 0.15 + 0.85 * frac

        bases = build_bases(mesh, pose, ground, progress=on_progress)
        if data_dir:
            # persisted bases make an equivalent session cheap to recreate
            from .bases import save_bases

            try:
                save_bases(os.path.join(data_dir, f"{session.id}.ssbb"), bases)
            except OSError:
                pass
        with session.lock:
            session.bases = bases
            session.progress = 1.0
            session.status = READY
    except Exception as exc:  # surfaced through /status
        with session.lock:
            session.error = str(exc)
            session.status = ERROR


def _require_ready(session: Session) -> None:
    if session.status == BUILDING:
        raise HTTPException(
            status_code=409,
            detail=f"session bases not ready (progress {session.progress:.2f}), retry later",
        )
    if session.status == ERROR:
        raise HTTPException(status_code=500, detail=f"session build failed: {session.error}")


def _resize_float(img: np.ndarray, size: tuple[int, int]) -> np.ndarray:
    """Bilinear resize of a single-channel float image to (w, h)."""
    pil = Image.fromarray(np.asarray(img, dtype=np.float32), mode="F")
    return np.asarray(pil.resize(size, Image.BILINEAR), dtype=np.float32)


def _resize_rgba(img: np.ndarray, size: tuple[int, int]) -> np.ndarray:
    arr = np.clip(np.asarray(img) * 255.0 + 0.5, 0, 255).astype(np.uint8)
    pil = Image.fromarray(arr, mode="RGBA").resize(size, Image.BILINEAR)
    return np.asarray(pil).astype(np.float32) / 255.0


def apply_strokes(pixels: np.ndarray, strokes: list[dict]) -> np.ndarray:
    """Soft disk stamps; min-composite darkens, max-composite lightens.

    Out-of-bounds strokes are clipped silently. Mode 'auto' darkens when the
    stroke value is at or below the disk's current mean.
    """
    out = pixels.astype(np.float32).copy()
    h, w = out.shape
    for stroke in strokes:
        cx = float(stroke["x"])
        cy = float(stroke["y"])
        radius = max(float(stroke["radius"]), 0.5)
        value = float(np.clip(stroke["value"], 0.0, 1.0))
        mode = stroke.get("mode", "auto")
        x0 = max(int(np.floor(cx - radius)), 0)
        x1 = min(int(np.ceil(cx + radius)) + 1, w)
        y0 = max(int(np.floor(cy - radius)), 0)
        y1 = min(int(np.ceil(cy + radius)) + 1, h)
        if x0 >= x1 or y0 >= y1:
            continue
        yy, xx = np.mgrid[y0:y1, x0:x1]
        dist = np.sqrt((xx - cx) ** 2 + (yy - cy) ** 2)
        # plateau to 0.75 r, cosine falloff to the rim
        falloff = np.clip((radius - dist) / (0.25 * radius), 0.0, 1.0)
        weight = 0.5 - 0.5 * np.cos(np.pi * falloff)
        region = out[y0:y1, x0:x1]
        blend = weight * value + (1.0 - weight) * region
        if mode == "auto":
            disk = dist <= radius
            mode = "darken" if not disk.any() or value <= region[disk].mean() else "lighten"
        if mode == "darken":
            region[:] = np.minimum(region, blend)
        else:
            region[:] = np.maximum(region, blend)
    return out


def _composite(session: Session) -> np.ndarray:
    missing = []
    if session.background is None:
        missing.append("background")
    if session.cutout is None:
        missing.append("cutout")
    if session.shadow is None:
        missing.append("shadow")
    if missing:
        raise HTTPException(status_code=412, detail=f"missing layer(s): {', '.join(missing)}")
    bg = session.background[..., :3].copy()
    bh, bw = bg.shape[:2]
    sw, sh = session.image_size
    scale = session.cutout_scale
    fw, fh = max(int(round(sw * scale)), 1), max(int(round(sh * scale)), 1)
    px, py = (int(round(v)) for v in session.cutout_pos)

    total = total_top_intensity(session.raster)
    radiance = to_radiance(session.shadow, session.raster)
    norm = radiance.pixels / total if total > 0 else np.ones_like(radiance.pixels)
    if session.shadow.ground_mask is not None:
        norm = np.where(session.shadow.ground_mask, norm, 1.0)
    norm = _resize_float(np.clip(norm, 0.0, 1.0), (fw, fh))
    cut = _resize_rgba(session.cutout, (fw, fh))

    # clip frame to background
    x0, y0 = max(px, 0), max(py, 0)
    x1, y1 = min(px + fw, bw), min(py + fh, bh)
    if x0 < x1 and y0 < y1:
        sx0, sy0 = x0 - px, y0 - py
        sx1, sy1 = sx0 + (x1 - x0), sy0 + (y1 - y0)
        region = bg[y0:y1, x0:x1]
        region *= norm[sy0:sy1, sx0:sx1, None]
        alpha = cut[sy0:sy1, sx0:sx1, 3:4]
        region[:] = alpha * cut[sy0:sy1, sx0:sx1, :3] + (1.0 - alpha) * region
    return bg


def _export_zip(session: Session) -> bytes:
    buf = io.BytesIO()
    # fixed timestamps + stored entries keep the archive byte-deterministic
    with zipfile.ZipFile(buf, "w", compression=zipfile.ZIP_STORED) as zf:
        def put(name: str, data: bytes) -> None:
            info = zipfile.ZipInfo(name, date_time=(1980, 1, 1, 0, 0, 0))
            zf.writestr(info, data)

        if session.mask is not None:
            arr = (session.mask > 0.5).astype(np.uint8) * 255
            out = io.BytesIO()
            Image.fromarray(arr, mode="L").save(out, format="PNG")
            put("mask.png", out.getvalue())
        if session.ao is not None:
            put("ao.pfm", pfm_bytes(session.ao.pixels))
        if session.bases is not None:
            put("bases.ssbb", bases_bytes(session.bases))
        if session.shadow is not None:
            put("shadow.pfm", pfm_bytes(session.shadow.pixels))
        if session.elm_doc is not None:
            put("elm.json", session.elm_doc.encode())
        if (
            session.background is not None
            and session.cutout is not None
            and session.shadow is not None
        ):
            put("composite.png", color_png_bytes(_composite(session)))
    return buf.getvalue()


def create_app(ttl_s: float | None = None, data_dir: str | None = None) -> FastAPI:
    if ttl_s is None:
        ttl_s = float(os.environ.get("SOFTSHADOW_SESSION_TTL", DEFAULT_TTL_S))
    if data_dir is None:
        data_dir = os.environ.get("SOFTSHADOW_DATA_DIR")
    app = FastAPI(title="softshadow service")
    store = SessionStore(ttl_s=ttl_s)
    app.state.store = store

    @app.post("/sessions")
    def create_session(doc: dict):
        mesh_obj = _b64_bytes(doc, "mesh_obj_b64")
        bases_blob = _b64_bytes(doc, "bases_b64")
        if (mesh_obj is None) == (bases_blob is None):
            raise HTTPException(
                status_code=400,
                detail="provide exactly one of 'mesh_obj_b64' or 'bases_b64'",
            )
        if bases_blob is not None:
            try:
                bases = load_bases_bytes(bases_blob)
            except BasisFormatError as exc:
                raise HTTPException(status_code=400, detail=str(exc))
            session = store.create(
                status=READY, progress=1.0, bases=bases, image_size=bases.image_size
            )
            mask_blob = _b64_bytes(doc, "mask_b64")
            if mask_blob is not None:
                rgba = read_color_png(mask_blob)
                session.mask = (rgba[..., :3].mean(axis=2) > 0.5).astype(np.float32)
            ao_blob = _b64_bytes(doc, "ao_b64")
            w, h = bases.image_size
            if ao_blob is not None:
                session.ao = AOMap(read_pfm(data=ao_blob), 0)
            else:
                session.ao = AOMap(np.ones((h, w), dtype=np.float32), 0)
            return {"id": session.id, "status": session.status}

        try:
            mesh = load_mesh_text(mesh_obj.decode("utf-8", errors="replace"))
        except (MeshFormatError, DegenerateMeshError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        size = doc.get("image_size", [256, 256])
        try:
            w, h = int(size[0]), int(size[1])
        except (TypeError, ValueError, IndexError):
            raise HTTPException(status_code=400, detail="image_size must be [width, height]")
        pose = CameraPose(
            yaw=float(doc.get("yaw", 0.0)),
            pitch=float(doc.get("pitch", 0.0)),
            image_size=(w, h),
        )
        spp = int(doc.get("spp", DEFAULT_SESSION_SPP))
        session = store.create(image_size=(w, h))
        threading.Thread(
            target=_build_session, args=(session, mesh, pose, spp, data_dir), daemon=True
        ).start()
        return {"id": session.id, "status": session.status}

    @app.get("/sessions/{session_id}/status")
    def session_status(session_id: str):
        session = store.get(session_id)
        return {
            "status": session.status,
            "progress": round(session.progress, 4),
            "error": session.error,
        }

    @app.put("/sessions/{session_id}/elm")
    def set_elm(session_id: str, doc: dict):
        session = store.get(session_id)
        _require_ready(session)
        with session.lock:
            try:
                elm = EnvLightMap.from_json_doc(doc)
            except Exception as exc:
                raise HTTPException(status_code=400, detail=f"bad light map document: {exc}")
            t0 = time.perf_counter()
            raster = rasterize_elm(elm)
            t1 = time.perf_counter()
            shadow = compose(session.bases, raster)
            compose_ms = (time.perf_counter() - t1) * 1000.0
            session.elm_doc = elm.to_json()
            session.raster = raster
            session.shadow = shadow
            session.compose_ms = compose_ms
            peak = float(shadow.pixels.max())
            out = {
                "compose_ms": compose_ms,
                "rasterize_ms": (t1 - t0) * 1000.0,
                "width": session.image_size[0],
                "height": session.image_size[1],
                "shadow_peak": peak,
                "shadow_png_b64": base64.b64encode(
                    preview_png_bytes(shadow.pixels, peak if peak > 0 else 1.0)
                ).decode(),
            }
            if session.background is not None and session.cutout is not None:
                out["preview_png_b64"] = base64.b64encode(
                    color_png_bytes(_composite(session))
                ).decode()
            return out

    @app.get("/sessions/{session_id}/shadow")
    def get_shadow(session_id: str, format: str = "pfm", domain: str = "inverse"):
        session = store.get(session_id)
        _require_ready(session)
        with session.lock:
            if session.shadow is None:
                raise HTTPException(status_code=404, detail="no shadow composed yet")
            if domain == "inverse":
                shadow = session.shadow
            elif domain == "radiance":
                shadow = to_radiance(session.shadow, session.raster)
            else:
                raise HTTPException(status_code=400, detail=f"unknown domain {domain!r}")
            if format == "pfm":
                return Response(pfm_bytes(shadow.pixels), media_type="application/octet-stream")
            if format == "png":
                return Response(preview_png_bytes(shadow.pixels), media_type="image/png")
            raise HTTPException(status_code=400, detail=f"unknown format {format!r}")

    @app.put("/sessions/{session_id}/ao/strokes")
    def put_strokes(session_id: str, doc: dict):
        session = store.get(session_id)
        with session.lock:
            if session.ao is None:
                raise HTTPException(status_code=412, detail="session has no AO map")
            strokes = doc.get("strokes", [])
            pixels = apply_strokes(session.ao.pixels, strokes)
            session.ao = AOMap(pixels, session.ao.samples_per_pixel)
            return {
                "ao_png_b64": base64.b64encode(preview_png_bytes(pixels, 1.0)).decode(),
                "applied": len(strokes),
            }

    async def _image_payload(request: Request, key: str = "png_b64") -> bytes:
        ctype = request.headers.get("content-type", "")
        if ctype.startswith("image/"):
            return await request.body()
        doc = await request.json()
        data = _b64_bytes(doc, key)
        if data is None:
            raise HTTPException(status_code=400, detail=f"missing {key!r} or raw image body")
        return data

    @app.put("/sessions/{session_id}/background")
    async def put_background(session_id: str, request: Request):
        session = store.get(session_id)
        data = await _image_payload(request)
        try:
            rgba = read_color_png(data)
        except Exception:
            raise HTTPException(status_code=400, detail="background is not a decodable image")
        with session.lock:
            session.background = rgba
        return {"width": rgba.shape[1], "height": rgba.shape[0]}

    @app.put("/sessions/{session_id}/cutout")
    def put_cutout(session_id: str, doc: dict):
        session = store.get(session_id)
        data = _b64_bytes(doc, "png_b64")
        if data is None:
            raise HTTPException(status_code=400, detail="missing 'png_b64'")
        try:
            rgba = read_color_png(data)
        except Exception:
            raise HTTPException(status_code=400, detail="cutout is not a decodable image")
        pos = doc.get("position", [0, 0])
        with session.lock:
            session.cutout = rgba
            session.cutout_pos = (float(pos[0]), float(pos[1]))
            session.cutout_scale = float(doc.get("scale", 1.0))
        return {"ok": True}

    @app.get("/sessions/{session_id}/composite")
    def get_composite(session_id: str):
        session = store.get(session_id)
        with session.lock:
            return Response(color_png_bytes(_composite(session)), media_type="image/png")

    @app.get("/sessions/{session_id}/export")
    def get_export(session_id: str):
        session = store.get(session_id)
        _require_ready(session)
        with session.lock:
            return Response(_export_zip(session), media_type="application/zip")

    _mount_frontend(app)
    return app


def _mount_frontend(app: FastAPI) -> None:
    """Serve the browser editor when its build output exists."""
    root = os.environ.get("SOFTSHADOW_FRONTEND_DIR")
    if not root:
        here = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
        root = os.path.join(here, "frontend", "dist")
    if os.path.isdir(root):
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=root, html=True), name="editor")


def serve(port: int = 8000, host: str = "127.0.0.1", ttl_s: float | None = None,
          data_dir: str | None = None) -> None:
    import uvicorn

    uvicorn.run(create_app(ttl_s=ttl_s, data_dir=data_dir), host=host, port=port,
                log_level="warning")
