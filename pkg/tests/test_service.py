import base64
import json
import time
import zipfile
from io import BytesIO

import numpy as np
import pytest
from fastapi.testclient import TestClient

from softshadow import EnvLightMap, GaussianLight
from softshadow.bases import ShadowBasisSet, bases_bytes
from softshadow.imageio import color_png_bytes, read_pfm
from softshadow.geometry import mesh_to_obj
from softshadow.procgen import make_cube
from softshadow.service import READY, apply_strokes, create_app


def _b64(data: bytes) -> str:
    return base64.b64encode(data).decode()


def _elm_doc(*lights, ambient=0.0):
    return json.loads(
        EnvLightMap(
            lights=tuple(GaussianLight(*l) for l in lights), ambient=ambient
        ).to_json()
    )


def _synthetic_bases(size=32, fill=None, seed=0):
    if fill is None:
        grid = np.random.default_rng(seed).random((8, 32, size, size), dtype=np.float32) * 200
    else:
        grid = np.full((8, 32, size, size), fill, dtype=np.float32)
    return ShadowBasisSet(grid=grid, image_size=(size, size))


@pytest.fixture()
def client():
    return TestClient(create_app(ttl_s=3600))


@pytest.fixture()
def session(client):
    blob = bases_bytes(_synthetic_bases())
    r = client.post("/sessions", json={"bases_b64": _b64(blob)})
    assert r.status_code == 200
    return r.json()["id"]


# ------------------------------------------------------------------- lifecycle

def test_mesh_upload_builds_in_background(client):
    obj = mesh_to_obj(make_cube())
    r = client.post(
        "/sessions",
        json={"mesh_obj_b64": _b64(obj.encode()), "image_size": [24, 24], "spp": 8},
    )
    assert r.status_code == 200
    sid = r.json()["id"]
    states = {r.json().get("status", "building")}

    # not-ready sessions reject composition instead of blocking
    r = client.put(f"/sessions/{sid}/elm", json=_elm_doc((0.5, 0.25, 2.0, 0.01)))
    if r.status_code != 409:
        assert r.status_code == 200  # build already finished; nothing to reject
    else:
        assert "retry" in r.json()["detail"]

    deadline = time.time() + 120
    while time.time() < deadline:
        status = client.get(f"/sessions/{sid}/status").json()
        states.add(status["status"])
        if status["status"] == READY:
            break
        time.sleep(0.2)
    assert READY in states
    r = client.put(f"/sessions/{sid}/elm", json=_elm_doc((0.5, 0.25, 2.0, 0.01)))
    assert r.status_code == 200
    assert r.json()["shadow_peak"] > 0


def test_prebuilt_bases_session_is_ready_immediately(client, session):
    status = client.get(f"/sessions/{session}/status").json()
    assert status["status"] == READY
    assert status["progress"] == 1.0


def test_truncated_basis_upload_names_header_field(client):
    blob = bases_bytes(_synthetic_bases())[:10]
    r = client.post("/sessions", json={"bases_b64": _b64(blob)})
    assert r.status_code == 400
    assert "magic" in r.json()["detail"]


def test_malformed_obj_rejected_with_reason(client):
    r = client.post(
        "/sessions", json={"mesh_obj_b64": _b64(b"v 0 0 0\nf 1 2 nope\n")}
    )
    assert r.status_code == 400
    assert "line 2" in r.json()["detail"]


def test_exactly_one_payload_required(client, session):
    blob = _b64(bases_bytes(_synthetic_bases()))
    assert client.post("/sessions", json={}).status_code == 400
    assert (
        client.post(
            "/sessions", json={"bases_b64": blob, "mesh_obj_b64": _b64(b"v 0 0 0\n")}
        ).status_code
        == 400
    )


def test_unknown_session_is_404(client):
    assert client.get("/sessions/nope/status").status_code == 404


def test_sessions_expire_after_idle():
    client = TestClient(create_app(ttl_s=0.05))
    blob = _b64(bases_bytes(_synthetic_bases()))
    sid = client.post("/sessions", json={"bases_b64": blob}).json()["id"]
    assert client.get(f"/sessions/{sid}/status").status_code == 200
    time.sleep(0.2)
    assert client.get(f"/sessions/{sid}/status").status_code == 404


# --------------------------------------------------------------------- set_elm

def test_empty_light_list_composes_zero_with_timing(client, session):
    r = client.put(f"/sessions/{session}/elm", json=_elm_doc())
    assert r.status_code == 200
    body = r.json()
    assert body["shadow_peak"] == 0.0
    assert body["compose_ms"] >= 0.0
    shadow = read_pfm(data=client.get(f"/sessions/{session}/shadow?format=pfm").content)
    assert not shadow.any()


def test_identical_requests_return_identical_bytes(client, session):
    doc = _elm_doc((0.4, 0.2, 1.5, 0.02), (0.8, 0.3, 1.0, 0.05))
    a = client.put(f"/sessions/{session}/elm", json=doc).json()["shadow_png_b64"]
    b = client.put(f"/sessions/{session}/elm", json=doc).json()["shadow_png_b64"]
    assert a == b
    pa = client.get(f"/sessions/{session}/shadow?format=pfm&domain=inverse").content
    pb = client.get(f"/sessions/{session}/shadow?format=pfm&domain=inverse").content
    assert pa == pb


def test_shadow_endpoint_formats_and_domains(client, session):
    assert client.get(f"/sessions/{session}/shadow").status_code == 404
    client.put(f"/sessions/{session}/elm", json=_elm_doc((0.5, 0.25, 2.0, 0.01)))
    inv = read_pfm(data=client.get(f"/sessions/{session}/shadow?format=pfm&domain=inverse").content)
    rad = read_pfm(data=client.get(f"/sessions/{session}/shadow?format=pfm&domain=radiance").content)
    assert inv.shape == rad.shape == (32, 32)
    assert (rad + inv).std() < 1e-3 * max(rad.max(), 1.0)  # rad = T - inv
    png = client.get(f"/sessions/{session}/shadow?format=png")
    assert png.headers["content-type"] == "image/png"
    assert client.get(f"/sessions/{session}/shadow?format=bmp").status_code == 400
    assert client.get(f"/sessions/{session}/shadow?domain=weird").status_code == 400


def test_sessions_do_not_share_state(client):
    blob = _b64(bases_bytes(_synthetic_bases(seed=1)))
    s1 = client.post("/sessions", json={"bases_b64": blob}).json()["id"]
    s2 = client.post("/sessions", json={"bases_b64": blob}).json()["id"]
    r1 = client.put(f"/sessions/{s1}/elm", json=_elm_doc((0.2, 0.2, 2.0, 0.01)))
    r2 = client.put(f"/sessions/{s2}/elm", json=_elm_doc((0.7, 0.3, 1.0, 0.04)))
    assert r1.json()["shadow_png_b64"] != r2.json()["shadow_png_b64"]
    a1 = client.get(f"/sessions/{s1}/shadow?format=pfm").content
    r1b = client.put(f"/sessions/{s1}/elm", json=_elm_doc((0.2, 0.2, 2.0, 0.01)))
    assert client.get(f"/sessions/{s1}/shadow?format=pfm").content == a1


# ------------------------------------------------------------------- AO editing

def test_stroke_editing_flows_to_export_not_compose(client, session):
    doc = _elm_doc((0.5, 0.25, 2.0, 0.01))
    before_shadow = client.put(f"/sessions/{session}/elm", json=doc).json()["shadow_png_b64"]
    export_before = client.get(f"/sessions/{session}/export").content
    r = client.put(
        f"/sessions/{session}/ao/strokes",
        json={"strokes": [{"x": 16, "y": 16, "radius": 6, "value": 0.0}]},
    )
    assert r.status_code == 200
    export_after = client.get(f"/sessions/{session}/export").content

    def _ao(blob):
        with zipfile.ZipFile(BytesIO(blob)) as zf:
            return read_pfm(data=zf.read("ao.pfm"))

    ao_a, ao_b = _ao(export_before), _ao(export_after)
    yy, xx = np.mgrid[:32, :32]
    disk = ((yy - 16) ** 2 + (xx - 16) ** 2) <= 6**2
    outside = ~disk
    np.testing.assert_array_equal(ao_a[outside], ao_b[outside])
    assert (ao_b[disk] < ao_a[disk]).any()
    # compose unaffected by AO edits
    after_shadow = client.put(f"/sessions/{session}/elm", json=doc).json()["shadow_png_b64"]
    assert after_shadow == before_shadow


def test_zero_strokes_change_nothing(client, session):
    a = client.get(f"/sessions/{session}/export").content
    client.put(f"/sessions/{session}/ao/strokes", json={"strokes": []})
    assert client.get(f"/sessions/{session}/export").content == a


def test_full_coverage_zero_stroke_blackens_ao():
    pixels = np.ones((24, 24), np.float32) * 0.8
    out = apply_strokes(pixels, [{"x": 12, "y": 12, "radius": 200, "value": 0.0}])
    assert not out.any()


def test_out_of_bounds_strokes_clip_silently(client, session):
    r = client.put(
        f"/sessions/{session}/ao/strokes",
        json={"strokes": [{"x": -500, "y": 9000, "radius": 4, "value": 0.2}]},
    )
    assert r.status_code == 200


def test_lightening_stroke_uses_max_composite():
    pixels = np.zeros((24, 24), np.float32)
    out = apply_strokes(pixels, [{"x": 12, "y": 12, "radius": 8, "value": 1.0}])
    assert out.max() == pytest.approx(1.0)
    assert out[12, 12] == pytest.approx(1.0)
    assert out[0, 0] == 0.0


# ------------------------------------------------------------------- composite

def _add_background(client, sid, w=80, h=60, level=0.8):
    bg = np.full((h, w, 3), level, np.float32)
    r = client.put(f"/sessions/{sid}/background", json={"png_b64": _b64(color_png_bytes(bg))})
    assert r.status_code == 200
    return bg


def _add_cutout(client, sid, pos=(24, 10), scale=1.0):
    cut = np.zeros((32, 32, 4), np.float32)
    cut[8:24, 10:22] = [0.1, 0.2, 0.9, 1.0]
    r = client.put(
        f"/sessions/{sid}/cutout",
        json={"png_b64": _b64(color_png_bytes(cut)), "position": list(pos), "scale": scale},
    )
    assert r.status_code == 200


def test_composite_requires_all_layers(client, session):
    r = client.get(f"/sessions/{session}/composite")
    assert r.status_code == 412
    assert "background" in r.json()["detail"]
    _add_background(client, session)
    r = client.get(f"/sessions/{session}/composite")
    assert r.status_code == 412
    assert "cutout" in r.json()["detail"]


def test_zero_shadow_leaves_background_untouched_outside_cutout(client):
    blob = _b64(bases_bytes(_synthetic_bases(fill=0.0)))  # never any shadow
    sid = client.post("/sessions", json={"bases_b64": blob}).json()["id"]
    client.put(f"/sessions/{sid}/elm", json=_elm_doc((0.5, 0.25, 2.0, 0.01), ambient=0.01))
    _add_background(client, sid)
    _add_cutout(client, sid)
    from softshadow.imageio import read_color_png

    img = read_color_png(client.get(f"/sessions/{sid}/composite").content)
    np.testing.assert_allclose(img[:, :, :3][:, 0:10], 0.8, atol=2 / 255)
    assert img[:5, :, :3].max() <= 0.8 + 2 / 255


def test_full_shadow_blackens_ground(client):
    blob = _b64(bases_bytes(_synthetic_bases(fill=256.0)))  # occluded from everywhere
    sid = client.post("/sessions", json={"bases_b64": blob}).json()["id"]
    client.put(f"/sessions/{sid}/elm", json=_elm_doc(ambient=0.5))
    _add_background(client, sid)
    _add_cutout(client, sid, pos=(10, 10))
    from softshadow.imageio import read_color_png

    img = read_color_png(client.get(f"/sessions/{sid}/composite").content)
    # inside the placed frame but outside the cutout sprite: black
    assert img[12, 12, :3].max() <= 1 / 255
    # outside the frame: untouched
    np.testing.assert_allclose(img[:, 50:, :3], 0.8, atol=2 / 255)


def test_shadow_darkens_multiplicatively(client, session):
    client.put(f"/sessions/{session}/elm", json=_elm_doc((0.5, 0.2, 2.0, 0.02)))
    bg = _add_background(client, session)
    _add_cutout(client, session, pos=(0, 0))
    from softshadow.imageio import read_color_png

    img = read_color_png(client.get(f"/sessions/{session}/composite").content)
    outside_cutout = np.ones(img.shape[:2], dtype=bool)
    outside_cutout[6:26, 8:24] = False  # sprite box, padded for resampling
    vals = img[:, :, :3][outside_cutout]
    assert (vals <= bg[..., :3].max() + 2 / 255).all()
    assert (vals < 0.8 - 2 / 255).any()  # the shadow actually darkened something


def test_export_zip_contents_and_determinism(client, session):
    client.put(f"/sessions/{session}/elm", json=_elm_doc((0.5, 0.25, 2.0, 0.01)))
    a = client.get(f"/sessions/{session}/export").content
    b = client.get(f"/sessions/{session}/export").content
    assert a == b
    with zipfile.ZipFile(BytesIO(a)) as zf:
        names = set(zf.namelist())
    assert {"ao.pfm", "bases.ssbb", "shadow.pfm", "elm.json"} <= names


# --------------------------------------------------------------------- latency

def test_set_elm_latency_tail_is_bounded():
    app = create_app(ttl_s=3600)
    client = TestClient(app)
    store = app.state.store
    # large production-size bases, seeded in-process (latency spec excludes
    # transport, and a 90 MB upload would only test the wire)
    bs = _synthetic_bases(size=256, seed=2)
    bs.matrix
    session = store.create(status=READY, progress=1.0, bases=bs, image_size=(256, 256))
    doc = _elm_doc((0.4, 0.2, 1.5, 0.02))

    def batch():
        stamps = []
        for _ in range(210):
            r = client.put(f"/sessions/{session.id}/elm", json=doc)
            stamps.append(r.json()["compose_ms"])
            time.sleep(0.001)
        stamps = np.sort(np.array(stamps[10:]))  # drop warmup
        return stamps[len(stamps) // 2], stamps[int(len(stamps) * 0.95)]

    # one retry tolerates noisy-neighbor spikes on shared CPUs; systematic
    # degradation under repeated use fails both batches
    median, p95 = batch()
    if p95 > 2.0 * median:
        median, p95 = batch()
    assert p95 <= 2.0 * median, f"median {median:.3f} ms, p95 {p95:.3f} ms"
