"""PFM (HDR float) and PNG image IO.

PFM files follow the standard: single-channel ``Pf``, negative scale for
little-endian, rows stored bottom-to-top. Arrays in memory are row 0 = top.
"""

from __future__ import annotations

import numpy as np
from PIL import Image


def write_pfm(path, image: np.ndarray) -> None:
    img = np.asarray(image, dtype=np.float32)
    if img.ndim != 2:
        raise ValueError(f"PFM writer expects a single-channel image, got shape {img.shape}")
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(b"Pf\n")
        fh.write(f"{w} {h}\n".encode())
        fh.write(b"-1.0\n")
        fh.write(np.ascontiguousarray(img[::-1]).astype("<f4").tobytes())


def pfm_bytes(image: np.ndarray) -> bytes:
    img = np.asarray(image, dtype=np.float32)
    h, w = img.shape
    return b"Pf\n" + f"{w} {h}\n".encode() + b"-1.0\n" + np.ascontiguousarray(img[::-1]).astype("<f4").tobytes()


def _read_token(fh) -> bytes:
    tok = b""
    while True:
        c = fh.read(1)
        if not c:
            raise ValueError("unexpected end of PFM header")
        if c in b" \t\r\n":
            if tok:
                return tok
            continue
        tok += c


def read_pfm(path=None, data: bytes | None = None) -> np.ndarray:
    if data is not None:
        import io

        fh = io.BytesIO(data)
        return _read_pfm_stream(fh, "<bytes>")
    with open(path, "rb") as fh:
        return _read_pfm_stream(fh, str(path))


def _read_pfm_stream(fh, name: str) -> np.ndarray:
    magic = _read_token(fh)
    if magic == b"PF":
        raise ValueError(f"{name}: color PFM not supported (expected single-channel 'Pf')")
    if magic != b"Pf":
        raise ValueError(f"{name}: not a PFM file (magic {magic!r})")
    w = int(_read_token(fh))
    h = int(_read_token(fh))
    scale = float(_read_token(fh))
    dtype = "<f4" if scale < 0 else ">f4"
    raw = fh.read(4 * w * h)
    if len(raw) != 4 * w * h:
        raise ValueError(f"{name}: PFM payload truncated ({len(raw)} of {4 * w * h} bytes)")
    img = np.frombuffer(raw, dtype=dtype).reshape(h, w)
    return np.ascontiguousarray(img[::-1]).astype(np.float32)


def write_mask_png(path, mask: np.ndarray) -> None:
    """Binary mask -> 8-bit single-channel PNG (0 or 255)."""
    arr = (np.asarray(mask) > 0.5).astype(np.uint8) * 255
    Image.fromarray(arr, mode="L").save(path)


def read_mask_png(path) -> np.ndarray:
    arr = np.asarray(Image.open(path).convert("L"))
    return (arr > 127).astype(np.float32)


def preview_png_bytes(image: np.ndarray, peak: float | None = None) -> bytes:
    """8-bit grayscale PNG preview of a float image, normalized by ``peak``."""
    import io

    img = np.asarray(image, dtype=np.float32)
    if peak is None:
        peak = float(img.max())
    if peak <= 0:
        arr = np.zeros(img.shape, dtype=np.uint8)
    else:
        arr = np.clip(img / peak * 255.0 + 0.5, 0, 255).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(arr, mode="L").save(buf, format="PNG")
    return buf.getvalue()


def read_color_png(data: bytes) -> np.ndarray:
    """Decode PNG bytes to float32 RGBA in [0, 1], shape (H, W, 4)."""
    import io

    img = Image.open(io.BytesIO(data)).convert("RGBA")
    return np.asarray(img).astype(np.float32) / 255.0


def color_png_bytes(rgb: np.ndarray) -> bytes:
    """Encode float32 RGB(A) in [0, 1] to PNG bytes."""
    import io

    arr = np.clip(np.asarray(rgb) * 255.0 + 0.5, 0, 255).astype(np.uint8)
    mode = "RGBA" if arr.shape[2] == 4 else "RGB"
    buf = io.BytesIO()
    Image.fromarray(arr, mode=mode).save(buf, format="PNG")
    return buf.getvalue()
