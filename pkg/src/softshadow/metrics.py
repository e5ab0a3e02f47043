"""Shadow quality metrics, all evaluated in the inverse shadow domain.

RMSE, scale-invariant RMSE-s, ZNCC (Pearson), and DSSIM, plus the per-pixel
mean-squared L2 losses used for AO/shadow pairs. L2 here is the *mean* of
squared differences (= rmse**2), stated in the report schema.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from .bases import INVERSE, ShadowMap
from .errors import DomainMismatchError, GeometryMismatchError, UndefinedMetricError

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


@dataclass
class MetricReport:
    rmse: float
    rmse_s: float
    zncc: float
    dssim: float
    l2_ao: float | None = None
    l2_shadow: float | None = None
    l2_convention: str = "mean"

    def to_json(self) -> str:
        doc = {
            "rmse": self.rmse,
            "rmse_s": self.rmse_s,
            "zncc": self.zncc,
            "dssim": self.dssim,
            "l2_convention": self.l2_convention,
        }
        if self.l2_ao is not None:
            doc["l2_ao"] = self.l2_ao
        if self.l2_shadow is not None:
            doc["l2_shadow"] = self.l2_shadow
        return json.dumps(doc)


def _pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise GeometryMismatchError(f"image dimensions differ: {a.shape} vs {b.shape}")
    return a, b


def rmse(a, b) -> float:
    a, b = _pair(a, b)
    return float(np.sqrt(np.mean((a - b) ** 2)))


def rmse_s(pred, gt) -> float:
    """RMSE after the least-squares optimal scalar scaling of the prediction."""
    pred, gt = _pair(pred, gt)
    denom = float(np.dot(pred.ravel(), pred.ravel()))
    scale = float(np.dot(pred.ravel(), gt.ravel())) / denom if denom > 0.0 else 0.0
    return float(np.sqrt(np.mean((scale * pred - gt) ** 2)))


def zncc(a, b) -> float:
    a, b = _pair(a, b)
    a = a - a.mean()
    b = b - b.mean()
    va = float(np.mean(a * a))
    vb = float(np.mean(b * b))
    if va <= 0.0 or vb <= 0.0:
        raise UndefinedMetricError("zncc undefined for zero-variance input")
    c = float(np.mean(a * b)) / np.sqrt(va * vb)
    return float(np.clip(c, -1.0, 1.0))


def _gauss_kernel() -> np.ndarray:
    r = SSIM_WINDOW // 2
    x = np.arange(-r, r + 1, dtype=np.float64)
    g = np.exp(-(x**2) / (2.0 * SSIM_SIGMA**2))
    return g / g.sum()


def _windowed(img: np.ndarray, g: np.ndarray) -> np.ndarray:
    # Separable Gaussian, then crop to the valid region (padding-independent).
    r = SSIM_WINDOW // 2
    f = correlate1d(img, g, axis=0, mode="nearest")
    f = correlate1d(f, g, axis=1, mode="nearest")
    return f[r:-r, r:-r]


def dssim(pred, gt) -> float:
    """(1 - SSIM) / 2 with an 11x11 Gaussian window (sigma 1.5).

    Dynamic range is taken from the ground truth (1.0 when constant).
    """
    pred, gt = _pair(pred, gt)
    h, w = gt.shape
    if h < SSIM_WINDOW or w < SSIM_WINDOW:
        raise GeometryMismatchError(
            f"image {w}x{h} smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} SSIM window"
        )
    drange = float(gt.max() - gt.min())
    if drange == 0.0:
        drange = 1.0
    c1 = (SSIM_K1 * drange) ** 2
    c2 = (SSIM_K2 * drange) ** 2
    g = _gauss_kernel()
    mu_a = _windowed(pred, g)
    mu_b = _windowed(gt, g)
    var_a = _windowed(pred * pred, g) - mu_a**2
    var_b = _windowed(gt * gt, g) - mu_b**2
    cov = _windowed(pred * gt, g) - mu_a * mu_b
    ssim_map = ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) / (
        (mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2)
    )
    val = (1.0 - float(ssim_map.mean())) / 2.0
    return float(min(max(val, 0.0), 1.0))


def _l2_mean(a, b) -> float:
    a, b = _pair(a, b)
    return float(np.mean((a - b) ** 2))


def losses(pred_ao, gt_ao, pred_shadow: ShadowMap, gt_shadow: ShadowMap):
    """Mean-squared L2 pair losses: (ao, shadow). Shadow maps must be inverse-domain."""
    if pred_shadow.domain != INVERSE or gt_shadow.domain != INVERSE:
        raise DomainMismatchError(
            f"shadow loss requires inverse-domain maps, got "
            f"{pred_shadow.domain!r} vs {gt_shadow.domain!r}"
        )
    ao_a = pred_ao.pixels if hasattr(pred_ao, "pixels") else pred_ao
    ao_b = gt_ao.pixels if hasattr(gt_ao, "pixels") else gt_ao
    return _l2_mean(ao_a, ao_b), _l2_mean(pred_shadow.pixels, gt_shadow.pixels)


def evaluate_pair(pred, gt) -> MetricReport:
    """All four metrics on an inverse-domain pair, plus the shadow L2."""
    return MetricReport(
        rmse=rmse(pred, gt),
        rmse_s=rmse_s(pred, gt),
        zncc=zncc(pred, gt),
        dssim=dssim(pred, gt),
        l2_shadow=_l2_mean(pred, gt),
    )
