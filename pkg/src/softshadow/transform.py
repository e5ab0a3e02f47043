"""Inverse shadow transform: out = max(s) - s.

Lit regions become zero and shadow mass becomes positive, which is the
domain every metric is evaluated in. When a prediction/ground-truth pair is
inverted together, the ground truth's max is used for both so the shared
reference does not distort differences.
"""

from __future__ import annotations

import numpy as np


def invert_shadow(image: np.ndarray) -> np.ndarray:
    img = np.asarray(image)
    if not np.all(np.isfinite(img)):
        raise ValueError("invert_shadow requires finite input")
    return img.max() - img


def invert_pair(pred: np.ndarray, gt: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Invert both maps around the ground truth's max."""
    gt = np.asarray(gt)
    pred = np.asarray(pred)
    if not (np.all(np.isfinite(gt)) and np.all(np.isfinite(pred))):
        raise ValueError("invert_pair requires finite input")
    ref = gt.max()
    return ref - pred, ref - gt
