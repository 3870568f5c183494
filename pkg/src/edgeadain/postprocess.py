"""Turn a stylised rendering into a binary vessel mask."""
from dataclasses import dataclass

import numpy as np

from . import morphology
from .core import check_image, check_mask, to_gray

NBINS = 256


@dataclass
class PostConfig:
    threshold_mode: str = "otsu"  # "otsu" or "fixed"
    fixed_threshold: float = 0.5
    polarity: str = "auto"  # "dark-strokes", "bright-strokes" or "auto"
    close_radius: int = 1
    open_radius: int = 1
    min_component: int = 30

    def __post_init__(self):
        if self.threshold_mode not in ("otsu", "fixed"):
            raise ValueError(f"unknown threshold_mode {self.threshold_mode!r}")
        if self.polarity not in ("dark-strokes", "bright-strokes", "auto"):
            raise ValueError(f"unknown polarity {self.polarity!r}")
        if not 0.0 < self.fixed_threshold < 1.0:
            raise ValueError("fixed_threshold must lie in (0, 1)")
        if self.close_radius < 0 or self.open_radius < 0 or self.min_component < 0:
            raise ValueError("radii and min_component must be >= 0")


def quantize(gray):
    return np.clip((np.asarray(gray, dtype=np.float64) * NBINS).astype(np.int64), 0, NBINS - 1)


def otsu_bin(gray):
    """Last bin of the lower class that maximises between-class variance."""
    hist = np.bincount(quantize(gray).ravel(), minlength=NBINS).astype(np.float64)
    p = hist / hist.sum()
    omega = np.cumsum(p)
    mu = np.cumsum(p * np.arange(NBINS))
    mu_t = mu[-1]
    denom = omega * (1.0 - omega)
    with np.errstate(divide="ignore", invalid="ignore"):
        between = np.where(denom > 0, (mu_t * omega - mu) ** 2 / denom, 0.0)
    return int(np.argmax(between))


def binarize(stylized, cfg=None):
    """Threshold the gray rendering; True marks vessel pixels."""
    cfg = cfg or PostConfig()
    gray = to_gray(check_image(stylized))[:, :, 0]
    if gray.max() == gray.min():
        return np.zeros(gray.shape, dtype=bool)
    if cfg.threshold_mode == "otsu":
        bright = quantize(gray) > otsu_bin(gray)
    else:
        bright = gray > cfg.fixed_threshold
    if cfg.polarity == "bright-strokes":
        return bright
    if cfg.polarity == "dark-strokes":
        return ~bright
    # strokes are the minority side of the threshold
    return ~bright if bright.mean() > 0.5 else bright


def remove_small_components(mask, min_size, backend=None):
    if min_size <= 1:
        return mask.copy()
    labels, n = morphology.label(mask, backend)
    if n == 0:
        return mask.copy()
    sizes = np.bincount(labels.ravel(), minlength=n + 1)
    keep = sizes >= min_size
    keep[0] = False
    return keep[labels]


def cleanup(mask, cfg=None, backend=None):
    """Closing, then opening, then drop 8-connected components below ``min_component``."""
    cfg = cfg or PostConfig()
    mask = check_mask(mask)
    out = morphology.binary_closing(mask, cfg.close_radius, backend)
    out = morphology.binary_opening(out, cfg.open_radius, backend)
    return remove_small_components(out, cfg.min_component, backend)


def overlay(pred, gt):
    """RGB uint8: ground truth in white, prediction drawn over it in green."""
    pred, gt = check_mask(pred), check_mask(gt)
    if pred.shape != gt.shape:
        raise ValueError("mask size mismatch")
    rgb = np.zeros(pred.shape + (3,), dtype=np.uint8)
    rgb[gt] = 255
    rgb[pred] = (0, 255, 0)
    return rgb
