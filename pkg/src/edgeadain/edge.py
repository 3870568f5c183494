"""Edge maps for the structure-preserving branch.

Two providers: precomputed edge images on disk (e.g. DexiNed output) and a
Scharr gradient-magnitude fallback that needs no model.
"""
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from scipy import ndimage

from .core import check_image, read_image, to_gray

SCHARR_X = np.array([[3, 0, -3], [10, 0, -10], [3, 0, -3]], dtype=np.float64)
SCHARR_Y = SCHARR_X.T.copy()


@dataclass
class EdgeProviderConfig:
    kind: str = "fallback"  # "fallback" or "file"
    path: Optional[str] = None

    def __post_init__(self):
        if self.kind not in ("fallback", "file"):
            raise ValueError(f"unknown edge provider {self.kind!r}")
        if self.kind == "file" and not self.path:
            raise ValueError("edge provider 'file' needs a path")


@dataclass(frozen=True)
class EdgeMap:
    data: np.ndarray  # H x W float32 in [0, 1]
    provenance: str

    def as_image(self):
        return self.data[:, :, None]


def gradient_magnitude(gray):
    gray = np.asarray(gray, dtype=np.float64)
    gx = ndimage.correlate(gray, SCHARR_X, mode="reflect")
    gy = ndimage.correlate(gray, SCHARR_Y, mode="reflect")
    return np.hypot(gx, gy)


def scharr_edges(img):
    mag = gradient_magnitude(to_gray(img)[:, :, 0])
    peak = mag.max()
    if peak > 0:
        mag = mag / peak
    return EdgeMap(mag.astype(np.float32), "classical-fallback")


def load_edge_file(path, shape):
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"edge map not found: {path}")
    data = to_gray(read_image(path))[:, :, 0]
    if data.shape != tuple(shape):
        raise ValueError(f"edge map size mismatch: {data.shape} vs image {tuple(shape)}")
    return EdgeMap(np.clip(data, 0.0, 1.0), "external-file")


def detect_edges(img, provider=None):
    img = check_image(img)
    provider = provider or EdgeProviderConfig()
    if provider.kind == "file":
        return load_edge_file(provider.path, img.shape[:2])
    return scharr_edges(img)
