"""Shared raster and feature-map helpers.

Pixel-domain images are ``H x W x C`` float32 arrays in [0, 1] with
``C`` in {1, 3}. Feature maps are torch tensors shaped ``C x H x W`` (or
batched ``N x C x H x W``). Masks are ``H x W`` bool arrays.
"""
from pathlib import Path
from typing import NamedTuple

import numpy as np
import torch
from PIL import Image as PILImage

TAPS = ("relu1_1", "relu2_1", "relu3_1", "relu4_1")
LUMA = (0.299, 0.587, 0.114)
DEFAULT_EPS = 1e-5


class ChannelStats(NamedTuple):
    mean: torch.Tensor
    std: torch.Tensor


def check_image(img):
    """Validate the image invariants and return it as float32 H x W x C."""
    img = np.asarray(img)
    if img.ndim == 2:
        img = img[:, :, None]
    if img.ndim != 3 or img.shape[2] not in (1, 3):
        raise ValueError(f"image must be HxWx1 or HxWx3, got shape {img.shape}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError("image must be at least 1x1")
    return img.astype(np.float32, copy=False)


def check_mask(mask):
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise ValueError(f"mask must be 2-D, got shape {mask.shape}")
    return mask.astype(bool, copy=False)


def channel_stats(fm, eps=DEFAULT_EPS):
    """Per-channel spatial mean and population std (``sqrt(var + eps)``).

    Works on ``C x H x W`` or ``N x C x H x W`` tensors; the statistics keep
    the leading dims and drop the two spatial ones.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if fm.shape[-1] * fm.shape[-2] == 0:
        raise ValueError("empty feature map")
    flat = fm.flatten(start_dim=-2)
    mean = flat.mean(dim=-1)
    var = flat.var(dim=-1, unbiased=False)
    return ChannelStats(mean, torch.sqrt(var + eps))


def to_gray(img):
    img = check_image(img)
    if img.shape[2] == 1:
        return img.copy()
    r, g, b = LUMA
    gray = r * img[:, :, 0] + g * img[:, :, 1] + b * img[:, :, 2]
    return gray[:, :, None].astype(np.float32)


def to_rgb(img):
    img = check_image(img)
    if img.shape[2] == 3:
        return img.copy()
    return np.repeat(img, 3, axis=2)


def crop_origin(height, width, size, seed):
    """Top-left corner of the seeded ``size x size`` crop."""
    if height < size or width < size:
        raise ValueError("crop larger than image")
    rng = np.random.default_rng(seed)
    y = int(rng.integers(0, height - size + 1))
    x = int(rng.integers(0, width - size + 1))
    return y, x


def random_crop(img, size, seed):
    img = check_image(img)
    y, x = crop_origin(img.shape[0], img.shape[1], size, seed)
    return img[y:y + size, x:x + size].copy()


def image_to_tensor(img):
    """H x W x C array -> 1 x C x H x W float32 tensor."""
    img = check_image(img)
    return torch.from_numpy(np.ascontiguousarray(img.transpose(2, 0, 1)))[None]


def tensor_to_image(t):
    """1 x C x H x W (or C x H x W) tensor -> H x W x C float32 array."""
    if t.dim() == 4:
        t = t[0]
    return t.detach().cpu().numpy().transpose(1, 2, 0).astype(np.float32)


def read_image(path):
    """Load an 8-bit gray or RGB image as float32 in [0, 1]."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such image: {path}")
    with PILImage.open(path) as im:
        if im.mode.startswith("I") or im.mode == "F":
            raise ValueError(f"{path}: only 8-bit images are supported (got mode {im.mode})")
        if im.mode in ("L", "1", "LA"):
            arr = np.asarray(im.convert("L"), dtype=np.float32)
        else:
            arr = np.asarray(im.convert("RGB"), dtype=np.float32)
    return check_image(arr / 255.0)


def to_bytes(img):
    """[0, 1] floats -> uint8 with round-half-up; values are clamped first."""
    arr = np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0)
    return np.floor(arr * 255.0 + 0.5).astype(np.uint8)


def write_image(path, img):
    img = check_image(img)
    data = to_bytes(img)
    data = data[:, :, 0] if data.shape[2] == 1 else data
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    PILImage.fromarray(data).save(path)


def read_mask(path):
    return read_image(path)[:, :, 0] >= 0.5


def write_mask(path, mask):
    mask = check_mask(mask)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    PILImage.fromarray(mask.astype(np.uint8) * 255).save(path)


def list_images(directory):
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"not a directory: {directory}")
    exts = {".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff"}
    return sorted(p for p in directory.iterdir() if p.suffix.lower() in exts)
