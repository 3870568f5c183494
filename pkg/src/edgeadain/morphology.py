"""Flat morphology on 2-D rasters, backed by the selected kernel module.

Border samples outside the image are ignored (erosion sees +inf, dilation
-inf), which keeps opening anti-extensive and closing extensive right up to
the image edge.
"""
import numpy as np

from ._backend import get_kernels


def disk(radius):
    """Euclidean disk footprint, ``(2r+1) x (2r+1)`` uint8."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    yy, xx = np.mgrid[-radius:radius + 1, -radius:radius + 1]
    return (yy * yy + xx * xx <= radius * radius).astype(np.uint8)


def _prep(img):
    return np.ascontiguousarray(img, dtype=np.float64)


def erode(img, footprint, backend=None):
    return get_kernels(backend).grey_erode(_prep(img), np.ascontiguousarray(footprint, dtype=np.uint8))


def dilate(img, footprint, backend=None):
    return get_kernels(backend).grey_dilate(_prep(img), np.ascontiguousarray(footprint, dtype=np.uint8))


def opening(img, footprint, backend=None):
    return dilate(erode(img, footprint, backend), footprint, backend)


def closing(img, footprint, backend=None):
    return erode(dilate(img, footprint, backend), footprint, backend)


def white_tophat(img, footprint, backend=None):
    return _prep(img) - opening(img, footprint, backend)


def black_tophat(img, footprint, backend=None):
    return closing(img, footprint, backend) - _prep(img)


def binary_closing(mask, radius, backend=None):
    if radius == 0:
        return np.asarray(mask, dtype=bool).copy()
    return closing(np.asarray(mask, dtype=np.float64), disk(radius), backend) > 0.5


def binary_opening(mask, radius, backend=None):
    if radius == 0:
        return np.asarray(mask, dtype=bool).copy()
    return opening(np.asarray(mask, dtype=np.float64), disk(radius), backend) > 0.5


def label(mask, backend=None):
    """8-connected components; returns ``(labels, count)`` in raster order."""
    m = np.ascontiguousarray(mask, dtype=np.uint8)
    return get_kernels(backend).label8(m)
