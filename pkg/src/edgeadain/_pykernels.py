"""NumPy fallback for the compiled kernels in ``_kernels.pyx``.

Signatures, border handling and tie-breaking mirror the compiled module.
"""
from collections import deque

import numpy as np


def _offsets(footprint):
    fh, fw = footprint.shape
    cy, cx = fh // 2, fw // 2
    return [(i - cy, j - cx) for i, j in zip(*np.nonzero(footprint))]


def _shifted_extreme(img, footprint, fill, reduce, sign):
    h, w = img.shape
    fh, fw = footprint.shape
    py, px = fh // 2, fw // 2
    padded = np.full((h + 2 * py, w + 2 * px), fill, dtype=np.float64)
    padded[py:py + h, px:px + w] = img
    out = np.full((h, w), fill, dtype=np.float64)
    for dy, dx in _offsets(footprint):
        dy, dx = sign * dy, sign * dx
        window = padded[py + dy:py + dy + h, px + dx:px + dx + w]
        reduce(out, window, out=out)
    return out


def grey_erode(img, footprint):
    return _shifted_extreme(img, footprint, np.inf, np.minimum, 1)


def grey_dilate(img, footprint):
    return _shifted_extreme(img, footprint, -np.inf, np.maximum, -1)


def nlmeans_snn(padded, height, width, patch, search, h, k, offset):
    ps = patch // 2
    sr = search // 2
    pad = sr + ps
    rh, rw = height + 2 * ps, width + 2 * ps
    area = float(patch * patch)
    ref = padded[sr:sr + rh, sr:sr + rw]

    keys = np.full((k, height, width), np.inf)
    vals = np.zeros((k, height, width))
    dists = np.zeros((k, height, width))
    slot = np.arange(k)[:, None, None]
    integ = np.zeros((rh + 1, rw + 1))

    for dy in range(-sr, sr + 1):
        for dx in range(-sr, sr + 1):
            moved = padded[sr + dy:sr + dy + rh, sr + dx:sr + dx + rw]
            diff = ref - moved
            integ[1:, 1:] = np.cumsum(np.cumsum(diff * diff, axis=0), axis=1)
            a = integ[patch:patch + height, patch:patch + width]
            b = integ[:height, patch:patch + width]
            c = integ[patch:patch + height, :width]
            e = integ[:height, :width]
            d = (((a - b) - c) + e) / area
            key = np.abs(d - offset)
            val = padded[pad + dy:pad + dy + height, pad + dx:pad + dx + width]

            # stable insert after every stored key <= key
            pos = np.sum(keys <= key, axis=0)
            keep = slot < pos
            here = slot == pos
            keys = np.where(keep, keys, np.where(here, key, np.roll(keys, 1, axis=0)))
            vals = np.where(keep, vals, np.where(here, val, np.roll(vals, 1, axis=0)))
            dists = np.where(keep, dists, np.where(here, d, np.roll(dists, 1, axis=0)))

    n = min(k, (2 * sr + 1) ** 2)
    acc = np.zeros((height, width))
    wsum = np.zeros((height, width))
    for i in range(n):
        wgt = np.exp(-np.maximum(dists[i] - offset, 0.0) / (h * h))
        acc += wgt * vals[i]
        wsum += wgt
    return acc / wsum


def label8(mask):
    h, w = mask.shape
    labels = np.zeros((h, w), dtype=np.int32)
    n = 0
    for y0, x0 in zip(*np.nonzero(mask)):
        if labels[y0, x0]:
            continue
        n += 1
        labels[y0, x0] = n
        queue = deque([(y0, x0)])
        while queue:
            y, x = queue.popleft()
            for yy in range(max(y - 1, 0), min(y + 2, h)):
                for xx in range(max(x - 1, 0), min(x + 2, w)):
                    if mask[yy, xx] and not labels[yy, xx]:
                        labels[yy, xx] = n
                        queue.append((yy, xx))
    return labels, n
