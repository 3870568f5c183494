"""Slow reference implementations used only as test oracles.

They deliberately share no code with the package: plain loops, float64,
and their own padding.
"""
import math

import numpy as np


def scalar_gray(img):
    h, w, _ = img.shape
    out = np.zeros((h, w), dtype=np.float32)
    for y in range(h):
        for x in range(w):
            r, g, b = (float(v) for v in img[y, x])
            out[y, x] = np.float32(0.299) * np.float32(r) + np.float32(0.587) * np.float32(g) + np.float32(0.114) * np.float32(b)
    return out


def two_pass_stats(fm, eps):
    """fm: C x H x W array -> (mean, std) lists via explicit two-pass loops."""
    means, stds = [], []
    for ch in np.asarray(fm, dtype=np.float64):
        vals = ch.ravel().tolist()
        m = sum(vals) / len(vals)
        var = sum((v - m) ** 2 for v in vals) / len(vals)
        means.append(m)
        stds.append(math.sqrt(var + eps))
    return np.array(means), np.array(stds)


def symmetric_index(i, n):
    """Half-sample symmetric index (d c b a | a b c d)."""
    while i < 0 or i >= n:
        i = -i - 1 if i < 0 else 2 * n - i - 1
    return i


def naive_correlate3(gray, kernel):
    h, w = gray.shape
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for i in range(3):
                for j in range(3):
                    yy = symmetric_index(y + i - 1, h)
                    xx = symmetric_index(x + j - 1, w)
                    acc += kernel[i][j] * gray[yy, xx]
            out[y, x] = acc
    return out


def disk_offsets(r):
    return [(dy, dx) for dy in range(-r, r + 1) for dx in range(-r, r + 1) if dy * dy + dx * dx <= r * r]


def naive_erode(img, r):
    h, w = img.shape
    offs = disk_offsets(r)
    out = np.empty((h, w))
    for y in range(h):
        for x in range(w):
            out[y, x] = min(img[y + dy, x + dx] for dy, dx in offs if 0 <= y + dy < h and 0 <= x + dx < w)
    return out


def naive_dilate(img, r):
    h, w = img.shape
    offs = disk_offsets(r)
    out = np.empty((h, w))
    for y in range(h):
        for x in range(w):
            out[y, x] = max(img[y - dy, x - dx] for dy, dx in offs if 0 <= y - dy < h and 0 <= x - dx < w)
    return out


def naive_tophat_enhance(gray, radii):
    gray = np.asarray(gray, dtype=np.float64)
    bright = np.zeros_like(gray)
    dark = np.zeros_like(gray)
    for r in radii:
        opened = naive_dilate(naive_erode(gray, r), r)
        closed = naive_erode(naive_dilate(gray, r), r)
        bright = np.maximum(bright, gray - opened)
        dark = np.maximum(dark, closed - gray)
    return np.clip(gray + bright - dark, 0.0, 1.0).astype(np.float32)


def flood_label(mask):
    """8-connected labels numbered in raster order, via explicit DFS."""
    h, w = mask.shape
    labels = np.zeros((h, w), dtype=np.int64)
    n = 0
    for y in range(h):
        for x in range(w):
            if not mask[y, x] or labels[y, x]:
                continue
            n += 1
            stack = [(y, x)]
            labels[y, x] = n
            while stack:
                cy, cx = stack.pop()
                for dy in (-1, 0, 1):
                    for dx in (-1, 0, 1):
                        ny, nx = cy + dy, cx + dx
                        if 0 <= ny < h and 0 <= nx < w and mask[ny, nx] and not labels[ny, nx]:
                            labels[ny, nx] = n
                            stack.append((ny, nx))
    return labels, n


def naive_cleanup(mask, close_r, open_r, min_size):
    m = np.asarray(mask, dtype=np.float64)
    if close_r:
        m = naive_erode(naive_dilate(m, close_r), close_r)
    if open_r:
        m = naive_dilate(naive_erode(m, open_r), open_r)
    m = m > 0.5
    labels, n = flood_label(m)
    out = np.zeros_like(m)
    for k in range(1, n + 1):
        comp = labels == k
        if comp.sum() >= min_size:
            out |= comp
    return out


def loop_confusion(pred, gt):
    tp = fp = tn = fn = 0
    for p, g in zip(np.asarray(pred).ravel().tolist(), np.asarray(gt).ravel().tolist()):
        if p and g:
            tp += 1
        elif p and not g:
            fp += 1
        elif not p and g:
            fn += 1
        else:
            tn += 1
    return tp, fp, tn, fn


def loop_mse(a, b):
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    return sum((x - y) ** 2 for x, y in zip(a.tolist(), b.tolist())) / len(a)


# ---- network oracles (NumPy, float64) ------------------------------------

def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def reflect_pad1(x):
    """Whole-sample reflection by one pixel on the last two axes."""
    return np.pad(x, ((0, 0), (1, 1), (1, 1)), mode="reflect")


def conv3x3_reflect(x, weight, bias):
    """x: C x H x W, weight: O x C x 3 x 3."""
    xp = reflect_pad1(x)
    _, h, w = x.shape
    out = np.zeros((weight.shape[0], h, w))
    for i in range(3):
        for j in range(3):
            out += np.einsum("oc,chw->ohw", weight[:, :, i, j], xp[:, i:i + h, j:j + w])
    return out + bias[:, None, None]


def maxpool2(x):
    c, h, w = x.shape
    return x.reshape(c, h // 2, 2, w // 2, 2).max(axis=(2, 4))


def upsample2(x):
    return x.repeat(2, axis=1).repeat(2, axis=2)


def encoder_oracle(x, params, widths):
    """Stepwise forward returning the four tap activations."""
    taps = []
    names = [["conv1_1", "conv1_2"], ["conv2_1", "conv2_2"], ["conv3_1", "conv3_2", "conv3_3", "conv3_4"], ["conv4_1"]]
    for block, layers in enumerate(names):
        if block:
            x = maxpool2(x)
        for k, name in enumerate(layers):
            x = np.maximum(conv3x3_reflect(x, params[f"encoder.convs.{name}.weight"], params[f"encoder.convs.{name}.bias"]), 0.0)
            if k == 0:
                taps.append(x)
    return taps


def decoder_oracle(x, params, slope=0.01):
    order = ["conv4_1", "up", "conv3_4", "conv3_3", "conv3_2", "conv3_1", "up", "conv2_2", "conv2_1", "up", "conv1_2", "conv1_1"]
    for step in order:
        if step == "up":
            x = upsample2(x)
            continue
        x = conv3x3_reflect(x, params[f"decoder.convs.{step}.weight"], params[f"decoder.convs.{step}.bias"])
        if step != "conv1_1":
            x = np.where(x > 0, x, slope * x)
    return x


def naive_cbam(x, fc1, fc2, spatial):
    """x: C x H x W; fc1: hidden x C; fc2: C x hidden; spatial: 1 x 2 x k x k."""
    c, h, w = x.shape
    avg = np.array([x[i].mean() for i in range(c)])
    mx = np.array([x[i].max() for i in range(c)])

    def mlp(v):
        hidden = np.maximum(fc1 @ v, 0.0)
        return fc2 @ hidden

    mc = _sigmoid(mlp(avg) + mlp(mx))
    y = np.empty_like(x)
    for i in range(c):
        y[i] = x[i] * mc[i]
    k = spatial.shape[-1]
    r = k // 2
    pooled = np.stack([y.mean(axis=0), y.max(axis=0)])
    padded = np.pad(pooled, ((0, 0), (r, r), (r, r)))
    logits = np.zeros((h, w))
    for yy in range(h):
        for xx in range(w):
            logits[yy, xx] = np.sum(spatial[0] * padded[:, yy:yy + k, xx:xx + k])
    ms = _sigmoid(logits)
    return y * ms[None]


def adain_oracle(c, s, eps):
    cm, cs = two_pass_stats(c, eps)
    sm, ss = two_pass_stats(s, eps)
    out = np.empty_like(np.asarray(c, dtype=np.float64))
    for i in range(out.shape[0]):
        out[i] = ss[i] * (c[i] - cm[i]) / cs[i] + sm[i]
    return out


def psnr(a, b):
    mse = float(np.mean((np.asarray(a, np.float64) - np.asarray(b, np.float64)) ** 2))
    return 10 * math.log10(1.0 / mse)


def central_difference(fn, x, step=1e-3):
    """Numerical gradient of a scalar fn at numpy array x."""
    x = np.array(x, dtype=np.float64)
    grad = np.zeros_like(x)
    flat, gflat = x.reshape(-1), grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + step
        hi = fn(x)
        flat[i] = orig - step
        lo = fn(x)
        flat[i] = orig
        gflat[i] = (hi - lo) / (2 * step)
    return grad


def relative_error(a, b):
    a, b = np.asarray(a, np.float64), np.asarray(b, np.float64)
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(a), np.linalg.norm(b), 1e-12))
