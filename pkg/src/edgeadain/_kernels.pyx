# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops for morphology, NL-means and component labelling.

Every function here has a NumPy twin in ``_pykernels`` with the same
signature and the same tie-breaking, so results agree exactly (or to the
last ulp for the ``exp`` in the NL-means weights).
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, fabs, INFINITY

cnp.import_array()


cdef _flat_extreme(const double[:, ::1] img, const cnp.uint8_t[:, ::1] footprint, bint take_max):
    # one pass per footprint offset over the rectangle where the shift stays
    # inside the image; out-of-bounds samples are simply never visited
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1]
    cdef Py_ssize_t fh = footprint.shape[0], fw = footprint.shape[1]
    cdef Py_ssize_t cy = fh // 2, cx = fw // 2
    cdef Py_ssize_t y, x, i, j, dy, dx, y0, y1, x0, x1
    cdef double a, b
    cdef double* orow
    cdef const double* irow
    out = np.full((h, w), -INFINITY if take_max else INFINITY, dtype=np.float64)
    cdef double[:, ::1] o = out
    for i in range(fh):
        for j in range(fw):
            if not footprint[i, j]:
                continue
            if take_max:
                # dilation uses the reflected footprint
                dy = cy - i
                dx = cx - j
            else:
                dy = i - cy
                dx = j - cx
            y0 = 0 if dy >= 0 else -dy
            y1 = h - dy if dy >= 0 else h
            x0 = 0 if dx >= 0 else -dx
            x1 = w - dx if dx >= 0 else w
            for y in range(y0, y1):
                orow = &o[y, 0]
                irow = &img[y + dy, 0] + dx
                # select form, so the compiler can vectorise the row
                if take_max:
                    for x in range(x0, x1):
                        a = irow[x]
                        b = orow[x]
                        orow[x] = a if a > b else b
                else:
                    for x in range(x0, x1):
                        a = irow[x]
                        b = orow[x]
                        orow[x] = a if a < b else b
    return out


def grey_erode(const double[:, ::1] img, const cnp.uint8_t[:, ::1] footprint):
    """Flat erosion; samples outside the image are ignored."""
    return _flat_extreme(img, footprint, False)


def grey_dilate(const double[:, ::1] img, const cnp.uint8_t[:, ::1] footprint):
    """Flat dilation with the reflected footprint; outside samples ignored."""
    return _flat_extreme(img, footprint, True)


def nlmeans_snn(const double[:, ::1] padded, Py_ssize_t height, Py_ssize_t width,
                int patch, int search, double h, int k, double offset):
    """NL-means with statistical nearest neighbours on a pre-padded image.

    ``padded`` carries ``search // 2 + patch // 2`` reflected pixels on
    every side. For each output pixel the ``k`` candidates whose mean
    squared patch distance is closest to ``offset`` are averaged with
    weights ``exp(-max(d - offset, 0) / h**2)``.
    """
    cdef Py_ssize_t ps = patch // 2
    cdef Py_ssize_t sr = search // 2
    cdef Py_ssize_t pad = sr + ps
    cdef Py_ssize_t rh = height + 2 * ps, rw = width + 2 * ps
    cdef double area = <double>(patch * patch)
    cdef double inv_h2 = 1.0 / (h * h)
    cdef Py_ssize_t dy, dx, y, x, i, pos, n
    cdef double d, key, a, b, c, e, acc, wsum, wgt

    integ_arr = np.zeros((rh + 1, rw + 1), dtype=np.float64)
    cdef double[:, ::1] integ = integ_arr
    col_arr = np.zeros((rh, rw), dtype=np.float64)
    cdef double[:, ::1] col = col_arr

    keys_arr = np.full((height, width, k), np.inf, dtype=np.float64)
    vals_arr = np.zeros((height, width, k), dtype=np.float64)
    dists_arr = np.zeros((height, width, k), dtype=np.float64)
    cdef double[:, :, ::1] keys = keys_arr
    cdef double[:, :, ::1] vals = vals_arr
    cdef double[:, :, ::1] dists = dists_arr

    # region whose patch sums are needed starts at (sr, sr) in padded coords
    for dy in range(-sr, sr + 1):
        for dx in range(-sr, sr + 1):
            # running sum down columns, then along rows
            for y in range(rh):
                for x in range(rw):
                    a = padded[sr + y, sr + x] - padded[sr + y + dy, sr + x + dx]
                    if y == 0:
                        col[y, x] = a * a
                    else:
                        col[y, x] = col[y - 1, x] + a * a
            for y in range(rh):
                for x in range(rw):
                    if x == 0:
                        integ[y + 1, x + 1] = col[y, x]
                    else:
                        integ[y + 1, x + 1] = integ[y + 1, x] + col[y, x]
            for y in range(height):
                for x in range(width):
                    a = integ[y + patch, x + patch]
                    b = integ[y, x + patch]
                    c = integ[y + patch, x]
                    e = integ[y, x]
                    d = (((a - b) - c) + e) / area
                    key = fabs(d - offset)
                    if key >= keys[y, x, k - 1]:
                        continue
                    # stable insert: after every stored key <= key
                    pos = k - 1
                    while pos > 0 and keys[y, x, pos - 1] > key:
                        keys[y, x, pos] = keys[y, x, pos - 1]
                        vals[y, x, pos] = vals[y, x, pos - 1]
                        dists[y, x, pos] = dists[y, x, pos - 1]
                        pos -= 1
                    keys[y, x, pos] = key
                    vals[y, x, pos] = padded[pad + y + dy, pad + x + dx]
                    dists[y, x, pos] = d

    out = np.empty((height, width), dtype=np.float64)
    cdef double[:, ::1] o = out
    n = min(k, (2 * sr + 1) * (2 * sr + 1))
    for y in range(height):
        for x in range(width):
            acc = 0.0
            wsum = 0.0
            for i in range(n):
                d = dists[y, x, i] - offset
                if d < 0.0:
                    d = 0.0
                wgt = exp(-d * inv_h2)
                acc += wgt * vals[y, x, i]
                wsum += wgt
            o[y, x] = acc / wsum
    return out


cdef Py_ssize_t _find(Py_ssize_t[::1] parent, Py_ssize_t i) noexcept nogil:
    cdef Py_ssize_t root = i, nxt
    while parent[root] != root:
        root = parent[root]
    while parent[i] != root:
        nxt = parent[i]
        parent[i] = root
        i = nxt
    return root


cdef void _union(Py_ssize_t[::1] parent, Py_ssize_t a, Py_ssize_t b) noexcept nogil:
    a = _find(parent, a)
    b = _find(parent, b)
    if a < b:
        parent[b] = a
    elif b < a:
        parent[a] = b


def label8(const cnp.uint8_t[:, ::1] mask):
    """8-connected labelling; labels 1..n numbered by raster order of first pixel."""
    cdef Py_ssize_t h = mask.shape[0], w = mask.shape[1]
    cdef Py_ssize_t y, x, idx, root, n = 0
    parent_arr = np.arange(h * w, dtype=np.intp)
    cdef Py_ssize_t[::1] parent = parent_arr
    labels_arr = np.zeros((h, w), dtype=np.int32)
    cdef cnp.int32_t[:, ::1] labels = labels_arr
    remap_arr = np.zeros(h * w, dtype=np.int32)
    cdef cnp.int32_t[::1] remap = remap_arr

    for y in range(h):
        for x in range(w):
            if not mask[y, x]:
                continue
            idx = y * w + x
            if x > 0 and mask[y, x - 1]:
                _union(parent, idx, idx - 1)
            if y > 0:
                if x > 0 and mask[y - 1, x - 1]:
                    _union(parent, idx, idx - w - 1)
                if mask[y - 1, x]:
                    _union(parent, idx, idx - w)
                if x + 1 < w and mask[y - 1, x + 1]:
                    _union(parent, idx, idx - w + 1)

    # roots are the minimum index of their set, hence raster-first pixels
    for y in range(h):
        for x in range(w):
            if not mask[y, x]:
                continue
            idx = y * w + x
            root = _find(parent, idx)
            if remap[root] == 0:
                n += 1
                remap[root] = n
            labels[y, x] = remap[root]
    return labels_arr, int(n)
