"""Hot numeric kernels: connected-component labeling and value-noise synthesis.

Each kernel has two interchangeable backends:

* ``numba`` — @njit compiled loops (default when numba imports cleanly)
* ``numpy`` — vectorized numpy/scipy path

Set ``SEMBAR_PURE_NUMPY=1`` to force the numpy path. Both backends are
bit-exact equals: labeling is canonicalized to raster-scan first-encounter
order, and noise interpolation uses pure integer arithmetic so no
float rounding can diverge between compilers. ``benchmarks/bench_kernels.py``
times one against the other.
"""

from __future__ import annotations

import os

import numpy as np
from scipy import ndimage

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only on broken installs
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap if not (args and callable(args[0])) else args[0]


def default_backend() -> str:
    if os.environ.get("SEMBAR_PURE_NUMPY") == "1" or not HAS_NUMBA:
        return "numpy"
    return "numba"


# ---------------------------------------------------------------------------
# 8-connected component labeling
# ---------------------------------------------------------------------------

_STRUCT_8 = np.ones((3, 3), dtype=np.uint8)


@njit(cache=True)
def _label_8_numba(mask):  # pragma: no cover - compiled
    h, w = mask.shape
    labels = np.zeros((h, w), np.int32)
    # provisional union-find; at most one new label per 2 pixels in a row
    parent = np.zeros(h * w // 2 + 2, np.int32)
    nxt = 1
    for y in range(h):
        for x in range(w):
            if mask[y, x] == 0:
                continue
            a = 0
            b = 0
            c = 0
            d = 0
            if x > 0:
                a = labels[y, x - 1]
            if y > 0:
                if x > 0:
                    b = labels[y - 1, x - 1]
                c = labels[y - 1, x]
                if x + 1 < w:
                    d = labels[y - 1, x + 1]
            m = 0
            for v in (a, b, c, d):
                if v != 0:
                    # find root
                    r = v
                    while parent[r] != r:
                        r = parent[r]
                    if m == 0 or r < m:
                        if m != 0:
                            parent[m] = r
                        m = r
                    elif r != m:
                        parent[r] = m
            if m == 0:
                m = nxt
                parent[m] = m
                nxt += 1
            labels[y, x] = m
    # canonical relabel: order by first-encountered pixel in raster scan
    remap = np.zeros(nxt, np.int32)
    count = 0
    for y in range(h):
        for x in range(w):
            v = labels[y, x]
            if v == 0:
                continue
            r = v
            while parent[r] != r:
                r = parent[r]
            if remap[r] == 0:
                count += 1
                remap[r] = count
            labels[y, x] = remap[r]
    return labels, count


@njit(cache=True)
def _component_stats_numba(labels, count):  # pragma: no cover - compiled
    h, w = labels.shape
    bboxes = np.zeros((count, 4), np.int32)
    sizes = np.zeros(count, np.int64)
    bboxes[:, 0] = w
    bboxes[:, 1] = h
    for y in range(h):
        for x in range(w):
            v = labels[y, x]
            if v == 0:
                continue
            i = v - 1
            sizes[i] += 1
            if x < bboxes[i, 0]:
                bboxes[i, 0] = x
            if y < bboxes[i, 1]:
                bboxes[i, 1] = y
            if x + 1 > bboxes[i, 2]:
                bboxes[i, 2] = x + 1
            if y + 1 > bboxes[i, 3]:
                bboxes[i, 3] = y + 1
    return bboxes, sizes


def _label_components_numpy(mask: np.ndarray):
    labels, n = ndimage.label(mask, structure=_STRUCT_8)
    labels = labels.astype(np.int32, copy=False)
    if n == 0:
        return labels, 0, np.zeros((0, 4), np.int32), np.zeros(0, np.int64)
    # canonicalize label order to raster-scan first encounter
    flat = labels.ravel()
    nz = np.flatnonzero(flat)
    uniq, first = np.unique(flat[nz], return_index=True)
    order = np.argsort(first, kind="stable")
    remap = np.zeros(n + 1, np.int32)
    remap[uniq[order]] = np.arange(1, n + 1, dtype=np.int32)
    labels = remap[labels]
    sizes = np.bincount(labels.ravel(), minlength=n + 1)[1:].astype(np.int64)
    bboxes = np.zeros((n, 4), np.int32)
    for i, sl in enumerate(ndimage.find_objects(labels)):
        ys, xs = sl
        bboxes[i] = (xs.start, ys.start, xs.stop, ys.stop)
    return labels, n, bboxes, sizes


def label_components(mask: np.ndarray, backend: str | None = None):
    """8-connected labeling of a binary mask.

    Returns ``(labels, count, bboxes, sizes)`` with labels numbered
    1..count in raster-scan order of each component's first pixel and
    bboxes as ``(x0, y0, x1, y1)`` half-open.
    """
    mask = np.ascontiguousarray(mask, dtype=np.uint8)
    if (backend or default_backend()) == "numba":
        labels, n = _label_8_numba(mask)
        if n == 0:
            return labels, 0, np.zeros((0, 4), np.int32), np.zeros(0, np.int64)
        bboxes, sizes = _component_stats_numba(labels, n)
        return labels, n, bboxes, sizes
    return _label_components_numpy(mask)


# ---------------------------------------------------------------------------
# Integer bilinear value noise
# ---------------------------------------------------------------------------

@njit(cache=True)
def _value_noise_numba(lattice, cell, h, w):  # pragma: no cover - compiled
    out = np.zeros((h, w), np.int64)
    for y in range(h):
        gy = y // cell
        dy = y - gy * cell
        for x in range(w):
            gx = x // cell
            dx = x - gx * cell
            l00 = lattice[gy, gx]
            l10 = lattice[gy, gx + 1]
            l01 = lattice[gy + 1, gx]
            l11 = lattice[gy + 1, gx + 1]
            out[y, x] = (
                l00 * (cell - dx) * (cell - dy)
                + l10 * dx * (cell - dy)
                + l01 * (cell - dx) * dy
                + l11 * dx * dy
            ) // (cell * cell)
    return out


def _value_noise_numpy(lattice: np.ndarray, cell: int, h: int, w: int):
    ys = np.arange(h)
    xs = np.arange(w)
    gy, dy = ys // cell, ys % cell
    gx, dx = xs // cell, xs % cell
    l00 = lattice[np.ix_(gy, gx)].astype(np.int64)
    l10 = lattice[np.ix_(gy, gx + 1)].astype(np.int64)
    l01 = lattice[np.ix_(gy + 1, gx)].astype(np.int64)
    l11 = lattice[np.ix_(gy + 1, gx + 1)].astype(np.int64)
    dxg = dx[None, :].astype(np.int64)
    dyg = dy[:, None].astype(np.int64)
    acc = (
        l00 * (cell - dxg) * (cell - dyg)
        + l10 * dxg * (cell - dyg)
        + l01 * (cell - dxg) * dyg
        + l11 * dxg * dyg
    )
    return acc // (cell * cell)


def value_noise(lattice: np.ndarray, cell: int, h: int, w: int,
                backend: str | None = None) -> np.ndarray:
    """Bilinear interpolation of an integer lattice onto an h×w grid.

    ``lattice`` must cover ``(h // cell + 2) × (w // cell + 2)`` nodes.
    All arithmetic is integer, so both backends agree exactly.
    """
    lattice = np.ascontiguousarray(lattice, dtype=np.int64)
    if (backend or default_backend()) == "numba":
        return _value_noise_numba(lattice, cell, h, w)
    return _value_noise_numpy(lattice, cell, h, w)
