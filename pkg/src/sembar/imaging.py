"""Raster images, codecs, drawing primitives, and low-level mask analysis."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from . import _kernels, glyphs
from .errors import CorruptImage, OutOfBounds, UnsupportedFormat

Color = tuple[int, int, int]

# ITU-R BT.601 luma weights
_LUMA = np.array([0.299, 0.587, 0.114])


@dataclass
class RasterImage:
    """Owned 8-bit RGB pixel grid, shape (height, width, 3)."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValueError("pixels must have shape (h, w, 3)")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("image must be at least 1x1")
        self.pixels = np.ascontiguousarray(px, dtype=np.uint8)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @classmethod
    def blank(cls, width: int, height: int, fill: Color = (0, 0, 0)) -> "RasterImage":
        px = np.empty((height, width, 3), dtype=np.uint8)
        px[:] = fill
        return cls(px)

    def copy(self) -> "RasterImage":
        return RasterImage(self.pixels.copy())

    def luminance(self) -> np.ndarray:
        """BT.601 luma, rounded to uint8."""
        return np.rint(self.pixels @ _LUMA).astype(np.uint8)


@dataclass(frozen=True, order=True)
class BoundingBox:
    """Axis-aligned pixel box, half-open on the max edges."""

    x_min: int
    y_min: int
    x_max: int
    y_max: int

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError(f"degenerate box {self.as_tuple()}")

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.x_min, self.y_min, self.x_max, self.y_max)

    @property
    def width(self) -> int:
        return self.x_max - self.x_min

    @property
    def height(self) -> int:
        return self.y_max - self.y_min

    @property
    def area(self) -> int:
        return self.width * self.height

    def center(self) -> tuple[float, float]:
        return ((self.x_min + self.x_max) / 2, (self.y_min + self.y_max) / 2)

    def contains(self, other: "BoundingBox") -> bool:
        return (self.x_min <= other.x_min and self.y_min <= other.y_min
                and self.x_max >= other.x_max and self.y_max >= other.y_max)

    def intersects(self, other: "BoundingBox") -> bool:
        return (self.x_min < other.x_max and other.x_min < self.x_max
                and self.y_min < other.y_max and other.y_min < self.y_max)

    def union(self, other: "BoundingBox") -> "BoundingBox":
        return BoundingBox(min(self.x_min, other.x_min), min(self.y_min, other.y_min),
                           max(self.x_max, other.x_max), max(self.y_max, other.y_max))

    def inside(self, width: int, height: int) -> bool:
        return 0 <= self.x_min and 0 <= self.y_min and self.x_max <= width and self.y_max <= height


@dataclass
class ComponentMap:
    """Result of connected-component labeling (0 = background)."""

    labels: np.ndarray
    component_count: int
    bboxes: list[BoundingBox]
    pixel_counts: list[int]


@dataclass
class BinarizeResult:
    mask: np.ndarray  # uint8 0/1, same shape as source luma
    threshold: int
    degenerate: bool = False


# ---------------------------------------------------------------------------
# codecs
# ---------------------------------------------------------------------------

def load_image(path: str | Path) -> RasterImage:
    """Decode a PNG or JPEG file; grayscale sources expand to RGB."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    try:
        with Image.open(path) as im:
            if im.format not in ("PNG", "JPEG"):
                raise UnsupportedFormat(f"{path}: format {im.format} not supported")
            rgb = im.convert("RGB")
            px = np.asarray(rgb, dtype=np.uint8)
    except UnidentifiedImageError as e:
        raise UnsupportedFormat(f"{path}: not a PNG or JPEG file") from e
    except OSError as e:
        raise CorruptImage(f"{path}: {e}") from e
    return RasterImage(px)


def save_image(image: RasterImage, path: str | Path) -> None:
    """Write a lossless PNG; round-trips pixel-for-pixel via load_image."""
    Image.fromarray(image.pixels, mode="RGB").save(Path(path), format="PNG")


# ---------------------------------------------------------------------------
# binarization and labeling
# ---------------------------------------------------------------------------

def otsu_threshold(luma: np.ndarray) -> int:
    """Global Otsu threshold over a uint8 array.

    Returns the smallest t maximizing the between-class variance of the
    split (<= t) vs (> t). Caller must ensure at least two distinct values.
    """
    hist = np.bincount(luma.ravel(), minlength=256).astype(np.float64)
    total = hist.sum()
    w0 = np.cumsum(hist)
    sum0 = np.cumsum(hist * np.arange(256))
    w1 = total - w0
    valid = (w0 > 0) & (w1 > 0)
    mu0 = np.where(w0 > 0, sum0 / np.maximum(w0, 1), 0.0)
    mu1 = np.where(w1 > 0, (sum0[-1] - sum0) / np.maximum(w1, 1), 0.0)
    sigma_b = np.where(valid, w0 * w1 * (mu0 - mu1) ** 2, -1.0)
    return int(np.argmax(sigma_b))


def binarize(image: RasterImage, polarity: str) -> BinarizeResult:
    """Otsu global threshold over BT.601 luminance.

    polarity 'light-on-dark' selects above-threshold pixels as foreground,
    'dark-on-light' the complement. A constant image yields an
    all-background mask with the degenerate flag set.
    """
    if polarity not in ("light-on-dark", "dark-on-light"):
        raise ValueError(f"unknown polarity {polarity!r}")
    luma = image.luminance()
    lo, hi = int(luma.min()), int(luma.max())
    if lo == hi:
        return BinarizeResult(np.zeros_like(luma, dtype=np.uint8), lo, degenerate=True)
    t = otsu_threshold(luma)
    if polarity == "light-on-dark":
        mask = (luma > t).astype(np.uint8)
    else:
        mask = (luma <= t).astype(np.uint8)
    return BinarizeResult(mask, t)


def connected_components(mask: np.ndarray, connectivity: int = 8) -> ComponentMap:
    """8-connected labeling; labels ordered by raster scan of first pixel."""
    if connectivity != 8:
        raise ValueError("only 8-connectivity is supported")
    labels, count, bboxes, sizes = _kernels.label_components(mask)
    boxes = [BoundingBox(int(x0), int(y0), int(x1), int(y1)) for x0, y0, x1, y1 in bboxes]
    return ComponentMap(labels, count, boxes, [int(s) for s in sizes])


# ---------------------------------------------------------------------------
# drawing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Line:
    x0: int
    y0: int
    x1: int
    y1: int


@dataclass(frozen=True)
class FilledRect:
    x0: int
    y0: int
    x1: int  # exclusive
    y1: int  # exclusive


@dataclass(frozen=True)
class GlyphRun:
    text: str
    x: int  # left of first glyph cell
    y: int  # top of glyph cell (row 0 of the atlas grid)
    scale: int = 1


@dataclass(frozen=True)
class Style:
    color: Color = (255, 255, 255)
    thickness: int = 1


Primitive = Line | FilledRect | GlyphRun


def _check_bounds(image: RasterImage, x0: int, y0: int, x1: int, y1: int) -> None:
    if x0 < 0 or y0 < 0 or x1 > image.width or y1 > image.height or x0 >= x1 or y0 >= y1:
        raise OutOfBounds(f"primitive extent ({x0},{y0})-({x1},{y1}) "
                          f"outside {image.width}x{image.height} image")


def paint_mask(image: RasterImage, mask: np.ndarray, x: int, y: int, color: Color) -> BoundingBox:
    """Paint True cells of a mask at offset (x, y); returns the tight bbox."""
    ys, xs = np.nonzero(mask)
    if ys.size == 0:
        raise OutOfBounds("mask has no inked pixels")
    x0, x1 = x + xs.min(), x + xs.max() + 1
    y0, y1 = y + ys.min(), y + ys.max() + 1
    _check_bounds(image, x0, y0, x1, y1)
    image.pixels[y + ys, x + xs] = color
    return BoundingBox(int(x0), int(y0), int(x1), int(y1))


def draw(image: RasterImage, primitive: Primitive, style: Style) -> BoundingBox:
    """Draw a primitive in place; returns the tight bbox of touched pixels."""
    if isinstance(primitive, FilledRect):
        p = primitive
        _check_bounds(image, p.x0, p.y0, p.x1, p.y1)
        image.pixels[p.y0:p.y1, p.x0:p.x1] = style.color
        return BoundingBox(p.x0, p.y0, p.x1, p.y1)

    if isinstance(primitive, Line):
        p = primitive
        r = max(style.thickness, 1) // 2
        pts = _bresenham(p.x0, p.y0, p.x1, p.y1)
        x0 = min(px for px, _ in pts) - r
        y0 = min(py for _, py in pts) - r
        x1 = max(px for px, _ in pts) + r + 1
        y1 = max(py for _, py in pts) + r + 1
        _check_bounds(image, x0, y0, x1, y1)
        for px, py in pts:
            image.pixels[py - r:py + r + 1, px - r:px + r + 1] = style.color
        return BoundingBox(x0, y0, x1, y1)

    if isinstance(primitive, GlyphRun):
        p = primitive
        mask = glyphs.render_text_mask(p.text, p.scale)
        return paint_mask(image, mask, p.x, p.y, style.color)

    raise TypeError(f"unknown primitive {primitive!r}")


def _bresenham(x0: int, y0: int, x1: int, y1: int) -> list[tuple[int, int]]:
    pts = []
    dx, dy = abs(x1 - x0), -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    x, y = x0, y0
    while True:
        pts.append((x, y))
        if x == x1 and y == y1:
            return pts
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x += sx
        if e2 <= dx:
            err += dx
            y += sy


def crop(image: RasterImage, box: BoundingBox) -> RasterImage:
    if not box.inside(image.width, image.height):
        raise OutOfBounds(f"crop {box.as_tuple()} outside image")
    return RasterImage(image.pixels[box.y_min:box.y_max, box.x_min:box.x_max].copy())
