"""Automatic dataset generation: composes procedural or corpus backgrounds
with drawn scale bars and labels, recording pixel-exact annotations.

Every element (bar, label, distractor word) is drawn in a saturated core
color with a one-pixel contrasting outline. The outline guarantees the core
stays a separate connected component under global thresholding no matter
what the surrounding texture does — the same isolation real composited
scale-bar crops carry with them — and keeps the recorded bounding boxes
exactly recoverable from the pixels.
"""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import dataclass, field, replace
from decimal import Decimal
from pathlib import Path

import numpy as np
from scipy import ndimage

from . import _kernels, glyphs
from .errors import (EmptyBackgroundSource, InvalidConfig, InvariantViolation,
                     LabelDoesNotFit, OutOfBounds, ParseError)
from .extract import UnitKind, parse_scale_text, plain_decimal
from .imaging import BoundingBox, RasterImage, load_image, save_image

SCHEMA_VERSION = 1

# class ids follow the four-shape taxonomy order
class BarShape(enum.Enum):
    JOINT_LABEL = 0
    I_SHAPED = 1
    RULER_SHAPED = 2
    RECTANGULAR = 3

    @property
    def json_name(self) -> str:
        return _SHAPE_NAMES[self]


_SHAPE_NAMES = {
    BarShape.JOINT_LABEL: "joint_label",
    BarShape.I_SHAPED: "i_shaped",
    BarShape.RULER_SHAPED: "ruler",
    BarShape.RECTANGULAR: "rect",
}
SHAPE_BY_NAME = {v: k for k, v in _SHAPE_NAMES.items()}

# words carrying unit-like substrings that must never validate as scale text
DISTRACTOR_WORDS = (
    "summary", "common", "column", "premium", "autumn",
    "minimum", "maximum", "comment", "summit", "gummy",
)

_WHITE = (255, 255, 255)
_BLACK = (0, 0, 0)


@dataclass(frozen=True)
class ScaleBarAnnotation:
    bar_bbox: BoundingBox
    shape: BarShape
    label_text: str
    value: Decimal
    unit: UnitKind
    text_bbox: BoundingBox
    bar_length_px: int

    def check(self) -> None:
        q = parse_scale_text(self.label_text)
        if q.value != self.value or q.unit != self.unit:
            raise InvariantViolation(
                f"label {self.label_text!r} does not re-parse to ({self.value}, {self.unit})")
        if self.bar_length_px != self.bar_bbox.width:
            raise InvariantViolation("bar_length_px must equal bar bbox width")
        if self.shape is BarShape.JOINT_LABEL:
            if not self.bar_bbox.contains(self.text_bbox):
                raise InvariantViolation("joint-label text box must lie inside the bar box")
        elif self.bar_bbox.intersects(self.text_bbox):
            raise InvariantViolation("text box must be disjoint from the bar box")

    def to_json(self) -> dict:
        v = self.value
        return {
            "shape": self.shape.json_name,
            "bar_bbox": list(self.bar_bbox.as_tuple()),
            "bar_length_px": self.bar_length_px,
            "label_text": self.label_text,
            "value": int(v) if v == v.to_integral_value() else float(v),
            "unit": self.unit.symbol,
            "text_bbox": list(self.text_bbox.as_tuple()),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ScaleBarAnnotation":
        return cls(
            bar_bbox=BoundingBox(*obj["bar_bbox"]),
            shape=SHAPE_BY_NAME[obj["shape"]],
            label_text=obj["label_text"],
            value=Decimal(str(obj["value"])),
            unit=UnitKind(obj["unit"]),
            text_bbox=BoundingBox(*obj["text_bbox"]),
            bar_length_px=obj["bar_length_px"],
        )


@dataclass(frozen=True)
class DistractorText:
    text: str
    bbox: BoundingBox

    def to_json(self) -> dict:
        return {"text": self.text, "bbox": list(self.bbox.as_tuple())}


@dataclass
class DatasetRecord:
    image_path: str
    width: int
    height: int
    split: str
    annotations: list[ScaleBarAnnotation]
    distractors: list[DistractorText]


@dataclass
class DatasetManifest:
    seed: int
    config_digest: str
    records: list[DatasetRecord]


@dataclass(frozen=True)
class GenConfig:
    count: int
    background_source: str | None = None  # directory of images, or procedural
    size: tuple[int, int] = (1024, 728)
    shape_weights: tuple[float, float, float, float] = (1.0, 1.0, 1.0, 1.0)
    value_pool: tuple[str, ...] = ("1", "2", "5", "10", "20", "50", "100", "200", "500")
    unit_pool: tuple[str, ...] = ("cm", "mm", "µm", "nm", "pm")
    position_jitter: float = 0.05
    bar_length_px_range: tuple[int, int] = (110, 320)
    thickness_range: tuple[int, int] = (6, 14)
    color_policy: str = "random"  # light-on-dark | dark-on-light | random
    distractor_text_probability: float = 0.3
    split_ratios: tuple[float, float, float] = (0.7, 0.15, 0.15)

    def validate(self) -> None:
        if self.count < 1:
            raise InvalidConfig("count must be positive")
        w, h = self.size
        if w < 220 or h < 120:
            raise InvalidConfig("image size too small to place a bar group")
        if len(self.shape_weights) != 4 or min(self.shape_weights) < 0 or sum(self.shape_weights) == 0:
            raise InvalidConfig("shape_weights must be 4 non-negative reals, not all zero")
        if not self.value_pool or any(Decimal(v) <= 0 for v in self.value_pool):
            raise InvalidConfig("value_pool must hold positive decimals")
        if not self.unit_pool or any(u not in {k.symbol for k in UnitKind} for u in self.unit_pool):
            raise InvalidConfig("unit_pool entries must be unit symbols")
        if not 0 <= self.distractor_text_probability <= 1:
            raise InvalidConfig("distractor_text_probability must be in [0,1]")
        lo, hi = self.bar_length_px_range
        if not (20 <= lo <= hi) or hi > w - 40:
            raise InvalidConfig("bar_length_px_range must be non-empty and fit the image")
        tlo, thi = self.thickness_range
        if not (2 <= tlo <= thi <= 40):
            raise InvalidConfig("thickness_range must be non-empty within [2,40]")
        if self.color_policy not in ("light-on-dark", "dark-on-light", "random"):
            raise InvalidConfig(f"unknown color_policy {self.color_policy!r}")
        r = self.split_ratios
        if len(r) != 3 or min(r) < 0 or abs(sum(r) - 1.0) > 1e-9:
            raise InvalidConfig("split_ratios must be 3 non-negative reals summing to 1")

    def digest(self) -> str:
        blob = json.dumps(self.__dict__, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()


# ---------------------------------------------------------------------------
# geometry construction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BarParams:
    x: int
    y: int
    length: int
    thickness: int
    color: tuple[int, int, int]
    outline: tuple[int, int, int]
    label_scale: int = 2
    label_gap: int = 6
    tick_count: int = 5


@dataclass
class _GroupMasks:
    """Core-pixel masks for bar and label in group-local coordinates."""

    bar: np.ndarray
    bar_off: tuple[int, int]  # (x, y) of bar mask within the group
    text: np.ndarray
    text_off: tuple[int, int]
    width: int
    height: int


def _tight(mask: np.ndarray) -> tuple[int, int, int, int]:
    ys, xs = np.nonzero(mask)
    return int(xs.min()), int(ys.min()), int(xs.max()) + 1, int(ys.max()) + 1


def build_group_masks(shape: BarShape, params: BarParams, label: str) -> _GroupMasks:
    """Lay out bar and label core masks; raises LabelDoesNotFit when the
    label cannot satisfy the shape's geometry."""
    scale = params.label_scale
    text = glyphs.render_text_mask(label, scale)
    tx0, ty0, tx1, ty1 = _tight(text)
    text = text[ty0:ty1, tx0:tx1]
    th, tw = text.shape
    length, t = params.length, params.thickness

    if shape is BarShape.RECTANGULAR:
        bar = np.ones((t, length), dtype=bool)
    elif shape is BarShape.I_SHAPED:
        lt = max(2, t // 2)
        cap_h = max(3 * lt, 12)
        bar = np.zeros((cap_h, length), dtype=bool)
        bar[:, :lt] = True
        bar[:, length - lt:] = True
        mid = (cap_h - lt) // 2
        bar[mid:mid + lt, :] = True
    elif shape is BarShape.RULER_SHAPED:
        bt = max(2, t // 2)
        tick_h = max(3 * bt, 12)
        n = max(3, params.tick_count)
        tick_w = bt
        bar = np.zeros((tick_h, length), dtype=bool)
        bar[tick_h - bt:, :] = True
        for i in range(n):
            x = round(i * (length - tick_w) / (n - 1))
            bar[:, x:x + tick_w] = True
    elif shape is BarShape.JOINT_LABEL:
        st = max(2, t // 2)
        pad = 3 * scale
        gap = tw + 2 * pad
        # clamp total length so the gap fraction stays inside [0.25, 0.55]
        length = min(max(length, int(np.ceil(gap / 0.55))), int(gap / 0.25))
        seg = (length - gap) // 2
        if seg < 20:
            raise LabelDoesNotFit(f"label {label!r} leaves segments of {seg}px")
        length = 2 * seg + gap
        h = max(st, th)
        bar = np.zeros((h, length), dtype=bool)
        row = (h - st) // 2
        bar[row:row + st, :seg] = True
        bar[row:row + st, length - seg:] = True
        text_off = (seg + pad, (h - th) // 2)
        canvas_w, canvas_h = length, h
        return _GroupMasks(bar, (0, 0), text, text_off, canvas_w, canvas_h)
    else:  # pragma: no cover
        raise ValueError(shape)

    # non-joint shapes: label centred below the bar
    bh, bw = bar.shape
    tx = (bw - tw) // 2
    ty = bh + params.label_gap
    min_x = min(0, tx)
    width = max(bw, tx + tw) - min_x
    return _GroupMasks(bar, (-min_x, 0), text, (tx - min_x, ty), width, ty + th)


def render_scale_bar(image: RasterImage, shape: BarShape, params: BarParams,
                     label: str) -> tuple[RasterImage, ScaleBarAnnotation]:
    """Draw one outlined scale bar with its label; returns the exact,
    pixel-derived annotation."""
    group = build_group_masks(shape, params, label)
    canvas = np.zeros((group.height, group.width), dtype=bool)
    bx, by = group.bar_off
    canvas[by:by + group.bar.shape[0], bx:bx + group.bar.shape[1]] |= group.bar
    tx, ty = group.text_off
    canvas[ty:ty + group.text.shape[0], tx:tx + group.text.shape[1]] |= group.text

    x0, y0 = params.x, params.y
    if x0 < 1 or y0 < 1 or x0 + group.width > image.width - 1 or y0 + group.height > image.height - 1:
        raise OutOfBounds(
            f"bar group {group.width}x{group.height} at ({x0},{y0}) leaves no outline margin")

    outline = ndimage.binary_dilation(canvas, structure=np.ones((3, 3), bool)) & ~canvas
    oys, oxs = np.nonzero(outline)
    image.pixels[y0 + oys, x0 + oxs] = params.outline
    cys, cxs = np.nonzero(canvas)
    image.pixels[y0 + cys, x0 + cxs] = params.color

    bbx0, bby0, bbx1, bby1 = _tight(group.bar)
    bar_box = BoundingBox(x0 + bx + bbx0, y0 + by + bby0, x0 + bx + bbx1, y0 + by + bby1)
    text_box = BoundingBox(x0 + tx, y0 + ty,
                           x0 + tx + group.text.shape[1], y0 + ty + group.text.shape[0])
    if shape is BarShape.JOINT_LABEL:
        bar_box = bar_box.union(text_box)

    quantity = parse_scale_text(label)
    ann = ScaleBarAnnotation(
        bar_bbox=bar_box, shape=shape, label_text=label,
        value=quantity.value, unit=quantity.unit,
        text_bbox=text_box, bar_length_px=bar_box.width)
    ann.check()
    return image, ann


# ---------------------------------------------------------------------------
# backgrounds
# ---------------------------------------------------------------------------

def _procedural_background(rng: np.random.Generator, width: int, height: int) -> RasterImage:
    """Seeded two-octave value-noise texture, luminance clamped to [40, 210]."""
    gray = np.zeros((height, width), dtype=np.int64)
    for cell, weight in ((64, 2), (16, 1)):
        lat_h = height // cell + 2
        lat_w = width // cell + 2
        lattice = rng.integers(0, 1 << 16, size=(lat_h, lat_w), dtype=np.int64)
        gray += weight * _kernels.value_noise(lattice, cell, height, width)
    gray //= 3
    lum = (40 + (gray * 171) // (1 << 16)).astype(np.uint8)
    return RasterImage(np.repeat(lum[:, :, None], 3, axis=2))


def _corpus_background(rng: np.random.Generator, source: Path,
                       width: int, height: int) -> RasterImage:
    files = sorted(p for p in source.iterdir()
                   if p.suffix.lower() in (".png", ".jpg", ".jpeg"))
    if not files:
        raise EmptyBackgroundSource(f"no PNG/JPEG files in {source}")
    img = load_image(files[int(rng.integers(0, len(files)))])
    px = img.pixels
    if px.shape[:2] != (height, width):
        from PIL import Image
        px = np.asarray(Image.fromarray(px).resize((width, height), Image.BILINEAR))
    # clamp away the saturated extremes reserved for drawn elements
    return RasterImage(np.clip(px, 8, 247))


# ---------------------------------------------------------------------------
# dataset generation
# ---------------------------------------------------------------------------

def _image_rng(seed: int, index: int) -> np.random.Generator:
    # counter-based keying: each image gets an independent Philox stream,
    # so adding images never perturbs earlier ones
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _split_plan(count: int, ratios: tuple[float, float, float]) -> list[str]:
    """Largest-remainder apportionment into train/val/test blocks."""
    exact = [count * r for r in ratios]
    base = [int(e) for e in exact]
    rem = count - sum(base)
    order = sorted(range(3), key=lambda i: (exact[i] - base[i], -i), reverse=True)
    for i in range(rem):
        base[order[i]] += 1
    names = ("train", "val", "test")
    plan = []
    for n, name in zip(base, names):
        plan.extend([name] * n)
    return plan


def _sample_label(rng: np.random.Generator, config: GenConfig) -> tuple[str, Decimal, UnitKind]:
    value = Decimal(config.value_pool[int(rng.integers(0, len(config.value_pool)))])
    unit = UnitKind(config.unit_pool[int(rng.integers(0, len(config.unit_pool)))])
    token = unit.symbol
    if unit is UnitKind.UM and rng.random() < 0.2:
        token = "um"
    sep = "" if rng.random() < 0.3 else " "
    return f"{plain_decimal(value)}{sep}{token}", value, unit


def _place_group(rng: np.random.Generator, img_w: int, img_h: int,
                 gw: int, gh: int, jitter: float) -> tuple[int, int]:
    margin = 10
    anchors = (
        (margin, margin),
        (img_w - gw - margin, margin),
        (margin, img_h - gh - margin),
        (img_w - gw - margin, img_h - gh - margin),
        ((img_w - gw) // 2, (img_h - gh) // 2),
    )
    ax, ay = anchors[int(rng.integers(0, 5))]
    jx = int(rng.integers(-int(jitter * img_w), int(jitter * img_w) + 1))
    jy = int(rng.integers(-int(jitter * img_h), int(jitter * img_h) + 1))
    x = min(max(ax + jx, 2), img_w - gw - 2)
    y = min(max(ay + jy, 2), img_h - gh - 2)
    return x, y


def _synthesize_one(index: int, seed: int, config: GenConfig) -> tuple[RasterImage, list[ScaleBarAnnotation], list[DistractorText]]:
    rng = _image_rng(seed, index)
    w, h = config.size
    if config.background_source is None:
        image = _procedural_background(rng, w, h)
    else:
        image = _corpus_background(rng, Path(config.background_source), w, h)

    weights = np.asarray(config.shape_weights, dtype=np.float64)
    shape = BarShape(int(rng.choice(4, p=weights / weights.sum())))
    label, _, _ = _sample_label(rng, config)
    policy = config.color_policy
    if policy == "random":
        policy = "light-on-dark" if rng.random() < 0.5 else "dark-on-light"
    color, outline = (_WHITE, _BLACK) if policy == "light-on-dark" else (_BLACK, _WHITE)

    length = int(rng.integers(config.bar_length_px_range[0], config.bar_length_px_range[1] + 1))
    thickness = int(rng.integers(config.thickness_range[0], config.thickness_range[1] + 1))
    params = BarParams(
        x=0, y=0, length=length, thickness=thickness,
        color=color, outline=outline,
        label_scale=int(rng.integers(2, 4)),
        tick_count=int(rng.integers(3, 8)),
    )
    group = build_group_masks(shape, params, label)
    x, y = _place_group(rng, w, h, group.width, group.height, config.position_jitter)
    _, ann = render_scale_bar(image, shape, replace(params, x=x, y=y), label)

    distractors: list[DistractorText] = []
    if rng.random() < config.distractor_text_probability:
        word = DISTRACTOR_WORDS[int(rng.integers(0, len(DISTRACTOR_WORDS)))]
        d = _place_distractor(rng, image, word, ann, color, outline)
        if d is not None:
            distractors.append(d)
    return image, [ann], distractors


def _place_distractor(rng: np.random.Generator, image: RasterImage, word: str,
                      ann: ScaleBarAnnotation, color, outline) -> DistractorText | None:
    scale = 2
    mask = glyphs.render_text_mask(word, scale)
    x0, y0, x1, y1 = _tight(mask)
    mask = mask[y0:y1, x0:x1]
    mh, mw = mask.shape
    keep_out = ann.bar_bbox.union(ann.text_bbox)
    for _ in range(20):
        x = int(rng.integers(2, image.width - mw - 2))
        y = int(rng.integers(2, image.height - mh - 2))
        box = BoundingBox(x - 8, y - 8, x + mw + 8, y + mh + 8)
        if not box.intersects(keep_out):
            dil = ndimage.binary_dilation(mask, structure=np.ones((3, 3), bool)) & ~mask
            oys, oxs = np.nonzero(dil)
            image.pixels[y + oys, x + oxs] = outline
            cys, cxs = np.nonzero(mask)
            image.pixels[y + cys, x + cxs] = color
            return DistractorText(word, BoundingBox(x, y, x + mw, y + mh))
    return None


def generate_dataset(config: GenConfig, seed: int, out_dir: str | Path) -> DatasetManifest:
    """Synthesize `config.count` annotated images under out_dir.

    Identical (config, seed) yields a byte-identical output tree.
    """
    config.validate()
    out = Path(out_dir)
    (out / "images").mkdir(parents=True, exist_ok=True)
    splits = _split_plan(config.count, config.split_ratios)

    records = []
    for i in range(config.count):
        image, anns, distractors = _synthesize_one(i, seed, config)
        rel = f"images/img_{i:05d}.png"
        save_image(image, out / rel)
        records.append(DatasetRecord(
            image_path=rel, width=image.width, height=image.height,
            split=splits[i], annotations=anns, distractors=distractors))

    manifest = DatasetManifest(seed=seed, config_digest=config.digest(), records=records)
    export_annotations(manifest, out)
    return manifest


# ---------------------------------------------------------------------------
# manifest I/O
# ---------------------------------------------------------------------------

def manifest_to_json(manifest: DatasetManifest) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "seed": manifest.seed,
        "config_digest": manifest.config_digest,
        "records": [
            {
                "image_path": r.image_path,
                "width": r.width,
                "height": r.height,
                "split": r.split,
                "annotations": [a.to_json() for a in r.annotations],
                "distractors": [d.to_json() for d in r.distractors],
            }
            for r in manifest.records
        ],
    }


def export_annotations(manifest: DatasetManifest, out_dir: str | Path) -> None:
    """Write per-image detector-training txt files, JSON sidecars, and the
    root manifest.json."""
    out = Path(out_dir)
    (out / "labels").mkdir(parents=True, exist_ok=True)
    (out / "sidecars").mkdir(parents=True, exist_ok=True)
    for r in manifest.records:
        stem = Path(r.image_path).stem
        lines = []
        for a in r.annotations:
            b = a.bar_bbox
            cx = (b.x_min + b.x_max) / 2 / r.width
            cy = (b.y_min + b.y_max) / 2 / r.height
            bw = b.width / r.width
            bh = b.height / r.height
            lines.append(f"{a.shape.value} {cx:.6f} {cy:.6f} {bw:.6f} {bh:.6f}")
        (out / "labels" / f"{stem}.txt").write_text("".join(l + "\n" for l in lines))
        sidecar = {
            "image_path": r.image_path,
            "annotations": [a.to_json() for a in r.annotations],
            "distractors": [d.to_json() for d in r.distractors],
        }
        (out / "sidecars" / f"{stem}.json").write_text(
            json.dumps(sidecar, ensure_ascii=False, sort_keys=True, indent=1) + "\n")
    (out / "manifest.json").write_text(
        json.dumps(manifest_to_json(manifest), ensure_ascii=False, sort_keys=True, indent=1) + "\n")


def import_manifest(path: str | Path) -> DatasetManifest:
    """Load and validate a manifest; fails loudly on invariant violations."""
    path = Path(path)
    try:
        obj = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ParseError(f"{path}: {e}") from e
    if obj.get("schema_version") != SCHEMA_VERSION:
        raise ParseError(f"{path}: unsupported schema_version {obj.get('schema_version')}")

    root = path.parent
    seen_paths = set()
    records = []
    for idx, rec in enumerate(obj.get("records", [])):
        where = f"record {idx} ({rec.get('image_path', '?')})"
        ipath = rec["image_path"]
        if ipath in seen_paths:
            raise InvariantViolation(f"{where}: duplicate image path")
        seen_paths.add(ipath)
        if not (root / ipath).exists():
            raise InvariantViolation(f"{where}: missing image file {root / ipath}")
        if rec["split"] not in ("train", "val", "test"):
            raise InvariantViolation(f"{where}: bad split {rec['split']!r}")
        w, h = rec["width"], rec["height"]
        anns = []
        for a in rec["annotations"]:
            x0, y0, x1, y1 = a["bar_bbox"]
            if not (0 <= x0 < x1 <= w and 0 <= y0 < y1 <= h):
                raise InvariantViolation(f"{where}: bar bbox {a['bar_bbox']} invalid for {w}x{h}")
            tx0, ty0, tx1, ty1 = a["text_bbox"]
            if not (0 <= tx0 < tx1 <= w and 0 <= ty0 < ty1 <= h):
                raise InvariantViolation(f"{where}: text bbox {a['text_bbox']} invalid for {w}x{h}")
            try:
                ann = ScaleBarAnnotation.from_json(a)
                ann.check()
            except (KeyError, ValueError) as e:
                raise InvariantViolation(f"{where}: {e}") from e
            anns.append(ann)
        distractors = [DistractorText(d["text"], BoundingBox(*d["bbox"]))
                       for d in rec.get("distractors", [])]
        records.append(DatasetRecord(
            image_path=ipath, width=w, height=h, split=rec["split"],
            annotations=anns, distractors=distractors))
    return DatasetManifest(seed=obj["seed"], config_digest=obj["config_digest"], records=records)
