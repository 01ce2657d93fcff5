"""Scale-text validation, unit parsing, bar-text association, and measurement.

The scale-text grammar is deliberately strict: a decimal value, at most one
space, and a lowercase metric unit token with nothing else around it. The
word-boundary rule means "um" buried in a longer word ("summary") never
validates, while a bare "5um" does — the ASCII fallback for µm.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from decimal import Decimal
from typing import TYPE_CHECKING, Iterable, Sequence

from .errors import InvalidPitch, InvalidScaleText, NoCandidates
from .flags import Flag, FlagCode

if TYPE_CHECKING:  # pragma: no cover
    from .detect import Detection, DetectorBackend
    from .imaging import RasterImage
    from .ocr import OcrEngineConfig, TextRegion


class UnitKind(enum.Enum):
    """Closed set of length units found on micrograph scale bars."""

    CM = "cm"
    MM = "mm"
    UM = "µm"
    NM = "nm"
    PM = "pm"

    @property
    def symbol(self) -> str:
        return self.value

    @property
    def meters_per_unit(self) -> Decimal:
        return _FACTORS[self]


_FACTORS = {
    UnitKind.CM: Decimal("1e-2"),
    UnitKind.MM: Decimal("1e-3"),
    UnitKind.UM: Decimal("1e-6"),
    UnitKind.NM: Decimal("1e-9"),
    UnitKind.PM: Decimal("1e-12"),
}

# "um" is the ASCII spelling of µm; both normalize to UnitKind.UM
_UNIT_TOKENS = {
    "cm": UnitKind.CM,
    "mm": UnitKind.MM,
    "µm": UnitKind.UM,
    "um": UnitKind.UM,
    "nm": UnitKind.NM,
    "pm": UnitKind.PM,
}

_SCALE_RE = re.compile(r"^(\d+(?:\.\d+)?) ?(cm|mm|µm|um|nm|pm)$")


def plain_decimal(d: Decimal) -> str:
    """Render a Decimal without exponent notation or trailing zeros."""
    d = d.normalize()
    if d.as_tuple().exponent > 0:
        d = d.quantize(Decimal(1))
    return format(d, "f")


@dataclass(frozen=True)
class PhysicalQuantity:
    """Positive decimal value with a unit; the value stays an exact decimal."""

    value: Decimal
    unit: UnitKind

    def __post_init__(self):
        if self.value <= 0:
            raise ValueError("quantity value must be positive")

    @property
    def meters_exact(self) -> Decimal:
        return self.value * self.unit.meters_per_unit

    @property
    def meters(self) -> float:
        return float(self.meters_exact)

    def canonical_text(self) -> str:
        return f"{plain_decimal(self.value)} {self.unit.symbol}"


def validate_scale_text(s: str) -> bool:
    """True iff s is `<decimal><optional single space><unit>` with a
    positive value and the unit token at a word boundary."""
    m = _SCALE_RE.match(s)
    return bool(m) and Decimal(m.group(1)) > 0


def parse_scale_text(s: str) -> PhysicalQuantity:
    """Parse a validated scale label; µm/um both normalize to UnitKind.UM."""
    m = _SCALE_RE.match(s)
    if not m:
        raise InvalidScaleText(_describe_failure(s))
    value = Decimal(m.group(1))
    if value <= 0:
        raise InvalidScaleText(f"{s!r}: value must be positive")
    return PhysicalQuantity(value, _UNIT_TOKENS[m.group(2)])


def _describe_failure(s: str) -> str:
    if not s:
        return "empty string is not a scale label"
    if not re.match(r"^\d", s):
        return f"{s!r}: must start with a decimal value"
    if not re.search(r"(cm|mm|µm|um|nm|pm)", s):
        return f"{s!r}: no recognized unit token"
    return f"{s!r}: unit token not at a word boundary or malformed value"


def normalize_scale_text(s: str) -> str:
    """Canonical `<value> <unit>` form of a valid label (um → µm,
    single space, no trailing zeros). Raises InvalidScaleText otherwise."""
    return parse_scale_text(s).canonical_text()


def find_unit_texts(regions: Sequence["TextRegion"]) -> list["TextRegion"]:
    """Subset of regions whose text validates as a scale label, order kept."""
    return [r for r in regions if validate_scale_text(r.text)]


def associate(bar: "Detection", candidates: Sequence["TextRegion"]) -> tuple["TextRegion", float]:
    """Nearest candidate to the bar center by Euclidean center distance.

    Ties break on smaller candidate center y, then smaller x.
    """
    if not candidates:
        raise NoCandidates("no scale-text candidates to associate")
    bx, by = bar.center
    best = None
    best_key = None
    for cand in candidates:
        cx, cy = cand.center
        key = (math.hypot(bx - cx, by - cy), cy, cx)
        if best_key is None or key < best_key:
            best, best_key = cand, key
    return best, best_key[0]


@dataclass
class ScaleResult:
    """One detected bar joined with its scale text, or flagged if none."""

    bar: "Detection"
    text: "TextRegion | None" = None
    quantity: PhysicalQuantity | None = None
    distance_px: float | None = None
    pixel_pitch_m: float | None = None
    flags: list[Flag] = field(default_factory=list)

    def to_json(self) -> dict:
        out: dict = {"bar": self.bar.to_json()}
        if self.text is not None:
            out["text"] = self.text.to_json()
        if self.quantity is not None:
            out["value"] = float(self.quantity.value)
            out["unit"] = self.quantity.unit.symbol
        if self.distance_px is not None:
            out["distance_px"] = self.distance_px
        if self.pixel_pitch_m is not None:
            out["pixel_pitch_m"] = self.pixel_pitch_m
        out["flags"] = [f.to_json() for f in self.flags]
        return out


def pixel_pitch(quantity: PhysicalQuantity, bar_length_px: int) -> float:
    """Physical length per pixel, from the bar's labelled width."""
    if bar_length_px <= 0:
        raise InvalidPitch("bar length must be positive")
    return quantity.meters / bar_length_px


def measure(pixel_distance: float, pitch: float) -> float:
    """Convert a pixel distance to meters via the pixel pitch."""
    if pitch <= 0:
        raise InvalidPitch(f"pitch must be positive, got {pitch}")
    if pixel_distance < 0:
        raise ValueError("pixel distance must be non-negative")
    return pixel_distance * pitch


def extract_scale(image: "RasterImage", detector: "DetectorBackend | None" = None,
                  ocr_config: "OcrEngineConfig | None" = None) -> list[ScaleResult]:
    """Full phase-iii pipeline over one image.

    Every detected bar yields one ScaleResult; bars without a valid scale
    text carry a NoScaleText flag instead of being dropped.
    """
    from .detect import DetectorBackend, detect_bars
    from .ocr import OcrEngineConfig, detect_text_regions, hybrid_recognize

    detector = detector or DetectorBackend.builtin()
    ocr_config = ocr_config or OcrEngineConfig()

    bars = detect_bars(image, detector)
    regions = detect_text_regions(image)
    recognized = [hybrid_recognize(image, box, ocr_config) for box in regions]
    candidates = find_unit_texts([r for r in recognized if r.text])

    results = []
    for bar in bars:
        if not candidates:
            results.append(ScaleResult(bar=bar, flags=[
                Flag(FlagCode.NO_SCALE_TEXT, "no valid scale text found in image")]))
            continue
        text, dist = associate(bar, candidates)
        quantity = parse_scale_text(text.text)
        results.append(ScaleResult(
            bar=bar, text=text, quantity=quantity, distance_px=dist,
            pixel_pitch_m=pixel_pitch(quantity, bar.bbox.width)))
    return results
