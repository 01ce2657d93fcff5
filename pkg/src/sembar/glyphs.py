"""Bundled bitmap glyph atlas.

A fixed 9-row bitmap font shared by the dataset generator (rendering) and
the built-in recognizer (template matching). Rows 0-6 sit above the
baseline, rows 7-8 hold descenders (µ, p, g, j, q, y). Glyph widths vary;
kerning between glyphs is one column, scaled with the text.

The recognizer only scores the scale-label charset (digits, '.', c, m, µ,
u, n, p); the extra lowercase letters exist so distractor words can be
rendered with the same pen.
"""

from __future__ import annotations

import numpy as np

GLYPH_ROWS = 9
BASELINE_ROW = 7  # first descender row
KERNING = 1
SPACE_WIDTH = 3

# charset the built-in recognizer is allowed to emit
RECOGNIZER_CHARSET = "0123456789.cmµunp"

_ATLAS_SRC: dict[str, tuple[str, ...]] = {
    "0": (".###.", "#...#", "#..##", "#.#.#", "##..#", "#...#", ".###.", ".....", "....."),
    "1": ("..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###.", ".....", "....."),
    "2": (".###.", "#...#", "....#", "..##.", ".#...", "#....", "#####", ".....", "....."),
    "3": ("#####", "....#", "...#.", "..##.", "....#", "#...#", ".###.", ".....", "....."),
    "4": ("...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#.", ".....", "....."),
    "5": ("#####", "#....", "####.", "....#", "....#", "#...#", ".###.", ".....", "....."),
    "6": ("..##.", ".#...", "#....", "####.", "#...#", "#...#", ".###.", ".....", "....."),
    "7": ("#####", "....#", "...#.", "..#..", ".#...", ".#...", ".#...", ".....", "....."),
    "8": (".###.", "#...#", "#...#", ".###.", "#...#", "#...#", ".###.", ".....", "....."),
    "9": (".###.", "#...#", "#...#", ".####", "....#", "...#.", ".##..", ".....", "....."),
    ".": ("..", "..", "..", "..", "..", "##", "##", "..", ".."),
    "c": (".....", ".....", ".###.", "#....", "#....", "#....", ".###.", ".....", "....."),
    "m": (".....", ".....", "##.#.", "#.#.#", "#.#.#", "#.#.#", "#.#.#", ".....", "....."),
    "µ": (".....", ".....", "#...#", "#...#", "#...#", "#..##", "###.#", "#....", "#...."),
    "u": (".....", ".....", "#...#", "#...#", "#...#", "#..##", ".##.#", ".....", "....."),
    "n": (".....", ".....", "#.##.", "##..#", "#...#", "#...#", "#...#", ".....", "....."),
    "p": (".....", ".....", "#.##.", "##..#", "#...#", "##..#", "#.##.", "#....", "#...."),
    # letters below are render-only (distractor words)
    "a": (".....", ".....", ".###.", "....#", ".####", "#...#", ".####", ".....", "....."),
    "b": ("#....", "#....", "#.##.", "##..#", "#...#", "##..#", "#.##.", ".....", "....."),
    "d": ("....#", "....#", ".##.#", "#..##", "#...#", "#..##", ".##.#", ".....", "....."),
    "e": (".....", ".....", ".###.", "#...#", "#####", "#....", ".###.", ".....", "....."),
    "f": ("..##.", ".#..#", ".#...", "###..", ".#...", ".#...", ".#...", ".....", "....."),
    "g": (".....", ".....", ".####", "#...#", "#...#", ".####", "....#", "#...#", ".###."),
    "h": ("#....", "#....", "#.##.", "##..#", "#...#", "#...#", "#...#", ".....", "....."),
    "i": (".#.", "...", "##.", ".#.", ".#.", ".#.", "###", "...", "..."),
    "j": ("..#", "...", ".##", "..#", "..#", "..#", "..#", "..#", "##."),
    "k": ("#....", "#....", "#..#.", "#.#..", "##...", "#.#..", "#..#.", ".....", "....."),
    "l": ("##.", ".#.", ".#.", ".#.", ".#.", ".#.", "###", "...", "..."),
    "o": (".....", ".....", ".###.", "#...#", "#...#", "#...#", ".###.", ".....", "....."),
    "q": (".....", ".....", ".##.#", "#..##", "#...#", "#..##", ".##.#", "....#", "....#"),
    "r": (".....", ".....", "#.##.", "##..#", "#....", "#....", "#....", ".....", "....."),
    "s": (".....", ".....", ".####", "#....", ".###.", "....#", "####.", ".....", "....."),
    "t": (".#...", ".#...", "###..", ".#...", ".#...", ".#..#", "..##.", ".....", "....."),
    "v": (".....", ".....", "#...#", "#...#", "#...#", ".#.#.", "..#..", ".....", "....."),
    "w": (".....", ".....", "#...#", "#...#", "#.#.#", "#.#.#", ".#.#.", ".....", "....."),
    "x": (".....", ".....", "#...#", ".#.#.", "..#..", ".#.#.", "#...#", ".....", "....."),
    "y": (".....", ".....", "#...#", "#...#", "#...#", ".####", "....#", "...#.", ".##.."),
    "z": (".....", ".....", "#####", "...#.", "..#..", ".#...", "#####", ".....", "....."),
}


def _to_bitmap(rows: tuple[str, ...]) -> np.ndarray:
    return np.array([[c == "#" for c in row] for row in rows], dtype=bool)


ATLAS: dict[str, np.ndarray] = {ch: _to_bitmap(rows) for ch, rows in _ATLAS_SRC.items()}

RENDER_CHARSET = "".join(sorted(ATLAS)) + " "


def glyph_width(ch: str) -> int:
    if ch == " ":
        return SPACE_WIDTH
    return ATLAS[ch].shape[1]


def text_width(text: str, scale: int = 1) -> int:
    """Advance width of a rendered string in pixels (tight on both ends)."""
    if not text:
        return 0
    w = sum(glyph_width(c) for c in text) + KERNING * (len(text) - 1)
    return w * scale


def text_height(scale: int = 1) -> int:
    return GLYPH_ROWS * scale


def render_text_mask(text: str, scale: int = 1) -> np.ndarray:
    """Render a string to a boolean mask of shape (9*scale, text_width)."""
    for ch in text:
        if ch != " " and ch not in ATLAS:
            raise KeyError(f"glyph not in atlas: {ch!r}")
    w = text_width(text, scale)
    mask = np.zeros((GLYPH_ROWS * scale, max(w, 1)), dtype=bool)
    x = 0
    for ch in text:
        gw = glyph_width(ch)
        if ch != " ":
            bm = ATLAS[ch]
            scaled = np.kron(bm, np.ones((scale, scale), dtype=bool))
            mask[:, x * scale:(x + gw) * scale] |= scaled
        x += gw + KERNING
    return mask


def tight_template(ch: str) -> np.ndarray:
    """Glyph bitmap cropped to its inked rows/columns (scale 1)."""
    bm = ATLAS[ch]
    ys, xs = np.nonzero(bm)
    return bm[ys.min():ys.max() + 1, xs.min():xs.max() + 1]
