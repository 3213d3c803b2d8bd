# -*- coding: utf-8 -*-
# BSD 3-Clause License
# Copyright (c) 2024, ferhelper developers
# All rights reserved.
"""Raster drawing on `[H, W, 3]` uint8 canvases.

Text is stamped with an embedded public-domain 5x7 bitmap font. Lower case
letters are drawn as upper case, unknown characters as `?`.

"""
import functools

import numpy as np

GLYPH_WIDTH = 5
GLYPH_HEIGHT = 7
GLYPH_SPACING = 1

# one 5-bit row per line, most significant bit is the leftmost pixel
FONT_5X7 = {
    ' ': (0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00),
    '%': (0x18, 0x19, 0x02, 0x04, 0x08, 0x13, 0x03),
    '-': (0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00),
    '.': (0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C),
    ':': (0x00, 0x0C, 0x0C, 0x00, 0x0C, 0x0C, 0x00),
    '?': (0x0E, 0x11, 0x01, 0x02, 0x04, 0x00, 0x04),
    '0': (0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E),
    '1': (0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E),
    '2': (0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F),
    '3': (0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E),
    '4': (0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02),
    '5': (0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E),
    '6': (0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E),
    '7': (0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08),
    '8': (0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E),
    '9': (0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C),
    'A': (0x0E, 0x11, 0x11, 0x11, 0x1F, 0x11, 0x11),
    'B': (0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E),
    'C': (0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E),
    'D': (0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C),
    'E': (0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F),
    'F': (0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10),
    'G': (0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F),
    'H': (0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11),
    'I': (0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E),
    'J': (0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C),
    'K': (0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11),
    'L': (0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F),
    'M': (0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11),
    'N': (0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11),
    'O': (0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E),
    'P': (0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10),
    'Q': (0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D),
    'R': (0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11),
    'S': (0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E),
    'T': (0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04),
    'U': (0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E),
    'V': (0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04),
    'W': (0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A),
    'X': (0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11),
    'Y': (0x11, 0x11, 0x11, 0x0A, 0x04, 0x04, 0x04),
    'Z': (0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F),
}


@functools.lru_cache(maxsize=None)
def glyph(char):
    """Return the `[7, 5]` boolean bitmap of a character."""
    rows = FONT_5X7.get(char.upper(), FONT_5X7['?'])
    bits = np.array(rows, dtype=np.uint8)[:, np.newaxis] >> np.arange(
        GLYPH_WIDTH - 1, -1, -1, dtype=np.uint8,
    )
    return (bits & 1).astype(bool)


def text_size(text, scale=1):
    """Return `(width, height)` in pixels of the rendered text."""
    if not text:
        return 0, 0
    width = len(text) * (GLYPH_WIDTH + GLYPH_SPACING) - GLYPH_SPACING
    return width * scale, GLYPH_HEIGHT * scale


def text_bitmap(text, scale=1):
    """Return the boolean bitmap of the rendered text."""
    width, height = text_size(text, scale=1)
    bitmap = np.zeros((height, width), dtype=bool)
    for idx, char in enumerate(text):
        left = idx * (GLYPH_WIDTH + GLYPH_SPACING)
        bitmap[:, left:left + GLYPH_WIDTH] = glyph(char)
    if scale > 1:
        bitmap = np.kron(bitmap, np.ones((scale, scale), dtype=bool))
    return bitmap


def _clip_box(canvas, x, y, width, height):
    x0, y0 = max(x, 0), max(y, 0)
    x1 = min(x + width, canvas.shape[1])
    y1 = min(y + height, canvas.shape[0])
    return x0, y0, x1, y1


def draw_text(canvas, text, x, y, color, scale=1):
    """Stamp text with its top left corner at `(x, y)`, clipped to canvas."""
    bitmap = text_bitmap(text, scale=scale)
    if not bitmap.size:
        return canvas
    x0, y0, x1, y1 = _clip_box(canvas, x, y, bitmap.shape[1], bitmap.shape[0])
    if x1 <= x0 or y1 <= y0:
        return canvas
    mask = bitmap[y0 - y:y1 - y, x0 - x:x1 - x]
    canvas[y0:y1, x0:x1][mask] = color
    return canvas


def fill_rect(canvas, x, y, width, height, color):
    """Fill a rectangle, clipped to the canvas."""
    x0, y0, x1, y1 = _clip_box(canvas, x, y, width, height)
    if x1 > x0 and y1 > y0:
        canvas[y0:y1, x0:x1] = color
    return canvas


def draw_rect(canvas, x, y, width, height, color, thickness=2):
    """Draw the outline of a rectangle growing inwards from its border."""
    thickness = max(1, min(thickness, width, height))
    fill_rect(canvas, x, y, width, thickness, color)
    fill_rect(canvas, x, y + height - thickness, width, thickness, color)
    fill_rect(canvas, x, y, thickness, height, color)
    fill_rect(canvas, x + width - thickness, y, thickness, height, color)
    return canvas


def hstack(images, gap=0, fill=255):
    """Concatenate `[H, W, 3]` images horizontally, padding to equal height."""
    height = max(img.shape[0] for img in images)
    parts = []
    for idx, img in enumerate(images):
        padded = np.full((height, img.shape[1], 3), fill, dtype=np.uint8)
        padded[:img.shape[0]] = img
        parts.append(padded)
        if gap and idx < len(images) - 1:
            parts.append(np.full((height, gap, 3), fill, dtype=np.uint8))
    return np.concatenate(parts, axis=1)
