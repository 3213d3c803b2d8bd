# -*- coding: utf-8 -*-
# BSD 3-Clause License
# Copyright (c) 2024, ferhelper developers
# All rights reserved.
"""Decoding and encoding of 8-bit images."""
import os

import numpy as np
from PIL import Image, UnidentifiedImageError

from ferhelper.exceptions import DecodeError, ShapeError

LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])

_GRAY_MODES = {'1', 'L', 'LA', 'I', 'F'}


def decode_image(path):
    """Read an image into an 8-bit pixel grid.

    Parameters
    ----------
    path : str
        JPEG, PNG, PPM (P6) or PGM (P5) file.

    Returns
    -------
    grid : ndarray of uint8
        Array of shape `[H, W]` for gray images and `[H, W, 3]` otherwise.

    """
    try:
        with Image.open(path) as img:
            if img.mode in _GRAY_MODES:
                img = img.convert('L')
            elif img.mode != 'RGB':
                img = img.convert('RGB')
            grid = np.asarray(img, dtype=np.uint8)
    except (OSError, ValueError, UnidentifiedImageError) as err:
        raise DecodeError(f'Could not decode {path}: {err}') from err
    return grid.copy()


def encode_image(grid, path):
    """Write an 8-bit pixel grid, format given by the extension.

    Parameters
    ----------
    grid : ndarray
        Array of shape `[H, W]` or `[H, W, 3]` with values 0-255.
    path : str
        Output file ending with `.png`, `.ppm`, `.pgm` or `.jpg`.

    """
    grid = np.asarray(grid)
    if grid.ndim not in {2, 3} or (grid.ndim == 3 and grid.shape[2] != 3):
        raise ShapeError(f'Expected [H, W] or [H, W, 3], got {grid.shape}.')
    grid = np.clip(np.rint(grid), 0, 255).astype(np.uint8)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    img = Image.fromarray(grid, mode='L' if grid.ndim == 2 else 'RGB')
    if os.path.splitext(path)[1].lower() == '.pgm' and grid.ndim == 3:
        img = img.convert('L')
    img.save(path)


def to_grayscale(grid):
    """Return the luma `0.299 R + 0.587 G + 0.114 B` as float array."""
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim == 2:
        return grid
    if grid.ndim == 3 and grid.shape[2] == 3:
        return grid @ LUMA_WEIGHTS
    raise ShapeError(f'Expected [H, W] or [H, W, 3], got {grid.shape}.')


def to_rgb(grid):
    """Return an `[H, W, 3]` uint8 copy of a gray or color grid."""
    grid = np.asarray(grid)
    if grid.ndim == 2:
        grid = np.repeat(grid[..., np.newaxis], 3, axis=2)
    return np.clip(np.rint(grid), 0, 255).astype(np.uint8)
