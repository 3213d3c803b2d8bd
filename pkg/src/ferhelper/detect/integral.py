# -*- coding: utf-8 -*-
# BSD 3-Clause License
# Copyright (c) 2024, ferhelper developers
# All rights reserved.
"""Summed area tables of grayscale images."""
import dataclasses

import decorit
import numba
import numpy as np

from ferhelper.exceptions import ShapeError


@dataclasses.dataclass(frozen=True)
class IntegralImage:
    """Cumulative sums of an image and of its squared values.

    Both tables have shape `(H + 1, W + 1)` with a leading row and column
    of zeros, so `sums[i, j]` is the sum of all pixels above and left of
    `(i, j)`.

    """

    sums: np.ndarray
    squared_sums: np.ndarray

    @property
    def shape(self):
        """Return `(H, W)` of the underlying image."""
        return self.sums.shape[0] - 1, self.sums.shape[1] - 1

    def rect_sum(self, x, y, width, height):
        """Return the pixel sum of a rectangle, see `rect_sum`."""
        return rect_sum(self.sums, x, y, width, height)

    def window_std(self, x, y, width, height):
        """Return the pixel standard deviation of a rectangle."""
        area = width * height
        mean = rect_sum(self.sums, x, y, width, height) / area
        var = rect_sum(self.squared_sums, x, y, width, height) / area - mean**2
        return float(np.sqrt(var)) if var > 0 else 0.0


@decorit.alias('integral_image')
def integral(image):
    """Compute the integral image of a grayscale image.

    Parameters
    ----------
    image : ndarray
        Grayscale image of shape `[H, W]`.

    Returns
    -------
    ii : IntegralImage

    """
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2 or not image.size:
        raise ShapeError(
            f'Expected a non-empty [H, W] image, got {image.shape}.',
        )

    def padded_cumsum(values):
        sums = np.zeros((values.shape[0] + 1, values.shape[1] + 1))
        sums[1:, 1:] = values.cumsum(axis=0).cumsum(axis=1)
        return sums

    return IntegralImage(padded_cumsum(image), padded_cumsum(image**2))


@numba.njit(nogil=True)
def rect_sum(sums, x, y, width, height):
    """Sum of the rectangle with top left `(x, y)` by the 4-corner formula."""
    return (
        sums[y + height, x + width]
        - sums[y, x + width]
        - sums[y + height, x]
        + sums[y, x]
    )
