# -*- coding: utf-8 -*-
# BSD 3-Clause License
# Copyright (c) 2024, ferhelper developers
# All rights reserved.
"""Multi-scale sliding window detection with a Haar cascade."""
import concurrent.futures
import dataclasses
import logging

import numba
import numpy as np

from ferhelper.data.imageio import to_grayscale
from ferhelper.detect.integral import IntegralImage, integral, rect_sum
from ferhelper.exceptions import ConfigError, ShapeError

logger = logging.getLogger(__name__)

DEFAULT_SCALE_FACTOR = 1.1
DEFAULT_MIN_NEIGHBORS = 3
GROUP_IOU = 0.3


@dataclasses.dataclass(frozen=True, order=True)
class Detection:
    """Square face box in pixel coordinates.

    Parameters
    ----------
    x, y : int
        Top left corner.
    width, height : int
        Box size, equal for cascade detections.
    neighbors : int
        Number of raw windows merged into this box.

    """

    x: int
    y: int
    width: int
    height: int
    neighbors: int = 1

    @property
    def area(self):
        """Return the box area."""
        return self.width * self.height

    @property
    def box(self):
        """Return `(x, y, width, height)`."""
        return self.x, self.y, self.width, self.height

    def iou(self, other):
        """Return the intersection over union with another box."""
        width = min(self.x + self.width, other.x + other.width) - max(
            self.x, other.x,
        )
        height = min(self.y + self.height, other.y + other.height) - max(
            self.y, other.y,
        )
        if width <= 0 or height <= 0:
            return 0.0
        inter = width * height
        return inter / (self.area + other.area - inter)


@numba.njit(nogil=True)
def _eval_window(
    sums,
    squared_sums,
    x,
    y,
    window,
    scale,
    stage_thresholds,
    stage_bounds,
    weak_params,
    rect_bounds,
    rects,
):
    """Run the cascade on one window, rejecting at the first failing stage."""
    area = window * window
    mean = rect_sum(sums, x, y, window, window) / area
    var = rect_sum(squared_sums, x, y, window, window) / area - mean * mean
    std = np.sqrt(var) if var > 0 else 1.0

    for stage in range(len(stage_thresholds)):
        stage_sum = 0.0
        for weak in range(stage_bounds[stage], stage_bounds[stage + 1]):
            value = 0.0
            for idx in range(rect_bounds[weak], rect_bounds[weak + 1]):
                value += rects[idx, 4] * rect_sum(
                    sums,
                    x + int(rects[idx, 0] * scale),
                    y + int(rects[idx, 1] * scale),
                    int(rects[idx, 2] * scale),
                    int(rects[idx, 3] * scale),
                )
            if value / area < weak_params[weak, 0] * std:
                stage_sum += weak_params[weak, 1]
            else:
                stage_sum += weak_params[weak, 2]
        if stage_sum < stage_thresholds[stage]:
            return False
    return True


@numba.njit(nogil=True)
def _scan(
    sums,
    squared_sums,
    window,
    step,
    scale,
    stage_thresholds,
    stage_bounds,
    weak_params,
    rect_bounds,
    rects,
):
    """Evaluate all windows of one scale, return the acceptance grid."""
    n_rows = (sums.shape[0] - 1 - window) // step + 1
    n_cols = (sums.shape[1] - 1 - window) // step + 1
    accepted = np.zeros((n_rows, n_cols), dtype=np.bool_)
    for row in range(n_rows):
        for col in range(n_cols):
            accepted[row, col] = _eval_window(
                sums,
                squared_sums,
                col * step,
                row * step,
                window,
                scale,
                stage_thresholds,
                stage_bounds,
                weak_params,
                rect_bounds,
                rects,
            )
    return accepted


def window_size(cascade, scale):
    """Return the edge length of the base window at a scale."""
    return int(cascade.window_size * scale)


def window_step(scale):
    """Return the sliding step at a scale."""
    return max(1, round(scale))


def eval_window(cascade, ii, x, y, scale=1.0):
    """Run a cascade on a single window.

    The window standard deviation normalizes the features. A weak
    classifier votes `left` if its feature value is below threshold times
    standard deviation, a stage rejects if its summed votes are below the
    stage threshold and the window is accepted if all stages pass.

    Parameters
    ----------
    cascade : CascadeModel
        Detector.
    ii : IntegralImage
        Integral image of the grayscale frame.
    x, y : int
        Top left corner of the window.
    scale : float, optional
        Scale of the base window.

    Returns
    -------
    accepted : bool

    """
    window = window_size(cascade, scale)
    height, width = ii.shape
    if x < 0 or y < 0 or x + window > width or y + window > height:
        raise ShapeError(
            f'Window ({x}, {y}, {window}) exceeds the {width}x{height} image.',
        )
    return bool(_eval_window(
        ii.sums, ii.squared_sums, x, y, window, scale, *cascade.packed,
    ))


def scales(cascade, shape, scale_factor=DEFAULT_SCALE_FACTOR):
    """Return all scales `factor**k` whose window fits into the image."""
    if not scale_factor > 1:
        raise ConfigError(
            f'scale_factor needs to be > 1, got {scale_factor}.',
        )
    result, scale = [], 1.0
    while window_size(cascade, scale) <= min(shape):
        result.append(scale)
        scale *= scale_factor
    return result


def scan_windows(
    cascade,
    image,
    scale_factor=DEFAULT_SCALE_FACTOR,
    min_size=None,
    max_size=None,
    workers=1,
):
    """Return all accepted raw windows ordered by scale, row and column.

    Parameters
    ----------
    cascade : CascadeModel
        Detector.
    image : ndarray or IntegralImage
        Grayscale image `[H, W]`, RGB images are converted.
    scale_factor : float, optional
        Ratio of consecutive window sizes.
    min_size, max_size : int, optional
        Limits of the window edge length.
    workers : int, optional
        Number of threads scanning different scales.

    Returns
    -------
    windows : list of Detection

    """
    ii = image if isinstance(image, IntegralImage) else integral(
        to_grayscale(image),
    )
    jobs = []
    for scale in scales(cascade, ii.shape, scale_factor):
        window = window_size(cascade, scale)
        if min_size is not None and window < min_size:
            continue
        if max_size is not None and window > max_size:
            continue
        jobs.append((scale, window))

    def scan(job):
        scale, window = job
        step = window_step(scale)
        accepted = _scan(
            ii.sums, ii.squared_sums, window, step, scale, *cascade.packed,
        )
        rows, cols = np.nonzero(accepted)
        return [
            Detection(int(col * step), int(row * step), window, window)
            for row, col in zip(rows, cols)
        ]

    if workers > 1:
        with concurrent.futures.ThreadPoolExecutor(workers) as executor:
            per_scale = list(executor.map(scan, jobs))
    else:
        per_scale = [scan(job) for job in jobs]
    return [det for dets in per_scale for det in dets]


def group_detections(
    windows, min_neighbors=DEFAULT_MIN_NEIGHBORS, iou=GROUP_IOU,
):
    """Merge overlapping windows into detections.

    Windows with an IoU of at least `iou` are linked, linked windows form a
    cluster transitively. Each cluster yields its rounded mean box with the
    cluster size as neighbor count. Clusters with less than
    `min_neighbors` windows are dropped. For `min_neighbors <= 1` the raw
    windows are returned unmerged.

    Parameters
    ----------
    windows : list of Detection
        Raw accepted windows.
    min_neighbors : int, optional
        Minimal cluster size.
    iou : float, optional
        Linking threshold.

    Returns
    -------
    detections : list of Detection
        Sorted by position and size, independent of the input order.

    """
    if min_neighbors <= 1:
        return sorted(
            Detection(win.x, win.y, win.width, win.height) for win in windows
        )

    windows = sorted(windows)
    parents = list(range(len(windows)))

    def find(idx):
        while parents[idx] != idx:
            parents[idx] = parents[parents[idx]]
            idx = parents[idx]
        return idx

    for idx, window in enumerate(windows):
        for jdx in range(idx + 1, len(windows)):
            if window.iou(windows[jdx]) >= iou:
                parents[find(jdx)] = find(idx)

    clusters = {}
    for idx, window in enumerate(windows):
        clusters.setdefault(find(idx), []).append(window.box)

    detections = []
    for boxes in clusters.values():
        if len(boxes) < min_neighbors:
            continue
        x, y, width, height = np.rint(np.mean(boxes, axis=0)).astype(int)
        detections.append(Detection(
            int(x), int(y), int(width), int(height), len(boxes),
        ))
    return sorted(detections)


def detect_multiscale(
    cascade,
    image,
    scale_factor=DEFAULT_SCALE_FACTOR,
    min_neighbors=DEFAULT_MIN_NEIGHBORS,
    min_size=None,
    max_size=None,
    workers=1,
):
    """Detect faces at all scales.

    The base window grows by `scale_factor` per scale until it exceeds the
    image. At scale `s` the window has edge `int(base * s)` and slides with
    step `max(1, round(s))`.

    Parameters
    ----------
    cascade : CascadeModel
        Detector.
    image : ndarray
        Grayscale `[H, W]` or RGB `[H, W, 3]` image.
    scale_factor : float, optional
        Ratio of consecutive window sizes.
    min_neighbors : int, optional
        Minimal number of merged windows per detection.
    min_size, max_size : int, optional
        Limits of the window edge length.
    workers : int, optional
        Number of threads scanning different scales.

    Returns
    -------
    detections : list of Detection

    """
    windows = scan_windows(
        cascade,
        image,
        scale_factor=scale_factor,
        min_size=min_size,
        max_size=max_size,
        workers=workers,
    )
    detections = group_detections(windows, min_neighbors=min_neighbors)
    logger.debug(
        '%d raw windows grouped into %d detections.',
        len(windows),
        len(detections),
    )
    return detections


def expand_box(detection, margin, shape):
    """Grow a box by `margin` of its size per side, clamped to the image.

    Returns
    -------
    x0, y0, x1, y1 : int
        Corners of the crop, `x1` and `y1` exclusive.

    """
    height, width = shape[:2]
    dx = int(round(margin * detection.width))
    dy = int(round(margin * detection.height))
    return (
        max(detection.x - dx, 0),
        max(detection.y - dy, 0),
        min(detection.x + detection.width + dx, width),
        min(detection.y + detection.height + dy, height),
    )


def crop_faces(image, detections, margin=0.0):
    """Crop the detected boxes.

    Parameters
    ----------
    image : ndarray
        Frame of shape `[H, W]` or `[H, W, 3]`.
    detections : list of Detection
        Boxes within the frame.
    margin : float, optional
        Fraction of the box size added on every side.

    Returns
    -------
    crops : list of ndarray
        One crop per non-degenerate detection, ready for preprocessing.

    """
    if margin < 0:
        raise ConfigError(f'margin needs to be >= 0, got {margin}.')
    image = np.asarray(image)
    crops = []
    for detection in detections:
        x0, y0, x1, y1 = expand_box(detection, margin, image.shape)
        if x1 <= x0 or y1 <= y0:
            logger.warning('Skipping degenerate detection %s.', detection)
            continue
        crops.append(image[y0:y1, x0:x1].copy())
    return crops
