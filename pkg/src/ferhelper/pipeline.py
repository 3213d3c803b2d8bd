# -*- coding: utf-8 -*-
# BSD 3-Clause License
# Copyright (c) 2024, ferhelper developers
# All rights reserved.
"""# Frame Annotation

This submodule runs the face detector and the classifier on a directory of
frames. Every frame is written as `<stem>_annotated.png` with a box, the
predicted emotion and the class scores per face, and one CSV row per face
reports all six scores.

"""
import concurrent.futures
import dataclasses
import functools
import logging
import os

import numpy as np

from ferhelper import io
from ferhelper.data.imageio import (
    decode_image,
    encode_image,
    to_grayscale,
    to_rgb,
)
from ferhelper.data.labels import CLASS_NAMES, N_CLASSES
from ferhelper.data.manifest import IMAGE_EXTENSIONS
from ferhelper.data.transforms import PreprocessConfig, preprocess
from ferhelper.detect.detector import (
    DEFAULT_MIN_NEIGHBORS,
    DEFAULT_SCALE_FACTOR,
    Detection,
    crop_faces,
    detect_multiscale,
    expand_box,
)
from ferhelper.evaluate import ScoreRecord
from ferhelper.exceptions import ConfigError, ContractError, DecodeError
from ferhelper.tensor import Tensor
from ferhelper.utils import render
from ferhelper.xai import colorize_overlay, grad_cam, upsample_bilinear

logger = logging.getLogger(__name__)

FRAME_COLUMNS = (
    'frame',
    'face_idx',
    'x',
    'y',
    'w',
    'h',
    'pred',
    *(f'score_{idx}' for idx in range(N_CLASSES)),
    'status',
)
BOX_COLOR = (255, 0, 0)
BAR_COLOR = (255, 255, 0)
TEXT_COLOR = (255, 255, 255)
BOX_THICKNESS = 2
BAR_LENGTH = 40


@dataclasses.dataclass(frozen=True)
class AnnotateOptions:
    """Settings of [annotate_frames][ferhelper.pipeline.annotate_frames].

    Parameters
    ----------
    scale_factor : float
        Ratio of consecutive detector window sizes.
    min_neighbors : int
        Minimal number of merged windows per face.
    min_size : int
        Smallest window edge length in pixels.
    margin : float
        Fraction of the box size added on every side before cropping.
    gradcam : bool
        Blend the Grad-CAM of the predicted class into each box.
    alpha : float
        Weight of the Grad-CAM overlay.
    smooth_window : int
        Number of frames the displayed top emotion is held.
    score_bars : bool
        Draw the class scores in percent next to each box.

    """

    scale_factor: float = DEFAULT_SCALE_FACTOR
    min_neighbors: int = DEFAULT_MIN_NEIGHBORS
    min_size: int = None
    margin: float = 0.0
    gradcam: bool = False
    alpha: float = 0.5
    smooth_window: int = 5
    score_bars: bool = True

    def __post_init__(self):
        if not self.scale_factor > 1:
            raise ConfigError('scale_factor needs to be > 1.')
        if self.margin < 0:
            raise ConfigError('margin needs to be >= 0.')
        if not 0 <= self.alpha <= 1:
            raise ConfigError('alpha needs to be in [0, 1].')
        if self.smooth_window < 1:
            raise ConfigError('smooth_window needs to be >= 1.')

    def to_dict(self):
        """Return a JSON serializable dictionary."""
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, options):
        """Create from a dictionary."""
        try:
            return cls(**options)
        except TypeError as err:
            raise ConfigError(f'Invalid annotate options: {err}') from err


@dataclasses.dataclass(frozen=True)
class FaceResult:
    """Classification of a single detected face."""

    detection: Detection
    record: ScoreRecord
    cam: object = None


@dataclasses.dataclass(frozen=True)
class FrameResult:
    """All faces of a single frame.

    `status` is `ok` for frames with faces, `no_face` or `decode_error`
    otherwise.

    """

    index: int
    path: str
    faces: tuple = ()
    status: str = 'ok'

    @property
    def top_emotion(self):
        """Return the prediction of the largest face, `None` without face."""
        if not self.faces:
            return None
        largest = max(self.faces, key=lambda face: face.detection.area)
        return largest.record.pred

    def to_rows(self):
        """Return the CSV rows, at least one per frame."""
        if not self.faces:
            return [{'frame': self.index, 'status': self.status}]
        rows = []
        for face_idx, face in enumerate(self.faces):
            x, y, width, height = face.detection.box
            rows.append({
                'frame': self.index,
                'face_idx': face_idx,
                'x': x,
                'y': y,
                'w': width,
                'h': height,
                'pred': face.record.pred,
                **{
                    f'score_{idx}': score
                    for idx, score in enumerate(face.record.scores)
                },
                'status': face.record.status,
            })
        return rows


def smooth_top_emotion(predictions, window=5):
    """Hold the displayed emotion for `window` frames.

    At the last frame of each window the label switches to the most
    frequent prediction of that window, ties resolved to the lowest class
    id. Until the first window is complete the first available prediction
    is shown. Frames without prediction (`None`) are ignored in the vote.

    Parameters
    ----------
    predictions : list of int or None
        Top emotion per frame.
    window : int, optional
        Frames per window, 1 reproduces the predictions.

    Returns
    -------
    labels : list of int or None
        Displayed label per frame.

    """
    if not len(predictions):
        raise ContractError('Cannot smooth an empty prediction stream.')
    if window < 1:
        raise ConfigError(f'window needs to be >= 1, got {window}.')

    labels, current = [], None
    for idx, pred in enumerate(predictions):
        if current is None and pred is not None:
            current = pred
        if (idx + 1) % window == 0:
            votes = [
                vote for vote in predictions[idx + 1 - window:idx + 1]
                if vote is not None
            ]
            if votes:
                current = int(np.bincount(votes, minlength=N_CLASSES).argmax())
        labels.append(current)
    return labels


def list_frames(frames_dir):
    """Return the image files of a directory sorted by name."""
    if not os.path.isdir(frames_dir):
        raise ConfigError(f'{frames_dir} is not a directory.')
    return sorted(
        entry.name for entry in os.scandir(frames_dir)
        if entry.is_file() and
        os.path.splitext(entry.name)[1].lower() in IMAGE_EXTENSIONS
    )


def cascade_detector(cascade, options):
    """Return a detector callable `image -> list of Detection`."""
    return functools.partial(
        detect_multiscale,
        cascade,
        scale_factor=options.scale_factor,
        min_neighbors=options.min_neighbors,
        min_size=options.min_size,
    )


def _has_crop(detection, margin, grid):
    x0, y0, x1, y1 = expand_box(detection, margin, np.shape(grid))
    return x1 > x0 and y1 > y0


def classify_faces(model, grid, detections, preprocess_cfg, margin=0.0):
    """Classify the crops of all valid detections of a frame.

    Returns
    -------
    detections : list of Detection
        Detections with a non-empty crop, in the order of `probs`.
    inputs : list of Tensor
        Model inputs of the crops.
    probs : ndarray
        Softmax scores `[n, 6]`.

    """
    valid = [
        det for det in detections
        if det.width > 0 and det.height > 0 and _has_crop(det, margin, grid)
    ]
    if len(valid) < len(detections):
        logger.warning(
            'Skipping %d degenerate detections.', len(detections) - len(valid),
        )
    crops = crop_faces(grid, valid, margin=margin)
    if not crops:
        return [], [], np.empty((0, N_CLASSES))
    inputs = [preprocess(crop, preprocess_cfg) for crop in crops]
    probs, _ = model.predict(Tensor(np.stack([x.numpy() for x in inputs])))
    return valid, inputs, probs


def _score_record(path, probs):
    return ScoreRecord(
        path=path,
        pred=int(np.argmax(probs)),
        scores=tuple(float(score) for score in probs),
    )


def process_frame(model, path, index, detector, preprocess_cfg, options):
    """Detect and classify the faces of one frame file."""
    name = os.path.basename(path)
    try:
        grid = decode_image(path)
    except DecodeError as err:
        logger.warning('%s', err)
        return FrameResult(index, name, status='decode_error'), None

    detections = detector(to_grayscale(grid))
    detections, inputs, probs = classify_faces(
        model, grid, detections, preprocess_cfg, margin=options.margin,
    )
    faces = tuple(
        FaceResult(det, _score_record(name, prob))
        for det, prob in zip(detections, probs)
    )
    status = 'ok' if faces else 'no_face'
    return FrameResult(index, name, faces, status), (grid, inputs)


def _blend_cam(canvas, detection, cam, alpha):
    x, y, width, height = detection.box
    x1 = min(x + width, canvas.shape[1])
    y1 = min(y + height, canvas.shape[0])
    if x1 <= x or y1 <= y:
        return
    values = upsample_bilinear(cam.values, size=(y1 - y, x1 - x))
    canvas[y:y1, x:x1] = colorize_overlay(canvas[y:y1, x:x1], values, alpha)


def _draw_score_bars(canvas, detection, scores):
    line_height = render.GLYPH_HEIGHT + 2
    x = detection.x + detection.width + 4
    for idx, (name, score) in enumerate(zip(CLASS_NAMES, scores)):
        y = detection.y + idx * line_height
        text = f'{name[:3]} {int(round(100 * score)):3d}%'
        render.draw_text(canvas, text, x, y, TEXT_COLOR)
        bar_x = x + render.text_size(text)[0] + 2
        render.fill_rect(
            canvas,
            bar_x,
            y + 1,
            int(round(BAR_LENGTH * score)),
            render.GLYPH_HEIGHT - 2,
            BAR_COLOR,
        )


def render_frame(grid, result, label=None, options=None):
    """Draw boxes, labels and optional score bars onto a frame.

    Parameters
    ----------
    grid : ndarray
        Decoded frame.
    result : FrameResult
        Faces of the frame, possibly with Grad-CAM maps.
    label : int, optional
        Smoothed top emotion stamped at the top left corner.
    options : AnnotateOptions, optional
        Rendering options.

    Returns
    -------
    image : ndarray
        RGB image `[H, W, 3]`. Frames without faces are returned unchanged.

    """
    options = AnnotateOptions() if options is None else options
    canvas = to_rgb(grid).copy()
    if not result.faces:
        return canvas
    for face in result.faces:
        det = face.detection
        if face.cam is not None:
            _blend_cam(canvas, det, face.cam, options.alpha)
        render.draw_rect(
            canvas, det.x, det.y, det.width, det.height, BOX_COLOR,
            thickness=BOX_THICKNESS,
        )
        name = CLASS_NAMES[face.record.pred]
        text_y = det.y - render.GLYPH_HEIGHT - 2
        if text_y < 0:
            text_y = det.y + BOX_THICKNESS + 1
        render.draw_text(canvas, name, det.x, text_y, BOX_COLOR)
        if options.score_bars:
            _draw_score_bars(canvas, det, face.record.scores)
    if label is not None:
        render.draw_text(canvas, CLASS_NAMES[label], 2, 2, TEXT_COLOR)
    return canvas


def write_frame_results(results, file_name):
    """Write the frame CSV `frame,face_idx,x,y,w,h,pred,score_*,status`."""
    rows = [row for result in results for row in result.to_rows()]
    frame = io.records_frame(
        rows,
        FRAME_COLUMNS,
        int_columns=('face_idx', 'x', 'y', 'w', 'h', 'pred'),
    )
    io.savecsv(file_name, frame)


def annotate_frames(
    frames_dir,
    model,
    output_dir,
    cascade=None,
    options=None,
    preprocess_cfg=None,
    detector=None,
    workers=1,
):
    """Annotate every frame of a directory.

    Frames are processed in order of their file names. A frame without
    faces is copied unchanged and reported with status `no_face`, an
    unreadable frame with status `decode_error`.

    Parameters
    ----------
    frames_dir : str
        Directory with frame images.
    model : Model
        Trained classifier.
    output_dir : str
        Directory of the annotated frames and of `frames.csv`.
    cascade : CascadeModel, optional
        Face detector, required unless `detector` is given.
    options : AnnotateOptions, optional
        Detection and rendering settings.
    preprocess_cfg : PreprocessConfig, optional
        Preprocessing the model was trained with.
    detector : callable, optional
        Replaces the cascade, maps a grayscale frame to a list of
        Detection.
    workers : int, optional
        Number of threads detecting and classifying frames.

    Returns
    -------
    results : list of FrameResult
        One result per frame in frame order.

    """
    options = AnnotateOptions() if options is None else options
    if preprocess_cfg is None:
        preprocess_cfg = PreprocessConfig()
    if detector is None:
        if cascade is None:
            raise ConfigError('Either a cascade or a detector is required.')
        detector = cascade_detector(cascade, options)

    names = list_frames(frames_dir)
    model.eval()

    def process(item):
        index, name = item
        return process_frame(
            model,
            os.path.join(frames_dir, name),
            index,
            detector,
            preprocess_cfg,
            options,
        )

    if workers > 1:
        with concurrent.futures.ThreadPoolExecutor(workers) as executor:
            processed = list(executor.map(process, enumerate(names)))
    else:
        processed = [process(item) for item in enumerate(names)]

    results = []
    for result, payload in processed:
        if options.gradcam and result.faces:
            _, inputs = payload
            result = dataclasses.replace(result, faces=tuple(
                dataclasses.replace(face, cam=grad_cam(model, x_face))
                for face, x_face in zip(result.faces, inputs)
            ))
        results.append(result)

    labels = smooth_top_emotion(
        [result.top_emotion for result in results], options.smooth_window,
    ) if results else []

    os.makedirs(output_dir, exist_ok=True)
    for result, label, (_, payload) in zip(results, labels, processed):
        if payload is None:
            continue
        grid, _ = payload
        stem = os.path.splitext(result.path)[0]
        encode_image(
            render_frame(grid, result, label=label, options=options),
            os.path.join(output_dir, f'{stem}_annotated.png'),
        )
    write_frame_results(results, os.path.join(output_dir, 'frames.csv'))
    logger.info('Annotated %d frames.', len(results))
    return results
