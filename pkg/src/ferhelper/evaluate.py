# -*- coding: utf-8 -*-
# BSD 3-Clause License
# Copyright (c) 2024, ferhelper developers
# All rights reserved.
"""# Evaluation

This submodule contains the accuracy and confusion matrix of a classifier
on a manifest, the export of per-image softmax scores and the rendering of
the confusion matrix as heatmap image.

"""
import concurrent.futures
import dataclasses
import logging
import os

import numpy as np

from ferhelper import io
from ferhelper.data.imageio import encode_image
from ferhelper.data.labels import CLASS_NAMES, N_CLASSES
from ferhelper.data.loader import load_sample
from ferhelper.data.manifest import CLASS_FOLDER, IMAGE_EXTENSIONS
from ferhelper.data.transforms import PreprocessConfig
from ferhelper.exceptions import DecodeError, ManifestError, ShapeError
from ferhelper.tensor import Tensor
from ferhelper.utils import render

logger = logging.getLogger(__name__)

SCORE_COLUMNS = (
    'path',
    'label',
    'pred',
    *(f'score_{name}' for name in CLASS_NAMES),
    'status',
)
MIN_CELL_SIZE = 32


class ConfusionMatrix:
    """Counts of true (rows) versus predicted (columns) classes."""
    __slots__ = ('counts',)

    def __init__(self, counts=None):
        if counts is None:
            counts = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
        counts = np.array(counts, dtype=np.int64)
        if counts.shape != (N_CLASSES, N_CLASSES):
            raise ShapeError(
                f'Confusion matrix needs shape {(N_CLASSES, N_CLASSES)}, got '
                f'{counts.shape}.',
            )
        if np.any(counts < 0):
            raise ValueError('Confusion matrix counts need to be >= 0.')
        self.counts = counts

    @property
    def total(self):
        """Return number of samples."""
        return int(self.counts.sum())

    @property
    def accuracy(self):
        """Return `trace / total`, NaN for an empty matrix."""
        if not self.total:
            return float('nan')
        return float(np.trace(self.counts) / self.total)

    @property
    def per_class_accuracy(self):
        """Return the diagonal divided by the row sums, NaN for empty rows."""
        row_sums = self.counts.sum(axis=1)
        with np.errstate(invalid='ignore', divide='ignore'):
            return np.diag(self.counts) / row_sums

    def __add__(self, other):
        """Merge counts of two matrices."""
        if not isinstance(other, ConfusionMatrix):
            return NotImplemented
        return ConfusionMatrix(self.counts + other.counts)

    def __eq__(self, other):
        """Compare counts."""
        if not isinstance(other, ConfusionMatrix):
            return NotImplemented
        return np.array_equal(self.counts, other.counts)

    __hash__ = None

    def __repr__(self):
        """Return representation of class."""
        return f'{self.__class__.__name__}({self.counts.tolist()})'


def confusion_matrix(labels, predictions):
    """Count pairs of true labels and predictions.

    Parameters
    ----------
    labels, predictions : array_like of int
        Class ids in `[0, 5]` of equal length.

    Returns
    -------
    cm : ConfusionMatrix

    """
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    predictions = np.asarray(predictions, dtype=np.int64).reshape(-1)
    if labels.shape != predictions.shape:
        raise ShapeError(
            f'Got {len(labels)} labels but {len(predictions)} predictions.',
        )
    counts = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    np.add.at(counts, (labels, predictions), 1)
    return ConfusionMatrix(counts)


def _load_all(paths, preprocess, workers, cache):
    def load(path):
        try:
            return load_sample(path, preprocess, mode='eval', cache=cache)
        except DecodeError as err:
            logger.warning('%s', err)
            return None

    if workers > 1:
        with concurrent.futures.ThreadPoolExecutor(workers) as executor:
            return list(executor.map(load, paths))
    return [load(path) for path in paths]


def _predict_paths(model, paths, preprocess, batch_size, workers, cache=None):
    """Return probabilities per path, `None` for undecodable files."""
    probs = [None] * len(paths)
    for start in range(0, len(paths), batch_size):
        chunk = list(range(start, min(start + batch_size, len(paths))))
        samples = _load_all(
            [paths[idx] for idx in chunk], preprocess, workers, cache,
        )
        valid = [
            idx for idx, sample in zip(chunk, samples) if sample is not None
        ]
        if not valid:
            continue
        batch = np.stack([
            sample for sample in samples if sample is not None
        ])
        batch_probs, _ = model.predict(Tensor(batch))
        for idx, prob in zip(valid, batch_probs):
            probs[idx] = prob
    return probs


def predict_manifest(
    model, manifest, preprocess=None, batch_size=32, workers=1, cache=None,
):
    """Predict every row of a manifest in eval mode.

    Rows whose image cannot be decoded are logged and left out.

    Parameters
    ----------
    model : Model
        Classifier providing `predict`.
    manifest : DatasetManifest
        Rows to evaluate.
    preprocess : PreprocessConfig, optional
        Preprocessing, augmentations are not applied.
    batch_size : int, optional
        Number of images per forward pass.
    workers : int, optional
        Number of threads loading images.
    cache : dict, optional
        Decoded pixel grids by path.

    Returns
    -------
    labels : ndarray
        True labels of the decoded rows.
    predictions : ndarray
        Predicted labels of the decoded rows.
    probs : ndarray
        Softmax scores of shape `[n, 6]`.
    failed : list of str
        Paths which could not be decoded.

    """
    if not len(manifest):
        raise ManifestError('Cannot evaluate an empty manifest.')
    preprocess = PreprocessConfig() if preprocess is None else preprocess
    paths = [manifest.resolve(path) for path in manifest.paths]
    probs = _predict_paths(
        model, paths, preprocess, batch_size, workers, cache,
    )
    decoded = np.array([prob is not None for prob in probs])
    failed = [path for path, ok in zip(manifest.paths, decoded) if not ok]
    if not decoded.any():
        return (
            np.empty(0, dtype=np.int64),
            np.empty(0, dtype=np.int64),
            np.empty((0, N_CLASSES)),
            failed,
        )
    probs = np.stack([prob for prob in probs if prob is not None])
    return (
        manifest.labels[decoded],
        probs.argmax(axis=1),
        probs,
        failed,
    )


def evaluate(model, manifest, preprocess=None, batch_size=32, workers=1):
    """Accuracy and confusion matrix of a model on a manifest.

    Parameters
    ----------
    model : Model
        Classifier, evaluated in eval mode.
    manifest : DatasetManifest
        Non-empty set of labeled images.
    preprocess : PreprocessConfig, optional
        Preprocessing the model was trained with.
    batch_size : int, optional
        Number of images per forward pass.
    workers : int, optional
        Number of threads loading images.

    Returns
    -------
    accuracy : float
        Fraction of correct predictions, equals `trace(cm) / cm.total`.
    cm : ConfusionMatrix

    """
    labels, preds, _, failed = predict_manifest(
        model, manifest, preprocess, batch_size=batch_size, workers=workers,
    )
    if failed:
        logger.warning('%d images could not be decoded.', len(failed))
    cm = confusion_matrix(labels, preds)
    return cm.accuracy, cm


@dataclasses.dataclass(frozen=True)
class ScoreRecord:
    """Classification scores of a single image."""

    path: str
    label: int = None
    pred: int = None
    scores: tuple = ()
    status: str = 'ok'

    def to_row(self):
        """Return the CSV row as dict."""
        scores = self.scores if self.scores else (None,) * N_CLASSES
        return {
            'path': self.path,
            'label': self.label,
            'pred': self.pred,
            **{
                f'score_{name}': score
                for name, score in zip(CLASS_NAMES, scores)
            },
            'status': self.status,
        }


def _list_images(folder):
    files = []
    for dirpath, dirnames, filenames in os.walk(folder):
        dirnames.sort()
        for filename in filenames:
            if os.path.splitext(filename)[1].lower() in IMAGE_EXTENSIONS:
                path = os.path.relpath(os.path.join(dirpath, filename), folder)
                files.append(path.replace(os.sep, '/'))
    return sorted(files)


def _label_from_path(path):
    parent = path.split('/')[0] if '/' in path else ''
    match = CLASS_FOLDER.match(parent)
    return None if match is None else int(match.group(1))


def score_folder(
    model, folder, output=None, preprocess=None, batch_size=32, workers=1,
):
    """Classify every image below a folder and export the softmax scores.

    Images are visited in lexicographic order of their relative paths. If
    an image lies in a class folder, e.g. `3_anger/img.jpg`, its label is
    reported as well. Undecodable files are kept with status
    `decode_error`.

    Parameters
    ----------
    model : Model
        Classifier providing `predict`.
    folder : str
        Directory with images.
    output : str, optional
        CSV file with the columns `path,label,pred,score_*,status`.
    preprocess : PreprocessConfig, optional
        Preprocessing the model was trained with.
    batch_size : int, optional
        Number of images per forward pass.
    workers : int, optional
        Number of threads loading images.

    Returns
    -------
    records : list of ScoreRecord

    """
    preprocess = PreprocessConfig() if preprocess is None else preprocess
    relpaths = _list_images(folder)
    probs = _predict_paths(
        model,
        [os.path.join(folder, path) for path in relpaths],
        preprocess,
        batch_size,
        workers,
    )
    records = []
    for path, prob in zip(relpaths, probs):
        label = _label_from_path(path)
        if prob is None:
            records.append(ScoreRecord(path, label, status='decode_error'))
            continue
        records.append(ScoreRecord(
            path,
            label,
            int(np.argmax(prob)),
            tuple(float(score) for score in prob),
        ))
    if output is not None:
        write_scores(records, output)
    return records


def write_scores(records, file_name):
    """Write score records to CSV."""
    rows = [record.to_row() for record in records]
    frame = io.records_frame(
        rows, SCORE_COLUMNS, int_columns=('label', 'pred'),
    )
    io.savecsv(file_name, frame)


def heatmap_image(cm, cell_size=MIN_CELL_SIZE):
    """Render a confusion matrix as gray value image.

    The intensity of a cell is its count divided by the row maximum. Each
    nonzero count is stamped centered in its cell, black on bright and
    white on dark cells.

    Parameters
    ----------
    cm : ConfusionMatrix
        Matrix to render.
    cell_size : int, optional
        Edge length of a cell in pixels, at least 32.

    Returns
    -------
    image : ndarray
        RGB image of shape `[6 * cell, 6 * cell, 3]`.

    """
    counts = cm.counts
    widest = max(render.text_size(str(int(counts.max())))[0] + 4, 0)
    cell = max(cell_size, MIN_CELL_SIZE, widest)
    row_max = counts.max(axis=1, keepdims=True)
    with np.errstate(invalid='ignore', divide='ignore'):
        intensity = np.where(row_max > 0, counts / row_max, 0)
    values = np.rint(255 * intensity).astype(np.uint8)

    cells = np.kron(values, np.ones((cell, cell), dtype=np.uint8))
    image = np.repeat(cells[..., np.newaxis], 3, axis=2)
    for (row, col), count in np.ndenumerate(counts):
        if not count:
            continue
        text = str(int(count))
        width, height = render.text_size(text)
        color = 0 if values[row, col] >= 128 else 255
        render.draw_text(
            image,
            text,
            col * cell + (cell - width) // 2,
            row * cell + (cell - height) // 2,
            color,
        )
    return image


def render_confusion_heatmap(cm, path, cell_size=MIN_CELL_SIZE):
    """Write the heatmap of a confusion matrix as PNG or PPM.

    Parameters
    ----------
    cm : ConfusionMatrix
        Matrix to render.
    path : str
        Output file, format given by the extension.
    cell_size : int, optional
        Edge length of a cell in pixels.

    """
    encode_image(heatmap_image(cm, cell_size=cell_size), path)
