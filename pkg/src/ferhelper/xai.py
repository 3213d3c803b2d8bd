# -*- coding: utf-8 -*-
# BSD 3-Clause License
# Copyright (c) 2024, ferhelper developers
# All rights reserved.
"""# Explainability

This submodule contains Grad-CAM heatmaps of the last GiMeFive conv block,
layer activation maps and their rendering as overlays on the input image.

Warm colors (red, yellow) mark high activations, cool colors (blue, green)
low ones.

"""
import dataclasses

import numpy as np
from scipy import ndimage

from ferhelper.data.imageio import to_grayscale, to_rgb
from ferhelper.data.labels import N_CLASSES, ClassLabel, to_label
from ferhelper.data.transforms import resize_bilinear
from ferhelper.exceptions import ConfigError, ShapeError, UnsupportedModelError
from ferhelper.nn.functional import one_hot
from ferhelper.tensor import Tensor, backward, mul, no_grad, tensor_sum
from ferhelper.utils import render

# blue, green, yellow, red at equidistant stops
COLORMAP_STOPS = np.array([0, 1 / 3, 2 / 3, 1])
COLORMAP_COLORS = np.array([
    [0, 0, 255],
    [0, 255, 0],
    [255, 255, 0],
    [255, 0, 0],
])


@dataclasses.dataclass(frozen=True)
class CamMap:
    """Class activation map with values in `[0, 1]`.

    Parameters
    ----------
    values : ndarray
        Map of shape `[h, w]`, either the native conv resolution or
        upsampled to the input resolution. The maximum is 1 unless the map
        is identically 0.
    target_class : ClassLabel
        Class whose logit was explained.
    weighted_sum : ndarray, optional
        Gradient weighted channel sum before the ReLU.

    """

    values: np.ndarray
    target_class: ClassLabel
    weighted_sum: np.ndarray = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ShapeError(f'CamMap needs a 2D grid, got {values.shape}.')
        if values.size and (values.min() < 0 or values.max() > 1):
            raise ValueError('CamMap values need to be in [0, 1].')
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'target_class', to_label(self.target_class))

    @property
    def shape(self):
        """Return the grid shape."""
        return self.values.shape


def normalize_max(values):
    """Divide by the maximum, return zeros if the maximum is not positive."""
    values = np.asarray(values, dtype=np.float64)
    peak = values.max()
    if peak <= 0:
        return np.zeros_like(values)
    return values / peak


def compute_cam(activations, gradients):
    """Weight feature maps by their spatially averaged gradients.

    Parameters
    ----------
    activations : ndarray
        Feature maps `A` of shape `[K, h, w]`.
    gradients : ndarray
        Gradients of the target logit with respect to `A`, same shape.

    Returns
    -------
    cam : ndarray
        `ReLU(sum_k alpha_k A_k)` divided by its maximum, `[h, w]`.
    weighted_sum : ndarray
        `sum_k alpha_k A_k` before the ReLU.

    """
    activations = np.asarray(activations, dtype=np.float64)
    gradients = np.asarray(gradients, dtype=np.float64)
    if activations.ndim != 3 or activations.shape != gradients.shape:
        raise ShapeError(
            'Activations and gradients need equal shape [K, h, w], got '
            f'{activations.shape} and {gradients.shape}.',
        )
    weights = gradients.mean(axis=(1, 2))
    weighted_sum = np.tensordot(weights, activations, axes=1)
    return normalize_max(np.maximum(weighted_sum, 0)), weighted_sum


def _check_single_image(model, x):
    x = x if isinstance(x, Tensor) else Tensor(x)
    if x.ndim == 3:
        x = x.reshape((1, *x.shape))
    if x.shape[0] != 1 or tuple(x.shape[1:]) != model.spec.input_shape:
        raise ShapeError(
            f'Expected a single image of shape {model.spec.input_shape}, got '
            f'{x.shape}.',
        )
    return x


def grad_cam(model, x, target='auto', layer=None):
    """Grad-CAM of a single image.

    The activations `A` of `layer` are computed without tape, then the
    forward pass is resumed from a leaf copy of `A` and the raw logit of
    the target class is backpropagated. The channel weights are the
    spatial means of the gradients. The parameter gradients of the model
    are the same before and after the call.

    Parameters
    ----------
    model : Model
        GiMeFive model, evaluated in eval mode.
    x : Tensor
        Image of shape `[1, 3, 64, 64]` or `[3, 64, 64]`.
    target : int, str or ClassLabel, optional
        Class to explain, `auto` takes the predicted class.
    layer : str, optional
        Stage to explain, defaults to the last conv block.

    Returns
    -------
    cam : CamMap
        Map in the native resolution of the layer.

    """
    layer = model.cam_layer if layer is None else layer
    if layer is None:
        raise UnsupportedModelError(
            f'Grad-CAM needs a gimefive model, got {model.spec.family}.',
        )
    x = _check_single_image(model, x)

    was_training = model.training
    # backward accumulates in place, so the caller's gradients are parked
    saved_grads = [(param, param.grad) for param in model.parameters()]
    model.zero_grad()
    model.eval()
    try:
        with no_grad():
            logits = model.forward(x, capture=(layer,))
        activation = model.activations[layer]
        if target == 'auto':
            target = int(logits.numpy().argmax())
        target = to_label(target)

        leaf = Tensor(
            activation.numpy().copy(),
            requires_grad=True,
            dtype=activation.dtype,
        )
        logits = model.forward_from(layer, leaf)
        score = tensor_sum(mul(
            logits, one_hot([int(target)], N_CLASSES, dtype=logits.dtype),
        ))
        backward(score)
        gradients = leaf.grad[0]
    finally:
        for param, grad in saved_grads:
            param.grad = grad
        model.train(was_training)

    cam, weighted_sum = compute_cam(leaf.numpy()[0], gradients)
    return CamMap(cam, target, weighted_sum)


def upsample_bilinear(cam, size=64):
    """Upsample a map with aligned corners.

    Every output pixel is a convex combination of input pixels, so the
    value range is preserved.

    Parameters
    ----------
    cam : CamMap or ndarray
        Map of shape `[h, w]`.
    size : int or tuple of int, optional
        Output edge length or `(rows, cols)`.

    Returns
    -------
    cam : CamMap or ndarray
        Upsampled map, same type as the input.

    """
    values = cam.values if isinstance(cam, CamMap) else np.asarray(cam)
    values = np.asarray(values, dtype=np.float64)
    n_rows, n_cols = (size, size) if np.ndim(size) == 0 else size
    rows = np.linspace(0, values.shape[0] - 1, n_rows)
    cols = np.linspace(0, values.shape[1] - 1, n_cols)
    grid = np.meshgrid(rows, cols, indexing='ij')
    upsampled = ndimage.map_coordinates(values, grid, order=1, mode='nearest')
    upsampled = np.clip(upsampled, values.min(), values.max())
    if not isinstance(cam, CamMap):
        return upsampled
    weighted_sum = cam.weighted_sum
    if weighted_sum is not None:
        weighted_sum = upsample_bilinear(weighted_sum, size=size)
    return CamMap(upsampled, cam.target_class, weighted_sum)


def colormap(values):
    """Map values in `[0, 1]` to RGB via blue, green, yellow and red.

    Parameters
    ----------
    values : ndarray
        Values of arbitrary shape, clipped to `[0, 1]`.

    Returns
    -------
    colors : ndarray
        uint8 array with a trailing RGB axis.

    """
    values = np.clip(np.asarray(values, dtype=np.float64), 0, 1)
    colors = np.stack(
        [
            np.interp(values, COLORMAP_STOPS, COLORMAP_COLORS[:, channel])
            for channel in range(3)
        ],
        axis=-1,
    )
    return np.rint(colors).astype(np.uint8)


def colorize_overlay(image, cam, alpha=0.5):
    """Blend an image with the colorized map.

    Parameters
    ----------
    image : ndarray
        RGB image `[H, W, 3]` with values 0-255.
    cam : CamMap or ndarray
        Map of shape `[H, W]` with values in `[0, 1]`.
    alpha : float, optional
        Weight of the colorized map.

    Returns
    -------
    overlay : ndarray
        `(1 - alpha) image + alpha color(cam)` as uint8.

    """
    if not 0 <= alpha <= 1:
        raise ConfigError(f'alpha needs to be in [0, 1], got {alpha}.')
    values = cam.values if isinstance(cam, CamMap) else np.asarray(cam)
    image = np.asarray(image)
    if image.shape != (*values.shape, 3):
        raise ShapeError(
            f'Image of shape {image.shape} does not match the map '
            f'{values.shape}.',
        )
    blended = (1 - alpha) * image + alpha * colormap(values)
    return np.clip(np.rint(blended), 0, 255).astype(np.uint8)


def layer_activation_map(model, x, stage):
    """Channel mean of a stage output, divided by its maximum.

    Parameters
    ----------
    model : Model
        Any model, evaluated in eval mode.
    x : Tensor
        Single image.
    stage : str
        Name of the stage, see `Model.stage_names`.

    Returns
    -------
    values : ndarray
        Map of shape `[h, w]` with values in `[0, 1]`.

    """
    x = _check_single_image(model, x)
    was_training = model.training
    model.eval()
    try:
        with no_grad():
            model.forward(x, capture=(stage,))
    finally:
        model.train(was_training)
    activation = model.activations[stage].numpy()[0]
    if activation.ndim != 3:
        raise ShapeError(f'Stage {stage!r} has no spatial output.')
    return normalize_max(np.maximum(activation.mean(axis=0), 0))


def display_image(grid, size=64):
    """Return the gray model view `[size, size, 3]` of a pixel grid."""
    return to_rgb(resize_bilinear(to_grayscale(grid), size))


def heatmap_image(cam, size=64):
    """Colorize the pre-ReLU weighted sum of a map, min-max scaled."""
    values = cam.weighted_sum if cam.weighted_sum is not None else cam.values
    if values.shape != (size, size):
        values = upsample_bilinear(values, size=size)
    span = values.max() - values.min()
    scaled = (values - values.min()) / span if span > 0 else values * 0
    return colormap(scaled)


def render_triptych(image, cam, alpha=0.5, gap=4):
    """Render original, heatmap and overlay side by side.

    The middle panel shows the gradient weighted channel sum before the
    ReLU, so negative evidence stays visible.

    Parameters
    ----------
    image : ndarray
        RGB image `[H, W, 3]` with `H == W`.
    cam : CamMap
        Map of the image, upsampled to `H` if needed.
    alpha : float, optional
        Weight of the overlay.
    gap : int, optional
        White pixels between the panels.

    Returns
    -------
    strip : ndarray
        uint8 image `[H, 3 W + 2 gap, 3]`.

    """
    size = image.shape[0]
    if cam.shape != (size, size):
        cam = upsample_bilinear(cam, size=size)
    return render.hstack(
        [image, heatmap_image(cam, size), colorize_overlay(image, cam, alpha)],
        gap=gap,
    )
