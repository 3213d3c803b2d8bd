# -*- coding: utf-8 -*-
# BSD 3-Clause License
# Copyright (c) 2024, ferhelper developers
# All rights reserved.
"""Differentiable layer operations.

Each operation computes its forward pass with vectorized numpy and records a
single fused tape node with a hand-derived backward rule.

"""
import decorit
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import special

from ferhelper.exceptions import (
    ConfigError,
    DegenerateBatchError,
    LabelError,
    NumericInputError,
    ShapeError,
)
from ferhelper.tensor import Tensor, maximum, record, reshape

SPATIAL_AXES = (0, 2, 3)


def _check_rank(x, ndim, name):
    if x.ndim != ndim:
        raise ShapeError(
            f'{name} needs a rank-{ndim} tensor, got shape {x.shape}.',
        )


def _pad_spatial(data, padding, fill=0):
    if not padding:
        return data
    return np.pad(
        data,
        ((0, 0), (0, 0), (padding, padding), (padding, padding)),
        constant_values=fill,
    )


def _output_size(size, kernel, stride, padding):
    out = (size + 2 * padding - kernel) // stride + 1
    if out < 1:
        raise ShapeError(
            f'Input size {size} is too small for kernel {kernel} with padding '
            f'{padding}.',
        )
    return out


@decorit.alias('conv2d_forward')
def conv2d(x, weight, bias=None, stride=1, padding=1):
    """2D cross-correlation of a batch of images.

    The output is
    $y_{bo ij} = b_o + \\sum_{c, k, l} w_{ock l} x^{pad}_{b c, si+k, sj+l}$
    with zero padding. The GiMeFive blocks use the default 3x3 kernel with
    stride 1 and padding 1, preserving the spatial dimensions.

    Parameters
    ----------
    x : Tensor
        Input of shape `[B, C_in, H, W]`.
    weight : Tensor
        Kernel of shape `[C_out, C_in, kh, kw]`.
    bias : Tensor, optional
        Bias of shape `[C_out]`.
    stride : int, optional
        Step size of the sliding window.
    padding : int, optional
        Width of the zero padding on each side.

    Returns
    -------
    y : Tensor
        Output of shape `[B, C_out, H_out, W_out]`.

    """
    _check_rank(x, 4, 'conv2d')
    _check_rank(weight, 4, 'conv2d weight')
    n_batch, n_in, height, width = x.shape
    n_out, n_in_w, kh, kw = weight.shape
    if n_in != n_in_w:
        raise ShapeError(
            f'Input has {n_in} channels but the kernel expects {n_in_w}.',
        )
    if bias is not None and bias.shape != (n_out,):
        raise ShapeError(f'Bias needs shape ({n_out},), got {bias.shape}.')
    h_out = _output_size(height, kh, stride, padding)
    w_out = _output_size(width, kw, stride, padding)

    x_pad = _pad_spatial(x.data, padding)
    # [B, C_in, H_out, W_out, kh, kw]
    windows = sliding_window_view(x_pad, (kh, kw), axis=(2, 3))
    windows = windows[:, :, ::stride, ::stride][:, :, :h_out, :w_out]
    w_data = weight.data
    out = np.tensordot(windows, w_data, axes=([1, 4, 5], [1, 2, 3]))
    out = np.ascontiguousarray(out.transpose(0, 3, 1, 2))
    if bias is not None:
        out += bias.data[np.newaxis, :, np.newaxis, np.newaxis]

    def backward_rule(grad):
        grad_w = np.tensordot(grad, windows, axes=([0, 2, 3], [0, 2, 3]))
        # [B, H_out, W_out, C_in, kh, kw]
        cols = np.tensordot(grad, w_data, axes=([1], [0]))
        grad_pad = np.zeros_like(x_pad)
        for idx in range(kh):
            for jdx in range(kw):
                grad_pad[
                    :,
                    :,
                    idx:idx + stride * h_out:stride,
                    jdx:jdx + stride * w_out:stride,
                ] += cols[..., idx, jdx].transpose(0, 3, 1, 2)
        grad_x = grad_pad[
            :, :, padding:padding + height, padding:padding + width,
        ]
        grads = (grad_x, grad_w)
        if bias is not None:
            grads += (grad.sum(axis=SPATIAL_AXES),)
        return grads

    inputs = (x, weight) if bias is None else (x, weight, bias)
    return record(out, inputs, backward_rule, 'conv2d')


def batchnorm2d(
    x,
    gamma,
    beta,
    running_mean,
    running_var,
    training=True,
    momentum=0.1,
    eps=1e-5,
):
    """Batch normalization over the `(B, H, W)` axes of each channel.

    In training mode the batch statistics normalize the input and the
    running buffers are updated in place by an exponential moving average.
    The running variance tracks the unbiased batch variance. In evaluation
    mode the running buffers normalize the input.

    Parameters
    ----------
    x : Tensor
        Input of shape `[B, C, H, W]`.
    gamma, beta : Tensor
        Scale and shift of shape `[C]`.
    running_mean, running_var : Tensor
        Running statistics of shape `[C]`, updated in training mode.
    training : bool, optional
        Use batch statistics and update the running buffers.
    momentum : float, optional
        Weight of the current batch in the running average.
    eps : float, optional
        Added to the variance for numerical stability.

    Returns
    -------
    y : Tensor
        Normalized tensor of shape `[B, C, H, W]`.

    """
    _check_rank(x, 4, 'batchnorm2d')
    n_channels = x.shape[1]
    for par in (gamma, beta, running_mean, running_var):
        if par.shape != (n_channels,):
            raise ShapeError(
                f'Batchnorm parameters need shape ({n_channels},), got '
                f'{par.shape}.',
            )

    data = x.data
    n_values = data.shape[0] * data.shape[2] * data.shape[3]
    if training:
        if n_values < 2:
            raise DegenerateBatchError(
                'Batch statistics need at least two values per channel, got '
                f'input of shape {x.shape}.',
            )
        mean = data.mean(axis=SPATIAL_AXES)
        var = data.var(axis=SPATIAL_AXES)
        running_mean.data[...] = (
            (1 - momentum) * running_mean.data + momentum * mean
        )
        running_var.data[...] = (
            (1 - momentum) * running_var.data +
            momentum * var * n_values / (n_values - 1)
        )
    else:
        mean = running_mean.data.astype(data.dtype)
        var = running_var.data.astype(data.dtype)

    inv_std = (1 / np.sqrt(var + eps)).astype(data.dtype)
    inv_std = inv_std[np.newaxis, :, np.newaxis, np.newaxis]
    x_hat = (data - mean[np.newaxis, :, np.newaxis, np.newaxis]) * inv_std
    g_data = gamma.data[np.newaxis, :, np.newaxis, np.newaxis]
    out = g_data * x_hat + beta.data[np.newaxis, :, np.newaxis, np.newaxis]

    def backward_rule(grad):
        grad_gamma = (grad * x_hat).sum(axis=SPATIAL_AXES)
        grad_beta = grad.sum(axis=SPATIAL_AXES)
        grad_x_hat = grad * g_data
        if not training:
            return (grad_x_hat * inv_std, grad_gamma, grad_beta)
        grad_x = inv_std / n_values * (
            n_values * grad_x_hat -
            grad_x_hat.sum(axis=SPATIAL_AXES, keepdims=True) -
            x_hat * (grad_x_hat * x_hat).sum(axis=SPATIAL_AXES, keepdims=True)
        )
        return (grad_x, grad_gamma, grad_beta)

    return record(out, (x, gamma, beta), backward_rule, 'batchnorm2d')


def max_pool2d(x, kernel_size, stride=None, padding=0):
    """Window maximum with gradient routed to the first argmax.

    Parameters
    ----------
    x : Tensor
        Input of shape `[B, C, H, W]`.
    kernel_size : int
        Edge length of the square window.
    stride : int, optional
        Step size, defaults to `kernel_size`.
    padding : int, optional
        Width of the `-inf` padding on each side.

    Returns
    -------
    y : Tensor
        Pooled tensor of shape `[B, C, H_out, W_out]`.

    """
    _check_rank(x, 4, 'max_pool2d')
    stride = kernel_size if stride is None else stride
    n_batch, n_channels, height, width = x.shape
    h_out = _output_size(height, kernel_size, stride, padding)
    w_out = _output_size(width, kernel_size, stride, padding)

    x_pad = _pad_spatial(x.data, padding, fill=-np.inf)
    windows = sliding_window_view(
        x_pad, (kernel_size, kernel_size), axis=(2, 3),
    )[:, :, ::stride, ::stride][:, :, :h_out, :w_out]
    windows = windows.reshape(n_batch, n_channels, h_out, w_out, -1)
    # argmax returns the first maximum in row-major window order
    argmax = windows.argmax(axis=-1)
    out = np.take_along_axis(windows, argmax[..., np.newaxis], axis=-1)
    out = np.ascontiguousarray(out[..., 0])

    rows = (
        np.arange(h_out)[np.newaxis, np.newaxis, :, np.newaxis] * stride +
        argmax // kernel_size
    )
    cols = (
        np.arange(w_out)[np.newaxis, np.newaxis, np.newaxis, :] * stride +
        argmax % kernel_size
    )
    batch_idx = np.arange(n_batch)[:, np.newaxis, np.newaxis, np.newaxis]
    chan_idx = np.arange(n_channels)[np.newaxis, :, np.newaxis, np.newaxis]
    pad_shape = x_pad.shape

    def backward_rule(grad):
        grad_pad = np.zeros(pad_shape, dtype=grad.dtype)
        np.add.at(grad_pad, (batch_idx, chan_idx, rows, cols), grad)
        return (
            grad_pad[:, :, padding:padding + height, padding:padding + width],
        )

    return record(out, (x,), backward_rule, 'max_pool2d')


def maxpool2d(x):
    """Non-overlapping 2x2 max pooling halving both spatial dimensions."""
    _check_rank(x, 4, 'maxpool2d')
    if x.shape[2] % 2 or x.shape[3] % 2:
        raise ShapeError(
            f'maxpool2d needs even spatial dimensions, got {x.shape[2:]}.',
        )
    return max_pool2d(x, kernel_size=2, stride=2)


def adaptive_avg_pool_1x1(x):
    """Spatial mean of each feature map, output shape `[B, C, 1, 1]`."""
    _check_rank(x, 4, 'adaptive_avg_pool_1x1')
    shape = x.shape
    n_cells = shape[2] * shape[3]
    out = x.data.mean(axis=(2, 3), keepdims=True)
    return record(
        out,
        (x,),
        lambda grad: (np.broadcast_to(grad / n_cells, shape),),
        'adaptive_avg_pool_1x1',
    )


def adaptive_max_pool_1x1(x):
    """Spatial maximum of each feature map, output shape `[B, C, 1, 1]`."""
    _check_rank(x, 4, 'adaptive_max_pool_1x1')
    n_batch, n_channels, height, width = x.shape
    flat = x.data.reshape(n_batch, n_channels, -1)
    argmax = flat.argmax(axis=-1)[..., np.newaxis]
    out = np.take_along_axis(flat, argmax, axis=-1)

    def backward_rule(grad):
        grad_flat = np.zeros_like(flat, dtype=grad.dtype)
        np.put_along_axis(grad_flat, argmax, grad.reshape(argmax.shape), -1)
        return (grad_flat.reshape(n_batch, n_channels, height, width),)

    return record(
        out.reshape(n_batch, n_channels, 1, 1),
        (x,),
        backward_rule,
        'adaptive_max_pool_1x1',
    )


def flatten(x):
    """Collapse all but the batch dimension."""
    return reshape(x, (x.shape[0], int(np.prod(x.shape[1:]))))


def linear(x, weight, bias=None):
    """Fully connected layer $y = x W^T + b$.

    Parameters
    ----------
    x : Tensor
        Input of shape `[B, in]`.
    weight : Tensor
        Weights of shape `[out, in]`.
    bias : Tensor, optional
        Bias of shape `[out]`.

    Returns
    -------
    y : Tensor
        Output of shape `[B, out]`.

    """
    _check_rank(x, 2, 'linear')
    _check_rank(weight, 2, 'linear weight')
    if x.shape[1] != weight.shape[1]:
        raise ShapeError(
            f'Input of shape {x.shape} does not match weight {weight.shape}.',
        )
    if bias is not None and bias.shape != (weight.shape[0],):
        raise ShapeError(
            f'Bias needs shape ({weight.shape[0]},), got {bias.shape}.',
        )
    x_data, w_data = x.data, weight.data
    out = x_data @ w_data.T
    if bias is not None:
        out += bias.data

    def backward_rule(grad):
        grads = (grad @ w_data, grad.T @ x_data)
        if bias is not None:
            grads += (grad.sum(axis=0),)
        return grads

    inputs = (x, weight) if bias is None else (x, weight, bias)
    return record(out, inputs, backward_rule, 'linear')


def relu(x):
    """Rectified linear unit with subgradient 0 at 0."""
    return maximum(x, 0)


def sigmoid(x):
    """Logistic function $1 / (1 + e^{-x})$."""
    out = special.expit(x.data)
    return record(
        out, (x,), lambda grad: (grad * out * (1 - out),), 'sigmoid',
    )


def dropout(x, rate, training=True, rng=None):
    """Inverted dropout.

    In training mode each element is zeroed with probability `rate` and the
    survivors are scaled by `1 / (1 - rate)`, so the expectation is
    preserved. In evaluation mode the input is returned unchanged.

    Parameters
    ----------
    x : Tensor
        Input tensor.
    rate : float
        Drop probability in `[0, 1)`.
    training : bool, optional
        Apply the random mask.
    rng : numpy.random.Generator, optional
        Source of randomness. Required for reproducible masks.

    Returns
    -------
    y : Tensor

    """
    if not 0 <= rate < 1:
        raise ConfigError(f'Dropout rate needs to be in [0, 1), got {rate}.')
    if not training or rate == 0:
        return x
    if rng is None:
        rng = np.random.default_rng()
    mask = (rng.random(x.shape) >= rate).astype(x.dtype) / x.dtype.type(
        1 - rate,
    )
    return record(x.data * mask, (x,), lambda grad: (grad * mask,), 'dropout')


def _check_finite(z):
    if not np.all(np.isfinite(z.data)):
        raise NumericInputError('Logits contain NaN or infinite values.')


def softmax(z):
    """Row-wise softmax of logits `[B, n]`.

    Computes $S(z_i) = e^{z_i} / \\sum_j e^{z_j}$.

    The maximum logit is subtracted before exponentiating.

    """
    _check_finite(z)
    probs = special.softmax(z.data, axis=-1)

    def backward_rule(grad):
        inner = (grad * probs).sum(axis=-1, keepdims=True)
        return (probs * (grad - inner),)

    return record(probs, (z,), backward_rule, 'softmax')


def log_softmax(z):
    """Row-wise logarithm of the softmax, computed via log-sum-exp."""
    _check_finite(z)
    log_probs = special.log_softmax(z.data, axis=-1)

    def backward_rule(grad):
        return (grad - np.exp(log_probs) * grad.sum(axis=-1, keepdims=True),)

    return record(log_probs, (z,), backward_rule, 'log_softmax')


def cross_entropy(logits, labels):
    """Mean cross-entropy of `[B, n]` logits and integer class labels.

    The loss of a sample is $-\\log S(z)_{y}$, evaluated as the log-sum-exp of
    the logits minus the true logit. Non-finite logits produce a non-finite
    loss, which callers use to detect divergence.

    Parameters
    ----------
    logits : Tensor
        Raw class scores of shape `[B, n]`.
    labels : array_like of int
        True classes of shape `[B]` with values in `[0, n)`.

    Returns
    -------
    loss : Tensor
        Scalar tensor holding the batch mean.

    """
    _check_rank(logits, 2, 'cross_entropy')
    labels = np.asarray(labels)
    n_batch, n_classes = logits.shape
    if labels.shape != (n_batch,):
        raise ShapeError(
            f'Expected {n_batch} labels, got array of shape {labels.shape}.',
        )
    if not np.issubdtype(labels.dtype, np.integer):
        raise LabelError(f'Labels need to be integers, got {labels.dtype}.')
    if np.any(labels < 0) or np.any(labels >= n_classes):
        raise LabelError(
            f'Labels need to be in [0, {n_classes - 1}], got {labels}.',
        )

    with np.errstate(invalid='ignore'):
        log_probs = special.log_softmax(logits.data, axis=-1)
    rows = np.arange(n_batch)
    loss = np.asarray(
        -log_probs[rows, labels].mean(), dtype=logits.dtype,
    )

    def backward_rule(grad):
        grad_z = np.exp(log_probs)
        grad_z[rows, labels] -= 1
        return (grad_z * (grad / n_batch),)

    return record(loss, (logits,), backward_rule, 'cross_entropy')


def channel_scale(x, scale):
    """Multiply every feature map `x[b, c]` by the scalar `scale[b, c]`."""
    _check_rank(x, 4, 'channel_scale')
    if scale.shape != x.shape[:2]:
        raise ShapeError(
            f'Scale of shape {scale.shape} does not match input {x.shape}.',
        )
    x_data = x.data
    s_data = scale.data[:, :, np.newaxis, np.newaxis]
    return record(
        x_data * s_data,
        (x, scale),
        lambda grad: (grad * s_data, (grad * x_data).sum(axis=(2, 3))),
        'channel_scale',
    )


def se_block(
    x, reduction, fc1_weight, fc2_weight, fc1_bias=None, fc2_bias=None,
):
    """Squeeze-and-excitation gating of the channels of `x`.

    The squeeze is the spatial mean of each channel, the excitation is
    `linear(C -> C/r) -> relu -> linear(C/r -> C) -> sigmoid` and the output
    is `x` scaled channel-wise by the excitation.

    Parameters
    ----------
    x : Tensor
        Input of shape `[B, C, H, W]`.
    reduction : int
        Channel reduction ratio `r`, `C` needs to be divisible by it.
    fc1_weight, fc2_weight : Tensor
        Weights of shape `[C/r, C]` and `[C, C/r]`.
    fc1_bias, fc2_bias : Tensor, optional
        Biases of shape `[C/r]` and `[C]`.

    Returns
    -------
    y : Tensor
        Recalibrated tensor of shape `[B, C, H, W]`.

    """
    _check_rank(x, 4, 'se_block')
    n_channels = x.shape[1]
    if reduction < 1 or n_channels % reduction:
        raise ConfigError(
            f'{n_channels} channels are not divisible by reduction '
            f'{reduction}.',
        )
    squeeze = flatten(adaptive_avg_pool_1x1(x))
    hidden = relu(linear(squeeze, fc1_weight, fc1_bias))
    excitation = sigmoid(linear(hidden, fc2_weight, fc2_bias))
    return channel_scale(x, excitation)


def one_hot(labels, n_classes, dtype=None):
    """Return a constant `[B, n]` tensor with ones at the label positions."""
    labels = np.asarray(labels)
    data = np.zeros((labels.size, n_classes))
    data[np.arange(labels.size), labels.reshape(-1)] = 1
    return Tensor(data, dtype=dtype)
