# -*- coding: utf-8 -*-
# BSD 3-Clause License
# Copyright (c) 2024, ferhelper developers
# All rights reserved.
"""Set of helpful test functions."""
import decorit
import numpy as np

from ferhelper.tensor import Tensor, backward, mul, no_grad, tensor_sum


def relative_error(actual, desired):
    """Return `|a - b| / max(1, |a|, |b|)` elementwise."""
    actual = np.asarray(actual, dtype=np.float64)
    desired = np.asarray(desired, dtype=np.float64)
    scale = np.maximum(1, np.maximum(np.abs(actual), np.abs(desired)))
    return np.abs(actual - desired) / scale


def numerical_gradient(fn, array, h=1e-5, indices=None):
    """Central finite differences of a scalar function.

    Parameters
    ----------
    fn : callable
        Function without arguments returning a float. It needs to read
        `array`, which is perturbed in place.
    array : ndarray
        Point of differentiation, restored afterwards.
    h : float, optional
        Step size.
    indices : iterable of tuple, optional
        Elements to differentiate, all if `None`. The others stay zero.

    Returns
    -------
    grad : ndarray
        Numerical gradient of the shape of `array`.

    """
    grad = np.zeros(array.shape, dtype=np.float64)
    if indices is None:
        indices = np.ndindex(*array.shape)
    for idx in indices:
        orig = array[idx]
        array[idx] = orig + h
        upper = fn()
        array[idx] = orig - h
        lower = fn()
        array[idx] = orig
        grad[idx] = (upper - lower) / (2 * h)
    return grad


def _sample_indices(shape, n_samples, rng):
    size = int(np.prod(shape))
    if n_samples is None or n_samples >= size:
        return list(np.ndindex(*shape))
    flat = rng.choice(size, size=n_samples, replace=False)
    return list(zip(*np.unravel_index(np.sort(flat), shape)))


@decorit.alias('gradcheck')
def gradient_check(fn, inputs, h=1e-5, seed=0, n_samples=None):
    """Compare autodiff gradients with central finite differences.

    Non-scalar outputs are reduced to a scalar by a fixed random
    projection. Run inside `default_dtype(np.float64)` with 64-bit inputs
    for meaningful tolerances. For large inputs `n_samples` restricts the
    comparison to a seeded random subset of elements per input.

    Parameters
    ----------
    fn : callable
        Maps the input tensors to an output tensor.
    inputs : Tensor or list of Tensor
        Points of differentiation, `requires_grad` is enabled.
    h : float, optional
        Step size of the finite differences.
    seed : int, optional
        Seed of the random projection and of the sampled elements.
    n_samples : int, optional
        Number of compared elements per input, all if `None`.

    Returns
    -------
    error : float
        Maximal relative error over all compared elements.

    """
    inputs = [inputs] if isinstance(inputs, Tensor) else list(inputs)
    for tensor in inputs:
        tensor.requires_grad = True
        tensor.grad = None

    output = fn(*inputs)
    weights = None
    if output.size != 1:
        rng = np.random.default_rng(seed)
        weights = Tensor(rng.standard_normal(output.shape), dtype=output.dtype)

    def reduce(out):
        return out if weights is None else tensor_sum(mul(out, weights))

    backward(reduce(output))
    analytic = [
        np.zeros(tensor.shape) if tensor.grad is None else tensor.grad.copy()
        for tensor in inputs
    ]

    max_error = 0.0
    sample_rng = np.random.default_rng(seed)
    with no_grad():
        for tensor, grad in zip(inputs, analytic):
            indices = _sample_indices(tensor.shape, n_samples, sample_rng)
            numeric = numerical_gradient(
                lambda: reduce(fn(*inputs)).item(),
                tensor.data,
                h=h,
                indices=indices,
            )
            checked = tuple(np.array(indices, dtype=int).T)
            max_error = max(
                max_error,
                float(relative_error(grad[checked], numeric[checked]).max()),
            )
    return max_error


def is_probability_rows(probs, atol=1e-6):
    """Check if every row is non-negative and sums to one.

    Parameters
    ----------
    probs : ndarray
        Matrix of shape `[n, k]`.
    atol : float, optional
        Absolute tolerance of the row sums.

    Returns
    -------
    is_probability_rows : bool

    """
    probs = np.atleast_2d(probs)
    return bool(
        (probs >= 0).all() and
        np.allclose(probs.sum(axis=-1), 1, rtol=0, atol=atol)
    )


def is_normalized_map(values):
    """Check if a map lies in `[0, 1]` with peak 1 or is identically 0."""
    values = np.asarray(values)
    if values.min() < 0 or values.max() > 1:
        return False
    return bool(values.max() == 1 or not values.any())
