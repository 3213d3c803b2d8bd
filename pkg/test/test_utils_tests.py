# -*- coding: utf-8 -*-
"""Tests for the tests submodule.

BSD 3-Clause License
Copyright (c) 2024, ferhelper developers
All rights reserved.

"""
import numpy as np
import pytest

from ferhelper import tensor
from ferhelper.utils import tests


def test_relative_error():
    """Test the scaling by the larger magnitude."""
    np.testing.assert_allclose(
        tests.relative_error([0, 200, 0.5], [0.5, 100, 0]),
        [0.5, 0.5, 0.5],
    )


def test_numerical_gradient():
    """Test finite differences of a quadratic form."""
    array = np.array([1.0, -2.0, 3.0])
    grad = tests.numerical_gradient(lambda: float(np.sum(array ** 2)), array)
    np.testing.assert_allclose(grad, 2 * array, rtol=1e-8)
    # point is restored
    np.testing.assert_array_equal(array, [1, -2, 3])


def test_gradient_check():
    """Test a correct and a broken backward pass."""
    with tensor.default_dtype(np.float64):
        x = tensor.Tensor(np.random.default_rng(0).standard_normal((3, 4)))
        assert tests.gradcheck(lambda y: tensor.mul(y, y), x) < 1e-6

        def wrong_grad(x):
            # gradient of the detached factor is missing
            return tensor.mul(x, tensor.Tensor(x.data.copy()))

        assert tests.gradient_check(wrong_grad, x) > 1e-2


def test_numerical_gradient_indices():
    """Test that only the requested elements are differentiated."""
    array = np.array([[1.0, -2.0], [3.0, 4.0]])
    grad = tests.numerical_gradient(
        lambda: float(np.sum(array ** 2)), array, indices=[(0, 1), (1, 0)],
    )
    np.testing.assert_allclose(grad, [[0, -4], [6, 0]], atol=1e-8)


def test_gradient_check_samples():
    """Test the comparison on a sampled subset of elements."""
    with tensor.default_dtype(np.float64):
        x = tensor.Tensor(np.random.default_rng(1).uniform(1, 2, (20, 30)))
        assert tests.gradient_check(
            lambda y: tensor.mul(y, y), x, n_samples=10,
        ) < 1e-6

        def wrong_grad(x):
            return tensor.mul(x, tensor.Tensor(x.data.copy()))

        assert tests.gradient_check(wrong_grad, x, n_samples=10) > 1e-2
        # more samples than elements compares everything
        assert tests.gradient_check(
            lambda y: tensor.mul(y, y), x, n_samples=10 ** 4,
        ) < 1e-6


@pytest.mark.parametrize('probs, expected', [
    ([[0.5, 0.5], [1, 0]], True),
    ([0.2, 0.8], True),
    ([[0.5, 0.6]], False),
    ([[1.5, -0.5]], False),
])
def test_is_probability_rows(probs, expected):
    """Test rows of probabilities."""
    assert tests.is_probability_rows(np.array(probs)) is expected


@pytest.mark.parametrize('values, expected', [
    (np.zeros((3, 3)), True),
    (np.eye(3), True),
    (0.5 * np.eye(3), False),
    (-np.eye(3), False),
    (2 * np.eye(3), False),
])
def test_is_normalized_map(values, expected):
    """Test maps scaled to a peak of one."""
    assert tests.is_normalized_map(values) is expected
