# -*- coding: utf-8 -*-
"""Tests for the optim module.

BSD 3-Clause License
Copyright (c) 2024, ferhelper developers
All rights reserved.

"""
import numpy as np
import pytest

from ferhelper.exceptions import ConfigError, ContractError
from ferhelper.tensor import Tensor
from ferhelper.train import optim


@pytest.mark.parametrize('w, grad, kwargs, expected', [
    (1.0, 1.0, {'lr': 0.1, 'momentum': 0, 'weight_decay': 0}, 0.9),
    (1.0, 0.0, {'lr': 1, 'momentum': 0, 'weight_decay': 1e-4}, 0.9999),
    (1.0, 5.0, {'lr': 0, 'momentum': 0.9, 'weight_decay': 1e-4}, 1.0),
])
def test_sgd_step(w, grad, kwargs, expected):
    """Test single update steps."""
    params, _ = optim.sgd_step(
        [np.array([w])], [np.array([grad])], [None], **kwargs,
    )
    np.testing.assert_allclose(params[0], [expected], rtol=1e-12)


def test_sgd_momentum():
    """Test the velocity recurrence over two steps."""
    params = [np.zeros(1)]
    velocities = [None]
    expected = [(-0.1, 1.0), (-0.29, 1.9)]
    for w_expected, v_expected in expected:
        params, velocities = optim.sgd_step(
            params,
            [np.ones(1)],
            velocities,
            lr=0.1,
            momentum=0.9,
            weight_decay=0,
        )
        np.testing.assert_allclose(params[0], [w_expected], rtol=1e-12)
        np.testing.assert_allclose(velocities[0], [v_expected], rtol=1e-12)


def test_sgd_optimizer():
    """Test that the optimizer updates the tensors in place."""
    weight = Tensor([1.0, 2.0], requires_grad=True)
    opt = optim.SGD([weight], lr=0.1, momentum=0.9, weight_decay=0)
    with pytest.raises(ContractError):
        opt.step()

    weight.grad = np.array([1.0, -1.0])
    opt.step()
    np.testing.assert_allclose(weight.numpy(), [0.9, 2.1], rtol=1e-6)
    opt.step()
    np.testing.assert_allclose(weight.numpy(), [0.71, 2.29], rtol=1e-6)
    opt.zero_grad()
    assert weight.grad is None


@pytest.mark.parametrize('name', optim.OPTIMIZERS)
def test_optimizers_descend(name):
    """Test that every optimizer decreases a quadratic."""
    weight = Tensor([3.0, -2.0], requires_grad=True)
    opt = optim.make_optimizer(name, [weight], lr=0.05, weight_decay=0)
    for _ in range(20):
        weight.grad = 2 * weight.numpy()
        opt.step()
    assert np.sum(weight.numpy()**2) < 13


def test_adam_first_step():
    """Test that the bias corrected first step has size lr."""
    weight = Tensor([1.0, 1.0], requires_grad=True)
    opt = optim.Adam([weight], lr=0.01)
    weight.grad = np.array([0.5, -3.0])
    opt.step()
    np.testing.assert_allclose(weight.numpy(), [0.99, 1.01], rtol=1e-5)


def test_adamw_decay():
    """Test the decoupled weight decay with a zero gradient."""
    weight = Tensor([2.0], requires_grad=True)
    opt = optim.AdamW([weight], lr=0.1, weight_decay=0.5)
    weight.grad = np.zeros(1)
    opt.step()
    np.testing.assert_allclose(weight.numpy(), [1.9], rtol=1e-6)

    weight = Tensor([2.0], requires_grad=True)
    opt = optim.Adam([weight], lr=0.1, weight_decay=0.5)
    weight.grad = np.zeros(1)
    opt.step()
    # coupled decay enters the normalized moment
    np.testing.assert_allclose(weight.numpy(), [1.9], rtol=1e-6)


def test_make_optimizer_errors():
    """Test invalid names and learning rates."""
    with pytest.raises(ConfigError):
        optim.make_optimizer('rmsprop', [], lr=0.1)
    with pytest.raises(ConfigError):
        optim.SGD([], lr=-1)
