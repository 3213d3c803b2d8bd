# -*- coding: utf-8 -*-
# BSD 3-Clause License
# Copyright (c) 2024, ferhelper developers
# All rights reserved.
"""Gradient based optimizers.

All optimizers update the parameter arrays in place and keep one state
array per parameter, which survives across steps.

"""
import numpy as np

from ferhelper.exceptions import ConfigError, ContractError

OPTIMIZERS = ('sgd', 'adam', 'adamw')


def sgd_step(params, grads, velocities, lr, momentum=0.9, weight_decay=1e-4):
    """Single step of SGD with momentum and coupled weight decay.

    For each parameter $w$ with gradient $g$ the update is
    $g \\leftarrow g + \\lambda w$, $v \\leftarrow \\mu v + g$ and
    $w \\leftarrow w - \\eta v$.

    Parameters
    ----------
    params : list of ndarray
        Parameter arrays, updated in place.
    grads : list of ndarray
        Gradients of the parameters.
    velocities : list of ndarray or None
        Velocity per parameter, `None` entries are initialized to zero.
    lr : float
        Learning rate $\\eta$.
    momentum : float, optional
        Momentum $\\mu$.
    weight_decay : float, optional
        Coupled L2 penalty $\\lambda$.

    Returns
    -------
    params : list of ndarray
        The updated parameters.
    velocities : list of ndarray
        The updated velocities.

    """
    new_velocities = []
    for idx, (param, grad, velocity) in enumerate(
        zip(params, grads, velocities),
    ):
        if grad is None:
            raise ContractError(f'Parameter {idx} has no gradient.')
        grad = grad + weight_decay * param if weight_decay else grad
        if velocity is None:
            velocity = np.array(grad, dtype=param.dtype)
        else:
            velocity *= momentum
            velocity += grad
        param -= lr * velocity
        new_velocities.append(velocity)
    return params, new_velocities


class Optimizer:
    """Base class holding the parameters and the learning rate."""

    def __init__(self, params, lr):
        if lr < 0:
            raise ConfigError(f'Learning rate needs to be >= 0, got {lr}.')
        self.params = list(params)
        self.lr = lr

    def zero_grad(self):
        """Reset all parameter gradients."""
        for param in self.params:
            param.zero_grad()

    def _grads(self):
        grads = [param.grad for param in self.params]
        for idx, grad in enumerate(grads):
            if grad is None:
                raise ContractError(
                    f'Parameter {idx} of shape {self.params[idx].shape} has '
                    'no gradient, call backward first.',
                )
        return grads

    def step(self):
        """Update the parameters, implemented by subclasses."""
        raise NotImplementedError


class SGD(Optimizer):
    """Stochastic gradient descent with momentum and coupled weight decay."""

    def __init__(self, params, lr=1e-3, momentum=0.9, weight_decay=1e-4):
        super().__init__(params, lr)
        self.momentum = momentum
        self.weight_decay = weight_decay
        self.velocities = [None] * len(self.params)

    def step(self):
        """Apply [sgd_step][ferhelper.train.optim.sgd_step]."""
        _, self.velocities = sgd_step(
            [param.data for param in self.params],
            self._grads(),
            self.velocities,
            lr=self.lr,
            momentum=self.momentum,
            weight_decay=self.weight_decay,
        )


class Adam(Optimizer):
    """Adam with coupled weight decay added to the gradient."""

    decoupled = False

    def __init__(
        self, params, lr=1e-3, betas=(0.9, 0.999), eps=1e-8, weight_decay=0,
    ):
        super().__init__(params, lr)
        self.betas = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self.n_steps = 0
        self.first_moments = [np.zeros_like(par.data) for par in self.params]
        self.second_moments = [np.zeros_like(par.data) for par in self.params]

    def step(self):
        """Update the moment estimates and the parameters."""
        grads = self._grads()
        self.n_steps += 1
        beta1, beta2 = self.betas
        correction1 = 1 - beta1**self.n_steps
        correction2 = 1 - beta2**self.n_steps
        for param, grad, mom1, mom2 in zip(
            self.params, grads, self.first_moments, self.second_moments,
        ):
            weights = param.data
            if self.weight_decay and self.decoupled:
                weights -= self.lr * self.weight_decay * weights
            elif self.weight_decay:
                grad = grad + self.weight_decay * weights
            mom1 *= beta1
            mom1 += (1 - beta1) * grad
            mom2 *= beta2
            mom2 += (1 - beta2) * grad**2
            weights -= self.lr * (mom1 / correction1) / (
                np.sqrt(mom2 / correction2) + self.eps
            )


class AdamW(Adam):
    """Adam with decoupled weight decay applied to the weights."""

    decoupled = True


def make_optimizer(name, params, lr, momentum=0.9, weight_decay=1e-4):
    """Create an optimizer by name.

    Parameters
    ----------
    name : str
        One of `sgd`, `adam`, `adamw`.
    params : list of Tensor
        Parameters to optimize.
    lr : float
        Learning rate.
    momentum : float, optional
        Momentum of SGD, ignored by Adam.
    weight_decay : float, optional
        L2 penalty, coupled for `sgd`/`adam` and decoupled for `adamw`.

    Returns
    -------
    optimizer : Optimizer

    """
    if name == 'sgd':
        return SGD(params, lr, momentum=momentum, weight_decay=weight_decay)
    if name == 'adam':
        return Adam(params, lr, weight_decay=weight_decay)
    if name == 'adamw':
        return AdamW(params, lr, weight_decay=weight_decay)
    raise ConfigError(f'Unknown optimizer {name!r}, use one of {OPTIMIZERS}.')
