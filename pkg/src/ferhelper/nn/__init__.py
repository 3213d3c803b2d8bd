# -*- coding: utf-8 -*-
"""# Neural Network Operations

This submodule contains the building blocks of all classifiers.

- [**functional:**][ferhelper.nn.functional] Differentiable operations
  (convolution, batch normalization, pooling, dropout, softmax,
  cross-entropy, squeeze-and-excitation) each recorded as a single tape node.
- [**layers:**][ferhelper.nn.layers] Layer objects owning named parameters
  and buffers, including the residual basic block.

"""
__all__ = [
    'functional',
    'layers',
    'BasicBlock',
    'BatchNorm2d',
    'Conv2d',
    'Dropout',
    'GlobalPool',
    'Linear',
    'MaxPool2d',
    'Module',
    'ReLU',
    'SEBlock',
    'Sequential',
]

from . import functional, layers
from .layers import (
    BasicBlock,
    BatchNorm2d,
    Conv2d,
    Dropout,
    GlobalPool,
    Linear,
    MaxPool2d,
    Module,
    ReLU,
    SEBlock,
    Sequential,
)
