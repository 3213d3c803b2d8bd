# -*- coding: utf-8 -*-
# BSD 3-Clause License
# Copyright (c) 2024, ferhelper developers
# All rights reserved.
"""Builders of the GiMeFive family and the reference networks.

All models are a sequence of named stages. GiMeFive models consist of
`conv{k}` stages (conv, batch norm, optional squeeze-and-excitation, relu)
followed by `pool{k}` stages (2x2 max pooling, optional dropout) and a final
`head` (global pooling and the fully connected classifier). The output of
the `conv{k}` stages can be captured, which is used by Grad-CAM.

"""
import decorit
import numpy as np

from ferhelper.exceptions import ConfigError, ShapeError
from ferhelper.models.spec import ModelSpec, get_spec
from ferhelper.nn import functional as F  # noqa: N812
from ferhelper.nn.layers import (
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
    n_parameters,
)
from ferhelper.tensor import no_grad

RESNET_DEPTHS = {
    'resnet18': (2, 2, 2, 2),
    'resnet34': (3, 4, 6, 3),
}
VGG16_BLOCKS = (
    (64, 64),
    (128, 128),
    (256, 256, 256),
    (512, 512, 512),
    (512, 512, 512),
)


class Model(Module):
    """Classifier mapping `[B, 3, H, W]` images to `[B, 6]` logits."""

    def __init__(self, spec):
        super().__init__()
        self.spec = spec
        self.activations = {}

    @property
    def stage_names(self):
        """Return the names of all stages in execution order."""
        return list(self._modules)

    @property
    def mode(self):
        """Return `train` or `eval`."""
        return 'train' if self.training else 'eval'

    @property
    def cam_layer(self):
        """Return the stage used for Grad-CAM or `None` if there is none."""
        if self.spec.family != 'gimefive':
            return None
        return f'conv{self.spec.conv_blocks}'

    def forward(self, x, capture=()):
        """Compute the logits.

        Parameters
        ----------
        x : Tensor
            Batch of images of shape `[B, *input_shape]`.
        capture : iterable of str, optional
            Names of stages whose outputs are stored in `activations`.

        Returns
        -------
        logits : Tensor
            Raw class scores of shape `[B, 6]`.

        """
        if x.ndim != 4 or tuple(x.shape[1:]) != self.spec.input_shape:
            raise ShapeError(
                f'Expected input of shape [B, {self.spec.input_shape}], got '
                f'{x.shape}.',
            )
        capture = set(capture)
        unknown = capture - set(self._modules)
        if unknown:
            raise ConfigError(f'Unknown stages {sorted(unknown)}.')

        self.activations = {}
        for name, stage in self._modules.items():
            x = stage(x)
            if name in capture:
                self.activations[name] = x
        return x

    def forward_from(self, stage, activation):
        """Resume the forward pass after the stage `stage`.

        Parameters
        ----------
        stage : str
            Name of the stage which produced `activation`.
        activation : Tensor
            Output of that stage.

        Returns
        -------
        logits : Tensor

        """
        names = self.stage_names
        if stage not in names:
            raise ConfigError(f'Unknown stage {stage!r}, use one of {names}.')
        x = activation
        for name in names[names.index(stage) + 1:]:
            x = self._modules[name](x)
        return x

    def __call__(self, x, capture=()):
        """Alias of forward."""
        return self.forward(x, capture=capture)

    def predict(self, x):
        """Return softmax probabilities and predicted labels.

        The model is evaluated in eval mode without recording a tape, the
        previous mode is restored afterwards.

        Parameters
        ----------
        x : Tensor
            Batch of images.

        Returns
        -------
        probs : ndarray
            Probabilities of shape `[B, 6]`.
        labels : ndarray
            Argmax of the logits.

        """
        was_training = self.training
        self.eval()
        try:
            with no_grad():
                logits = self.forward(x)
        finally:
            self.train(was_training)
        probs = F.softmax(logits).numpy()
        return probs, logits.numpy().argmax(axis=1)

    def reseed(self, seed):
        """Reset the generator shared by all dropout layers."""
        rng = np.random.default_rng(seed)
        for _, module in self.named_modules():
            if isinstance(module, Dropout):
                module.rng = rng


@decorit.alias('n_params')
def count_parameters(model):
    """Return the number of trainable parameters.

    Batch normalization running statistics are buffers and not counted.

    Parameters
    ----------
    model : Module
        Model or single layer.

    Returns
    -------
    n_params : int

    """
    return n_parameters(model)


def build(spec):
    """Instantiate a model.

    Parameters
    ----------
    spec : ModelSpec or str
        Architecture description or name of `ARCHITECTURES`.

    Returns
    -------
    model : Model
        Model in training mode with weights initialized from `spec.seed`.

    """
    spec = get_spec(spec)
    if not isinstance(spec, ModelSpec):
        raise ConfigError(f'Expected a ModelSpec, got {type(spec)}.')
    rng = np.random.default_rng(spec.seed)
    model = Model(spec)
    if spec.family == 'gimefive':
        _build_gimefive(model, spec, rng)
    elif spec.family in RESNET_DEPTHS:
        _build_resnet(model, spec, rng)
    else:
        _build_vgg16bn(model, spec, rng)
    model.reseed(spec.seed)
    return model.train()


def _build_gimefive(model, spec, rng):
    in_channels = spec.input_shape[0]
    channels = spec.channels
    for idx, out_channels in enumerate(channels, 1):
        modules = [Conv2d(in_channels, out_channels, rng=rng)]
        names = ['conv']
        if spec.batch_norm:
            modules.append(BatchNorm2d(out_channels))
            names.append('bn')
        if spec.use_se and idx == 1:
            modules.append(SEBlock(
                out_channels, spec.se_reduction, bias=False, rng=rng,
            ))
            names.append('se')
        modules.append(ReLU())
        names.append('relu')
        model.add_module(f'conv{idx}', Sequential(*modules, names=names))

        pool = [MaxPool2d()]
        pool_names = ['pool']
        if spec.use_dropout and idx < len(channels):
            pool.append(Dropout(spec.conv_dropout))
            pool_names.append('dropout')
        model.add_module(f'pool{idx}', Sequential(*pool, names=pool_names))
        in_channels = out_channels

    model.add_module('head', _classifier(spec, channels[-1], rng))


def _classifier(spec, n_features, rng):
    widths = {
        1: [n_features],
        2: [n_features, 2 * n_features],
        3: [n_features, 2 * n_features, n_features],
    }[spec.fc_layers]
    modules = [GlobalPool(spec.pooling)]
    names = ['pool']
    for idx, (n_in, n_out) in enumerate(zip(widths, widths[1:]), 1):
        modules.extend([Linear(n_in, n_out, rng=rng), ReLU()])
        names.extend([f'fc{idx}', f'relu{idx}'])
        if spec.use_dropout and idx == 1:
            modules.append(Dropout(spec.fc_dropout))
            names.append(f'dropout{idx}')
    modules.append(Linear(widths[-1], spec.num_classes, rng=rng))
    names.append(f'fc{len(widths)}')
    return Sequential(*modules, names=names)


def _build_resnet(model, spec, rng):
    in_channels = spec.input_shape[0]
    model.add_module('stem', Sequential(
        Conv2d(in_channels, 64, 7, 2, 3, bias=False, rng=rng),
        BatchNorm2d(64),
        ReLU(),
        MaxPool2d(3, 2, 1),
        names=['conv', 'bn', 'relu', 'pool'],
    ))
    in_channels = 64
    for idx, n_blocks in enumerate(RESNET_DEPTHS[spec.family]):
        out_channels = 64 * 2**idx
        stride = 1 if idx == 0 else 2
        blocks = []
        for jdx in range(n_blocks):
            blocks.append(BasicBlock(
                in_channels, out_channels, stride if jdx == 0 else 1, rng=rng,
            ))
            in_channels = out_channels
        model.add_module(f'layer{idx + 1}', Sequential(*blocks))
    model.add_module('head', Sequential(
        GlobalPool(spec.pooling),
        Linear(512, spec.num_classes, rng=rng),
        names=['pool', 'fc'],
    ))


def _build_vgg16bn(model, spec, rng):
    in_channels = spec.input_shape[0]
    for idx, block in enumerate(VGG16_BLOCKS, 1):
        modules, names = [], []
        for jdx, out_channels in enumerate(block, 1):
            modules.extend([
                Conv2d(in_channels, out_channels, rng=rng),
                BatchNorm2d(out_channels),
                ReLU(),
            ])
            names.extend([f'conv{jdx}', f'bn{jdx}', f'relu{jdx}'])
            in_channels = out_channels
        modules.append(MaxPool2d())
        names.append('pool')
        model.add_module(f'block{idx}', Sequential(*modules, names=names))

    modules = [GlobalPool(spec.pooling)]
    names = ['pool']
    widths = (512, 4096, 4096)
    for idx, (n_in, n_out) in enumerate(zip(widths, widths[1:]), 1):
        modules.extend([Linear(n_in, n_out, rng=rng), ReLU()])
        names.extend([f'fc{idx}', f'relu{idx}'])
        if spec.use_dropout:
            modules.append(Dropout(spec.fc_dropout))
            names.append(f'dropout{idx}')
    modules.append(Linear(widths[-1], spec.num_classes, rng=rng))
    names.append('fc3')
    model.add_module('head', Sequential(*modules, names=names))
