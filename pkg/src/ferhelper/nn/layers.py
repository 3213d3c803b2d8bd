# -*- coding: utf-8 -*-
# BSD 3-Clause License
# Copyright (c) 2024, ferhelper developers
# All rights reserved.
"""Layer objects owning named parameters and buffers."""
import numpy as np

from ferhelper.exceptions import ConfigError, ShapeError
from ferhelper.nn import functional as F  # noqa: N812
from ferhelper.tensor import Tensor


def kaiming_normal(shape, fan_in, rng):
    """Sample fan-in scaled normal weights with std $\\sqrt{2 / n_{in}}$."""
    std = np.sqrt(2 / fan_in)
    return Tensor(rng.normal(0, std, size=shape), requires_grad=True)


def _default_rng(rng):
    return np.random.default_rng(0) if rng is None else rng


class Module:
    """Base class of all layers.

    Parameters, buffers and child modules are registered explicitly and are
    iterated in registration order, which fixes the order of the checkpoint
    tensor directory.

    """

    def __init__(self):
        self.training = True
        self._parameters = {}
        self._buffers = {}
        self._modules = {}

    def __getattr__(self, name):
        """Look up registered parameters, buffers and modules."""
        for store in ('_parameters', '_buffers', '_modules'):
            registered = self.__dict__.get(store, {})
            if name in registered:
                return registered[name]
        raise AttributeError(
            f"'{self.__class__.__name__}' object has no attribute '{name}'",
        )

    def add_parameter(self, name, tensor):
        """Register a trainable tensor."""
        tensor.requires_grad = True
        self._parameters[name] = tensor
        return tensor

    def add_buffer(self, name, tensor):
        """Register a non-trainable state tensor."""
        self._buffers[name] = tensor
        return tensor

    def add_module(self, name, module):
        """Register a child module."""
        self._modules[name] = module
        return module

    def named_modules(self, prefix=''):
        """Yield `(name, module)` for this module and all descendants."""
        yield prefix, self
        for name, module in self._modules.items():
            yield from module.named_modules(_join(prefix, name))

    def named_parameters(self, prefix=''):
        """Yield `(name, tensor)` of all trainable tensors in order."""
        for name, tensor in self._parameters.items():
            yield _join(prefix, name), tensor
        for name, module in self._modules.items():
            yield from module.named_parameters(_join(prefix, name))

    def named_buffers(self, prefix=''):
        """Yield `(name, tensor)` of all state buffers in order."""
        for name, tensor in self._buffers.items():
            yield _join(prefix, name), tensor
        for name, module in self._modules.items():
            yield from module.named_buffers(_join(prefix, name))

    def parameters(self):
        """Return list of all trainable tensors."""
        return [tensor for _, tensor in self.named_parameters()]

    def buffers(self):
        """Return list of all state buffers."""
        return [tensor for _, tensor in self.named_buffers()]

    def train(self, mode=True):
        """Set training mode of this module and all descendants."""
        for _, module in self.named_modules():
            module.training = mode
        return self

    def eval(self):  # noqa: A003
        """Set evaluation mode."""
        return self.train(mode=False)

    def zero_grad(self):
        """Reset the gradients of all parameters."""
        for tensor in self.parameters():
            tensor.zero_grad()

    def astype(self, dtype):
        """Cast all parameters and buffers in place."""
        for _, tensor in self._tensors():
            tensor.data = tensor.data.astype(dtype)
            tensor.zero_grad()
        return self

    def state_dict(self):
        """Return ordered mapping of names to arrays, parameters first."""
        return {name: tensor.data for name, tensor in self._tensors()}

    def load_state(self, state):
        """Copy arrays of a state dict into the registered tensors."""
        tensors = dict(self._tensors())
        missing = set(tensors) ^ set(state)
        if missing:
            raise KeyError(f'State does not match module: {sorted(missing)}')
        for name, tensor in tensors.items():
            values = np.asarray(state[name])
            if values.shape != tensor.shape:
                raise ShapeError(
                    f'{name}: expected shape {tensor.shape}, got '
                    f'{values.shape}.',
                )
            tensor.data = values.astype(tensor.dtype)

    def forward(self, x):
        """Compute the output, implemented by subclasses."""
        raise NotImplementedError

    def __call__(self, x):
        """Alias of forward."""
        return self.forward(x)

    def _tensors(self):
        yield from self.named_parameters()
        yield from self.named_buffers()


def _join(prefix, name):
    return f'{prefix}.{name}' if prefix else name


class Sequential(Module):
    """Chain of modules applied in order."""

    def __init__(self, *modules, names=None):
        super().__init__()
        if names is None:
            names = [str(idx) for idx in range(len(modules))]
        for name, module in zip(names, modules):
            self.add_module(name, module)

    def forward(self, x):
        """Apply all children in order."""
        for module in self._modules.values():
            x = module(x)
        return x

    def __iter__(self):
        """Iterate over the children."""
        return iter(self._modules.values())

    def __len__(self):
        """Return number of children."""
        return len(self._modules)


class Conv2d(Module):
    """Convolution with kernel `[out_ch, in_ch, k, k]`."""

    def __init__(
        self,
        in_channels,
        out_channels,
        kernel_size=3,
        stride=1,
        padding=1,
        bias=True,
        rng=None,
    ):
        super().__init__()
        rng = _default_rng(rng)
        self.stride = stride
        self.padding = padding
        self.add_parameter('weight', kaiming_normal(
            (out_channels, in_channels, kernel_size, kernel_size),
            fan_in=in_channels * kernel_size**2,
            rng=rng,
        ))
        if bias:
            self.add_parameter('bias', Tensor(np.zeros(out_channels)))

    def forward(self, x):
        """Convolve the input."""
        return F.conv2d(
            x,
            self.weight,
            self._parameters.get('bias'),
            stride=self.stride,
            padding=self.padding,
        )


class BatchNorm2d(Module):
    """Batch normalization with running statistics."""

    def __init__(self, num_features, momentum=0.1, eps=1e-5):
        super().__init__()
        self.momentum = momentum
        self.eps = eps
        self.add_parameter('weight', Tensor(np.ones(num_features)))
        self.add_parameter('bias', Tensor(np.zeros(num_features)))
        self.add_buffer('running_mean', Tensor(np.zeros(num_features)))
        self.add_buffer('running_var', Tensor(np.ones(num_features)))

    def forward(self, x):
        """Normalize the input."""
        return F.batchnorm2d(
            x,
            self.weight,
            self.bias,
            self.running_mean,
            self.running_var,
            training=self.training,
            momentum=self.momentum,
            eps=self.eps,
        )


class Linear(Module):
    """Fully connected layer with weight `[out, in]`."""

    def __init__(self, in_features, out_features, bias=True, rng=None):
        super().__init__()
        rng = _default_rng(rng)
        self.add_parameter('weight', kaiming_normal(
            (out_features, in_features), fan_in=in_features, rng=rng,
        ))
        if bias:
            self.add_parameter('bias', Tensor(np.zeros(out_features)))

    def forward(self, x):
        """Apply the affine map."""
        return F.linear(x, self.weight, self._parameters.get('bias'))


class ReLU(Module):
    """Rectified linear unit."""

    def forward(self, x):
        """Clamp negative values."""
        return F.relu(x)


class Dropout(Module):
    """Inverted dropout drawing masks from a shared generator."""

    def __init__(self, rate, rng=None):
        super().__init__()
        if not 0 <= rate < 1:
            raise ConfigError(
                f'Dropout rate needs to be in [0, 1), got {rate}.',
            )
        self.rate = rate
        self.rng = _default_rng(rng)

    def forward(self, x):
        """Drop elements in training mode."""
        return F.dropout(x, self.rate, training=self.training, rng=self.rng)


class MaxPool2d(Module):
    """Window max pooling."""

    def __init__(self, kernel_size=2, stride=None, padding=0):
        super().__init__()
        self.kernel_size = kernel_size
        self.stride = stride
        self.padding = padding

    def forward(self, x):
        """Pool the input."""
        if (self.kernel_size, self.stride, self.padding) == (2, None, 0):
            return F.maxpool2d(x)
        return F.max_pool2d(x, self.kernel_size, self.stride, self.padding)


class GlobalPool(Module):
    """Global average or max pooling followed by flattening to `[B, C]`."""

    def __init__(self, mode='avg'):
        super().__init__()
        if mode not in {'avg', 'max'}:
            raise ConfigError(f'Pooling needs to be avg or max, not {mode!r}.')
        self.mode = mode

    def forward(self, x):
        """Pool each feature map to a single value."""
        if self.mode == 'avg':
            return F.flatten(F.adaptive_avg_pool_1x1(x))
        return F.flatten(F.adaptive_max_pool_1x1(x))


class SEBlock(Module):
    """Squeeze-and-excitation block with reduction ratio `r`."""

    def __init__(self, channels, reduction=16, bias=True, rng=None):
        super().__init__()
        if reduction < 1 or channels % reduction:
            raise ConfigError(
                f'{channels} channels are not divisible by reduction '
                f'{reduction}.',
            )
        rng = _default_rng(rng)
        self.reduction = reduction
        hidden = channels // reduction
        self.add_module('fc1', Linear(channels, hidden, bias=bias, rng=rng))
        self.add_module('fc2', Linear(hidden, channels, bias=bias, rng=rng))

    def forward(self, x):
        """Recalibrate the channels of the input."""
        return F.se_block(
            x,
            self.reduction,
            self.fc1.weight,
            self.fc2.weight,
            self.fc1._parameters.get('bias'),  # noqa: WPS437
            self.fc2._parameters.get('bias'),  # noqa: WPS437
        )


class BasicBlock(Module):
    """Residual unit of two 3x3 convolutions with an additive shortcut.

    A 1x1 projection with batch normalization replaces the identity shortcut
    if the block changes the stride or the number of channels.

    """

    def __init__(self, in_channels, out_channels, stride=1, rng=None):
        super().__init__()
        rng = _default_rng(rng)
        self.add_module('conv1', Conv2d(
            in_channels, out_channels, 3, stride, 1, bias=False, rng=rng,
        ))
        self.add_module('bn1', BatchNorm2d(out_channels))
        self.add_module('conv2', Conv2d(
            out_channels, out_channels, 3, 1, 1, bias=False, rng=rng,
        ))
        self.add_module('bn2', BatchNorm2d(out_channels))
        if stride != 1 or in_channels != out_channels:
            self.add_module('shortcut', Sequential(
                Conv2d(
                    in_channels,
                    out_channels,
                    1,
                    stride,
                    0,
                    bias=False,
                    rng=rng,
                ),
                BatchNorm2d(out_channels),
            ))

    def forward(self, x):
        """Compute `relu(F(x) + shortcut(x))`."""
        return residual_block(x, self)


def residual_block(x, block):
    """Apply a [BasicBlock][ferhelper.nn.layers.BasicBlock] to `x`."""
    out = F.relu(block.bn1(block.conv1(x)))
    out = block.bn2(block.conv2(out))
    shortcut = block._modules.get('shortcut')  # noqa: WPS437
    identity = x if shortcut is None else shortcut(x)
    if out.shape != identity.shape:
        raise ShapeError(
            f'Residual branch {out.shape} and shortcut {identity.shape} '
            'differ.',
        )
    return F.relu(out + identity)


def n_parameters(module):
    """Return the number of trainable scalars of a module."""
    return int(sum(tensor.size for tensor in module.parameters()))

