# -*- coding: utf-8 -*-
# BSD 3-Clause License
# Copyright (c) 2024, ferhelper developers
# All rights reserved.
"""Declarative architecture descriptions."""
import dataclasses

from ferhelper.data.labels import N_CLASSES
from ferhelper.exceptions import ConfigError

FAMILIES = ('gimefive', 'resnet18', 'resnet34', 'vgg16bn')
POOLINGS = ('avg', 'max')
MAX_CONV_BLOCKS = 6


@dataclasses.dataclass(frozen=True)
class ModelSpec:
    """Architecture of a classifier.

    Parameters
    ----------
    family : str
        One of `gimefive`, `resnet18`, `resnet34`, `vgg16bn`.
    conv_blocks : int
        Number of GiMeFive conv blocks, channels double from 64 per block.
    use_se : bool
        Place a squeeze-and-excitation block in the first conv block.
    use_dropout : bool
        Insert dropout after the pooling layers and the first FC layer.
    num_classes : int
        Number of emotion classes, fixed to 6.
    input_shape : tuple of int
        Shape `(channels, height, width)` of a single image.
    fc_layers : int
        Depth of the GiMeFive classifier head, 1 to 3.
    batch_norm : bool
        Use batch normalization in the GiMeFive conv blocks.
    pooling : str
        Global pooling before the head, `avg` or `max`.
    conv_dropout : float
        Dropout rate after the pooling layers of blocks 1 to n-1.
    fc_dropout : float
        Dropout rate after the first FC layer.
    se_reduction : int
        Reduction ratio of the squeeze-and-excitation block.
    seed : int
        Seed of the weight initialization.

    """

    family: str = 'gimefive'
    conv_blocks: int = 5
    use_se: bool = False
    use_dropout: bool = True
    num_classes: int = N_CLASSES
    input_shape: tuple = (3, 64, 64)
    fc_layers: int = 3
    batch_norm: bool = True
    pooling: str = 'avg'
    conv_dropout: float = 0.2
    fc_dropout: float = 0.5
    se_reduction: int = 16
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(
            self, 'input_shape', tuple(int(dim) for dim in self.input_shape),
        )
        if self.family not in FAMILIES:
            raise ConfigError(
                f'Unknown family {self.family!r}, use one of {FAMILIES}.',
            )
        if self.num_classes != N_CLASSES:
            raise ConfigError(
                f'num_classes is fixed to {N_CLASSES}, got '
                f'{self.num_classes}.',
            )
        if len(self.input_shape) != 3 or self.input_shape[0] != 3:
            raise ConfigError(
                f'input_shape needs to be (3, H, W), got {self.input_shape}.',
            )
        _, height, width = self.input_shape
        if height != width:
            raise ConfigError(
                f'Input needs to be square, got {height}x{width}.',
            )
        if not 1 <= self.conv_blocks <= MAX_CONV_BLOCKS:
            raise ConfigError(
                f'conv_blocks needs to be in [1, {MAX_CONV_BLOCKS}], got '
                f'{self.conv_blocks}.',
            )
        if height % self.n_downsamplings:
            raise ConfigError(
                f'Input size {height} is not divisible by '
                f'{self.n_downsamplings}.',
            )
        if self.fc_layers not in {1, 2, 3}:
            raise ConfigError(
                f'fc_layers needs to be 1, 2 or 3, got {self.fc_layers}.',
            )
        if self.pooling not in POOLINGS:
            raise ConfigError(f'pooling needs to be one of {POOLINGS}.')
        for rate in (self.conv_dropout, self.fc_dropout):
            if not 0 <= rate < 1:
                raise ConfigError(
                    f'Dropout rates need to be in [0, 1), got {rate}.',
                )
        if self.use_se and 64 % self.se_reduction:
            raise ConfigError(
                '64 channels are not divisible by reduction '
                f'{self.se_reduction}.',
            )

    @property
    def n_downsamplings(self):
        """Return the total spatial downsampling factor of the torso."""
        if self.family == 'gimefive':
            return 2**self.conv_blocks
        return 32

    @property
    def channels(self):
        """Return the output channels of the GiMeFive conv blocks."""
        return tuple(64 * 2**idx for idx in range(self.conv_blocks))

    def to_dict(self):
        """Return a JSON serializable dictionary."""
        spec = dataclasses.asdict(self)
        spec['input_shape'] = list(self.input_shape)
        return spec

    @classmethod
    def from_dict(cls, spec):
        """Create from a dictionary, e.g. parsed from checkpoint metadata."""
        known = {field.name for field in dataclasses.fields(cls)}
        unknown = set(spec) - known
        if unknown:
            raise ConfigError(f'Unknown ModelSpec fields {sorted(unknown)}.')
        return cls(**spec)

    def replace(self, **changes):
        """Return a copy with the given fields replaced."""
        return dataclasses.replace(self, **changes)


ARCHITECTURES = {
    'gimefive13': ModelSpec(conv_blocks=4, use_dropout=False),
    'gimefive15': ModelSpec(conv_blocks=5),
    'gimefive16': ModelSpec(conv_blocks=5, use_se=True),
    'gimefive17': ModelSpec(conv_blocks=6),
    'resnet18': ModelSpec(family='resnet18'),
    'resnet34': ModelSpec(family='resnet34'),
    'vgg16bn': ModelSpec(family='vgg16bn'),
}
ARCHITECTURES['baseline13'] = ARCHITECTURES['gimefive13']


def get_spec(arch):
    """Return the ModelSpec of a named architecture.

    Parameters
    ----------
    arch : str or ModelSpec
        Name from `ARCHITECTURES` or a spec which is returned unchanged.

    Returns
    -------
    spec : ModelSpec

    """
    if isinstance(arch, ModelSpec):
        return arch
    try:
        return ARCHITECTURES[arch]
    except KeyError:
        raise ConfigError(
            f'Unknown architecture {arch!r}, use one of '
            f'{sorted(ARCHITECTURES)}.',
        ) from None
