# -*- coding: utf-8 -*-
# BSD 3-Clause License
# Copyright (c) 2024, ferhelper developers
# All rights reserved.
"""Preprocessing of pixel grids to model input and data augmentation.

All augmentations operate on float arrays of shape `[C, H, W]` with values
in `[0, 1]` and draw their randomness from an explicit
[numpy.random.Generator][], so a fixed seed reproduces every sample.

"""
import dataclasses
import math

import numpy as np
from PIL import Image
from scipy import ndimage

from ferhelper.data.imageio import to_grayscale
from ferhelper.exceptions import ConfigError
from ferhelper.tensor import Tensor

TARGET_SIZE = 64
MODES = ('train', 'eval')


@dataclasses.dataclass(frozen=True)
class HFlip:
    """Mirror the width axis with probability `p`."""

    p: float = 0.5
    name = 'hflip'

    def __call__(self, x, rng):
        """Apply to `[C, H, W]` array."""
        if rng.random() < self.p:
            return x[:, :, ::-1].copy()
        return x


@dataclasses.dataclass(frozen=True)
class Rotation:
    """Bilinear rotation by a uniform angle in `[-max_deg, max_deg]`.

    Pixels rotated in from outside the image are zero.

    """

    max_deg: float = 10.0
    name = 'rotation'

    def __call__(self, x, rng):
        """Apply to `[C, H, W]` array."""
        angle = rng.uniform(-self.max_deg, self.max_deg)
        if angle == 0:
            return x
        return ndimage.rotate(
            x,
            angle,
            axes=(2, 1),
            reshape=False,
            order=1,
            mode='constant',
            cval=0,
        )


@dataclasses.dataclass(frozen=True)
class Crop:
    """Reflect-pad by `pad` pixels and cut a random window of input size."""

    pad: int = 4
    name = 'crop'

    def __call__(self, x, rng):
        """Apply to `[C, H, W]` array."""
        if self.pad == 0:
            return x
        _, height, width = x.shape
        padded = np.pad(
            x, ((0, 0), (self.pad, self.pad), (self.pad, self.pad)),
            mode='reflect',
        )
        top = rng.integers(0, 2 * self.pad + 1)
        left = rng.integers(0, 2 * self.pad + 1)
        return padded[:, top:top + height, left:left + width].copy()


@dataclasses.dataclass(frozen=True)
class Erasing:
    """Set a random rectangle to `value` with probability `p`.

    The rectangle covers a uniform fraction `area` of the image with an
    aspect ratio drawn log-uniformly from `ratio`.

    """

    p: float = 0.5
    area: tuple = (0.02, 0.2)
    ratio: tuple = (0.3, 3.3)
    value: float = 0.0
    name = 'erasing'

    max_attempts = 10

    def __call__(self, x, rng):
        """Apply to `[C, H, W]` array."""
        if rng.random() >= self.p:
            return x
        _, height, width = x.shape
        log_ratio = np.log(self.ratio)
        for _ in range(self.max_attempts):
            target = rng.uniform(*self.area) * height * width
            aspect = math.exp(rng.uniform(*log_ratio))
            erase_h = int(round(math.sqrt(target * aspect)))
            erase_w = int(round(math.sqrt(target / aspect)))
            if 0 < erase_h <= height and 0 < erase_w <= width:
                top = rng.integers(0, height - erase_h + 1)
                left = rng.integers(0, width - erase_w + 1)
                x = x.copy()
                x[:, top:top + erase_h, left:left + erase_w] = self.value
                return x
        return x


@dataclasses.dataclass(frozen=True)
class Brightness:
    """Add a uniform offset in `[-delta, delta]` with probability `p`."""

    delta: float = 0.2
    p: float = 0.5
    name = 'brightness'

    def __call__(self, x, rng):
        """Apply to `[C, H, W]` array."""
        if rng.random() >= self.p:
            return x
        return np.clip(x + rng.uniform(-self.delta, self.delta), 0, 1)


AUGMENTATIONS = {
    aug.name: aug for aug in (HFlip, Rotation, Crop, Erasing, Brightness)
}


def default_augmentations():
    """Return flip, rotation, crop and erasing with their default values."""
    return (HFlip(), Rotation(), Crop(), Erasing())


def augmentation_to_dict(aug):
    """Return JSON serializable description of an augmentation."""
    return {'name': aug.name, **dataclasses.asdict(aug)}


def augmentation_from_dict(desc):
    """Create an augmentation from its dictionary description."""
    desc = dict(desc)
    name = desc.pop('name', None)
    if name not in AUGMENTATIONS:
        raise ConfigError(
            f'Unknown augmentation {name!r}, use one of '
            f'{sorted(AUGMENTATIONS)}.',
        )
    for key, value in desc.items():
        if isinstance(value, list):
            desc[key] = tuple(value)
    try:
        return AUGMENTATIONS[name](**desc)
    except TypeError as err:
        raise ConfigError(f'Invalid parameters of {name}: {err}') from err


@dataclasses.dataclass(frozen=True)
class PreprocessConfig:
    """Preprocessing of decoded images to `[3, 64, 64]` model input.

    Parameters
    ----------
    target_size : int
        Edge length of the resized image, fixed to 64.
    grayscale_channels : int
        Number of channels the luma is replicated to.
    normalize_mean, normalize_std : tuple of float
        Per-channel normalization `(x - mean) / std` of `[0, 1]` values.
    augmentations : tuple
        Augmentations applied in training mode, in order.

    """

    target_size: int = TARGET_SIZE
    grayscale_channels: int = 3
    normalize_mean: tuple = (0.5, 0.5, 0.5)
    normalize_std: tuple = (0.5, 0.5, 0.5)
    augmentations: tuple = dataclasses.field(
        default_factory=default_augmentations,
    )

    def __post_init__(self):
        for key in ('normalize_mean', 'normalize_std', 'augmentations'):
            object.__setattr__(self, key, tuple(getattr(self, key)))
        if self.target_size != TARGET_SIZE:
            raise ConfigError(
                f'target_size is fixed to {TARGET_SIZE}, got '
                f'{self.target_size}.',
            )
        n_channels = self.grayscale_channels
        if len(self.normalize_mean) != n_channels:
            raise ConfigError(f'normalize_mean needs {n_channels} values.')
        if len(self.normalize_std) != n_channels:
            raise ConfigError(f'normalize_std needs {n_channels} values.')
        if any(std <= 0 for std in self.normalize_std):
            raise ConfigError('normalize_std needs to be positive.')
        for aug in self.augmentations:
            if type(aug) not in AUGMENTATIONS.values():
                raise ConfigError(f'Unknown augmentation {aug!r}.')

    def to_dict(self):
        """Return a JSON serializable dictionary."""
        return {
            'target_size': self.target_size,
            'grayscale_channels': self.grayscale_channels,
            'normalize_mean': list(self.normalize_mean),
            'normalize_std': list(self.normalize_std),
            'augmentations': [
                augmentation_to_dict(aug) for aug in self.augmentations
            ],
        }

    @classmethod
    def from_dict(cls, config):
        """Create from a dictionary, e.g. parsed from checkpoint metadata."""
        config = dict(config)
        config['augmentations'] = tuple(
            augmentation_from_dict(aug)
            for aug in config.get('augmentations', ())
        )
        try:
            return cls(**config)
        except TypeError as err:
            raise ConfigError(f'Invalid preprocess config: {err}') from err


def resize_bilinear(gray, size):
    """Resize a float image to `size x size` with bilinear interpolation."""
    if gray.shape == (size, size):
        return gray
    img = Image.fromarray(np.asarray(gray, dtype=np.float32), mode='F')
    img = img.resize((size, size), resample=Image.Resampling.BILINEAR)
    return np.asarray(img, dtype=np.float64)


def augment(x, ops, rng):
    """Apply augmentations in order.

    Parameters
    ----------
    x : ndarray or Tensor
        Image of shape `[C, H, W]` with values in `[0, 1]`.
    ops : iterable
        Augmentations, e.g. the ones of `default_augmentations`.
    rng : numpy.random.Generator
        Source of randomness.

    Returns
    -------
    x : ndarray or Tensor
        Augmented image, same type as the input.

    """
    is_tensor = isinstance(x, Tensor)
    data = np.array(x.numpy() if is_tensor else x, dtype=np.float64)
    for op in ops:
        data = op(data, rng)
    return Tensor(data) if is_tensor else data


def preprocess(grid, cfg=None, mode='eval', rng=None):
    """Convert a decoded pixel grid to a normalized model input.

    The steps are grayscale (ITU-R 601 luma), bilinear resize, replication
    to three channels, scaling to `[0, 1]`, augmentation (training only) and
    per-channel normalization.

    Parameters
    ----------
    grid : ndarray
        Pixel grid `[H, W]` or `[H, W, 3]` with values 0-255.
    cfg : PreprocessConfig, optional
        Preprocessing parameters, default config if `None`.
    mode : str, optional
        `train` applies the augmentations, `eval` does not.
    rng : numpy.random.Generator, optional
        Source of randomness of the augmentations.

    Returns
    -------
    x : Tensor
        Model input of shape `[3, 64, 64]`.

    """
    if mode not in MODES:
        raise ConfigError(f'mode needs to be one of {MODES}, got {mode!r}.')
    cfg = PreprocessConfig() if cfg is None else cfg
    gray = resize_bilinear(to_grayscale(grid), cfg.target_size)
    x = np.repeat(gray[np.newaxis] / 255, cfg.grayscale_channels, axis=0)
    if mode == 'train' and cfg.augmentations:
        x = augment(x, cfg.augmentations, np.random.default_rng(rng))
    mean = np.asarray(cfg.normalize_mean)[:, np.newaxis, np.newaxis]
    std = np.asarray(cfg.normalize_std)[:, np.newaxis, np.newaxis]
    return Tensor((x - mean) / std)
