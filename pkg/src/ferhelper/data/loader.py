# -*- coding: utf-8 -*-
# BSD 3-Clause License
# Copyright (c) 2024, ferhelper developers
# All rights reserved.
"""Batch iteration over dataset manifests."""
import concurrent.futures

import numpy as np

from ferhelper.data.imageio import decode_image
from ferhelper.data.transforms import preprocess
from ferhelper.exceptions import ConfigError, ManifestError
from ferhelper.tensor import Tensor


def load_sample(path, cfg, mode='eval', seed=None, cache=None):
    """Decode and preprocess a single image.

    Parameters
    ----------
    path : str
        Image file.
    cfg : PreprocessConfig
        Preprocessing parameters.
    mode : str, optional
        `train` or `eval`.
    seed : int, optional
        Seed of the augmentations.
    cache : dict, optional
        Decoded pixel grids by path, filled on first access.

    Returns
    -------
    x : ndarray
        Preprocessed image of shape `[3, 64, 64]`.

    """
    if cache is None:
        grid = decode_image(path)
    else:
        grid = cache.get(path)
        if grid is None:
            grid = cache.setdefault(path, decode_image(path))
    return preprocess(
        grid, cfg, mode=mode, rng=np.random.default_rng(seed),
    ).numpy()


def batch_iter(
    manifest,
    cfg,
    batch_size,
    shuffle=False,
    seed=0,
    mode='eval',
    workers=1,
    cache=None,
):
    """Iterate over batches of preprocessed images and labels.

    Every sample gets its own seed drawn up front from `seed`, so the
    batches are identical for any number of workers.

    Parameters
    ----------
    manifest : DatasetManifest
        Rows to iterate over.
    cfg : PreprocessConfig
        Preprocessing parameters.
    batch_size : int
        Number of samples per batch. The last batch may be smaller.
    shuffle : bool, optional
        Permute the rows, pass a different seed per epoch.
    seed : int or sequence of int, optional
        Seed of the permutation and the augmentations.
    mode : str, optional
        `train` applies the augmentations.
    workers : int, optional
        Number of threads decoding and preprocessing images.
    cache : dict, optional
        Decoded pixel grids by path, see
        [load_sample][ferhelper.data.loader.load_sample].

    Yields
    ------
    x : Tensor
        Batch of shape `[B, 3, 64, 64]`.
    labels : ndarray
        Class ids of shape `[B]`.

    """
    if batch_size < 1:
        raise ConfigError(f'batch_size needs to be >= 1, got {batch_size}.')
    if not len(manifest):
        raise ManifestError('Cannot iterate over an empty manifest.')

    rng = np.random.default_rng(seed)
    n_rows = len(manifest)
    order = rng.permutation(n_rows) if shuffle else np.arange(n_rows)
    sample_seeds = rng.integers(0, 2**32, size=n_rows)
    paths = [manifest.resolve(path) for path in manifest.paths]
    labels = manifest.labels

    def load(idx):
        return load_sample(
            paths[idx], cfg, mode=mode, seed=sample_seeds[idx], cache=cache,
        )

    executor = None
    if workers > 1:
        executor = concurrent.futures.ThreadPoolExecutor(max_workers=workers)
    try:
        for start in range(0, n_rows, batch_size):
            batch = order[start:start + batch_size]
            if executor is None:
                samples = [load(idx) for idx in batch]
            else:
                samples = list(executor.map(load, batch))
            yield Tensor(np.stack(samples)), labels[batch]
    finally:
        if executor is not None:
            executor.shutdown()
