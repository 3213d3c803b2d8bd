# -*- coding: utf-8 -*-
# BSD 3-Clause License
# Copyright (c) 2024, ferhelper developers
# All rights reserved.
"""Exhaustive hyperparameter search over a cartesian grid."""
import concurrent.futures
import dataclasses
import itertools
import json
import logging

import numpy as np
import pandas as pd

from ferhelper.exceptions import ConfigError, FerError
from ferhelper.models import build, get_spec
from ferhelper.train.trainer import TrainConfig, train

logger = logging.getLogger(__name__)

ACTIVATIONS = ('relu',)


@dataclasses.dataclass(frozen=True)
class GridSpec:
    """Candidate values per hyperparameter.

    Every axis holds a tuple of candidates. The configurations are the
    cartesian product of all axes in field order, each axis enumerated in
    the given order. The defaults hold a single candidate per axis, see
    `SEARCH_SPACE` for the full search space.

    """

    learning_rate: tuple = (1e-3,)
    batch_size: tuple = (32,)
    dropout: tuple = (0.5,)
    conv_blocks: tuple = (5,)
    fc_layers: tuple = (3,)
    batch_norm: tuple = (True,)
    pooling: tuple = ('avg',)
    optimizer: tuple = ('sgd',)
    activation: tuple = ('relu',)
    epochs: tuple = (10,)
    early_stopping: tuple = (False,)
    patience: tuple = (5,)

    def __post_init__(self):
        for axis in self.axes:
            values = getattr(self, axis)
            if isinstance(values, (str, bytes)) or np.ndim(values) == 0:
                values = (values,)
            values = tuple(values)
            if not values:
                raise ConfigError(f'Grid axis {axis!r} is empty.')
            object.__setattr__(self, axis, values)
        unknown = set(self.activation) - set(ACTIVATIONS)
        if unknown:
            raise ConfigError(
                f'Unsupported activation(s) {sorted(unknown)}, use '
                f'{ACTIVATIONS}.',
            )

    @property
    def axes(self):
        """Return the names of all axes in enumeration order."""
        return tuple(field.name for field in dataclasses.fields(self))

    @property
    def shape(self):
        """Return the number of candidates per axis."""
        return tuple(len(getattr(self, axis)) for axis in self.axes)

    def __len__(self):
        """Return the number of configurations."""
        return int(np.prod(self.shape))

    def configurations(self):
        """Iterate over all configurations as dicts in lexicographic order."""
        for values in itertools.product(
            *(getattr(self, axis) for axis in self.axes),
        ):
            yield dict(zip(self.axes, values))

    def to_dict(self):
        """Return a JSON serializable dictionary."""
        return {axis: list(getattr(self, axis)) for axis in self.axes}

    @classmethod
    def from_dict(cls, grid):
        """Create from a dictionary, missing axes keep their default."""
        unknown = set(grid) - {field.name for field in dataclasses.fields(cls)}
        if unknown:
            raise ConfigError(f'Unknown grid axes {sorted(unknown)}.')
        return cls(**grid)

    @classmethod
    def from_json(cls, file_name):
        """Read a grid from a JSON file mapping axis names to lists."""
        with open(file_name, encoding='utf-8') as grid_file:
            try:
                grid = json.load(grid_file)
            except json.JSONDecodeError as err:
                raise ConfigError(f'{file_name}: {err}') from err
        if not isinstance(grid, dict):
            raise ConfigError(f'{file_name} needs to hold a JSON object.')
        return cls.from_dict(grid)


SEARCH_SPACE = GridSpec(
    learning_rate=(1e-2, 1e-3, 1e-4),
    batch_size=(8, 16, 32, 64),
    dropout=(0.2, 0.5),
    conv_blocks=(4, 5, 6),
    fc_layers=(1, 2, 3),
    batch_norm=(True, False),
    pooling=('max', 'avg'),
    optimizer=('adam', 'adamw', 'sgd'),
    activation=('relu',),
    epochs=(10, 20, 40, 80),
    early_stopping=(True, False),
    patience=(5, 10, 15),
)


def to_run(point, base_spec='gimefive15', seed=0):
    """Translate a grid point into a model spec and a train config.

    The `dropout` axis sets the rate after the pooling layers and after the
    first FC layer alike.

    Parameters
    ----------
    point : dict
        Configuration as yielded by `GridSpec.configurations`.
    base_spec : str or ModelSpec, optional
        GiMeFive spec providing all fields which are not grid axes.
    seed : int, optional
        Seed of initialization and training.

    Returns
    -------
    spec : ModelSpec
    cfg : TrainConfig

    """
    base_spec = get_spec(base_spec)
    if base_spec.family != 'gimefive':
        raise ConfigError(
            f'Grid search needs a gimefive base spec, got {base_spec.family}.',
        )
    spec = base_spec.replace(
        conv_blocks=point['conv_blocks'],
        fc_layers=point['fc_layers'],
        batch_norm=point['batch_norm'],
        pooling=point['pooling'],
        use_dropout=point['dropout'] > 0,
        conv_dropout=point['dropout'],
        fc_dropout=point['dropout'],
        seed=seed,
    )
    cfg = TrainConfig(
        learning_rate=point['learning_rate'],
        batch_size=point['batch_size'],
        epochs=point['epochs'],
        early_stopping=point['early_stopping'],
        patience=point['patience'],
        optimizer=point['optimizer'],
        seed=seed,
    )
    return spec, cfg


@dataclasses.dataclass(frozen=True)
class GridResult:
    """Outcome of a single grid point, `error` is set for failed runs."""

    index: int
    config: dict
    valid_acc: float
    best_epoch: int = None
    error: str = None

    @property
    def failed(self):
        """Return if the run raised."""
        return self.error is not None


def _run_point(args):
    index, point, train_manifest, valid_manifest, job = args
    try:
        spec, cfg = to_run(point, job['base_spec'], job['seed'])
        result = train(
            build(spec),
            train_manifest,
            valid_manifest,
            cfg,
            preprocess=job['preprocess'],
            workers=job['workers'],
        )
    except FerError as err:
        logger.warning('Grid point %d failed: %s', index, err)
        return GridResult(index, point, float('nan'), error=str(err))
    logger.info(
        'Grid point %d: valid_acc=%.4f', index, result.best_valid_acc,
    )
    return GridResult(
        index, point, float(result.best_valid_acc), result.best_epoch,
    )


def rank(results):
    """Sort by accuracy descending, ties and failures by grid order."""
    return sorted(
        results,
        key=lambda res: (
            np.isnan(res.valid_acc),
            -np.nan_to_num(res.valid_acc, nan=0.0),
            res.index,
        ),
    )


def grid_search(
    grid,
    train_manifest,
    valid_manifest,
    base_spec='gimefive15',
    preprocess=None,
    budget=None,
    max_runs=None,
    seed=0,
    workers=1,
):
    """Train every configuration of a grid and rank them.

    A run which raises a ferhelper error is recorded with NaN accuracy and
    does not abort the search.

    Parameters
    ----------
    grid : GridSpec
        Search space.
    train_manifest, valid_manifest : DatasetManifest
        Data shared by all runs.
    base_spec : str or ModelSpec, optional
        GiMeFive spec providing the fields which are no grid axes.
    preprocess : PreprocessConfig, optional
        Preprocessing of all runs.
    budget : callable, optional
        Predicate on a configuration dict, configurations for which it
        returns `False` are skipped.
    max_runs : int, optional
        Train at most the first `max_runs` remaining configurations.
    seed : int, optional
        Seed shared by all runs.
    workers : int, optional
        Number of processes, each training one configuration at a time.

    Returns
    -------
    results : list of GridResult
        Ranked by validation accuracy descending, ties in grid order.

    """
    points = [
        (index, point)
        for index, point in enumerate(grid.configurations())
        if budget is None or budget(point)
    ]
    if max_runs is not None:
        points = points[:max_runs]
    if not points:
        raise ConfigError('The grid holds no configuration within budget.')

    job = {
        'base_spec': get_spec(base_spec),
        'seed': seed,
        'preprocess': preprocess,
        'workers': 1,
    }
    tasks = [
        (index, point, train_manifest, valid_manifest, job)
        for index, point in points
    ]
    logger.info('Grid search over %d configurations.', len(tasks))
    if workers > 1:
        with concurrent.futures.ProcessPoolExecutor(workers) as executor:
            results = list(executor.map(_run_point, tasks))
    else:
        results = [_run_point(task) for task in tasks]
    return rank(results)


def results_frame(results):
    """Return the ranked results as table, one column per axis."""
    return pd.DataFrame([
        {
            'rank': rank_idx,
            'index': res.index,
            **res.config,
            'valid_acc': res.valid_acc,
            'best_epoch': res.best_epoch,
            'error': res.error if res.error is not None else '',
        }
        for rank_idx, res in enumerate(results, 1)
    ])
