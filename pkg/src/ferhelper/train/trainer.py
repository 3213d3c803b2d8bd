# -*- coding: utf-8 -*-
# BSD 3-Clause License
# Copyright (c) 2024, ferhelper developers
# All rights reserved.
"""Training loop with validation based early stopping."""
import dataclasses
import logging

import numpy as np
import pandas as pd

from ferhelper import io
from ferhelper.data.loader import batch_iter
from ferhelper.data.transforms import PreprocessConfig
from ferhelper.evaluate import predict_manifest
from ferhelper.exceptions import ConfigError, DivergenceError, ManifestError
from ferhelper.nn.functional import cross_entropy
from ferhelper.tensor import backward
from ferhelper.train.optim import OPTIMIZERS, make_optimizer

logger = logging.getLogger(__name__)

METRIC_COLUMNS = ('epoch', 'train_loss', 'train_acc', 'valid_acc')


@dataclasses.dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters of a training run.

    Parameters
    ----------
    learning_rate : float
        Step size, positive.
    momentum : float
        Momentum of SGD.
    weight_decay : float
        L2 penalty, see [make_optimizer][ferhelper.train.optim.make_optimizer].
    batch_size : int
        Number of images per step.
    epochs : int
        Maximal number of epochs.
    early_stopping : bool
        Stop if the validation accuracy does not improve.
    patience : int
        Number of tolerated epochs without improvement.
    seed : int
        Seed of shuffling, augmentation and dropout.
    optimizer : str
        One of `sgd`, `adam`, `adamw`.

    """

    learning_rate: float = 1e-3
    momentum: float = 0.9
    weight_decay: float = 1e-4
    batch_size: int = 32
    epochs: int = 10
    early_stopping: bool = False
    patience: int = 5
    seed: int = 0
    optimizer: str = 'sgd'

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ConfigError(
                f'learning_rate needs to be > 0, got {self.learning_rate}.',
            )
        if self.batch_size < 1:
            raise ConfigError(
                f'batch_size needs to be >= 1, got {self.batch_size}.',
            )
        if self.epochs < 1:
            raise ConfigError(f'epochs needs to be >= 1, got {self.epochs}.')
        if self.early_stopping and self.patience < 1:
            raise ConfigError(
                f'patience needs to be >= 1, got {self.patience}.',
            )
        if not 0 <= self.momentum < 1:
            raise ConfigError(
                f'momentum needs to be in [0, 1), got {self.momentum}.',
            )
        if self.weight_decay < 0:
            raise ConfigError('weight_decay needs to be >= 0.')
        if self.optimizer not in OPTIMIZERS:
            raise ConfigError(
                f'Unknown optimizer {self.optimizer!r}, use one of '
                f'{OPTIMIZERS}.',
            )

    def to_dict(self):
        """Return a JSON serializable dictionary."""
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, config):
        """Create from a dictionary."""
        try:
            return cls(**config)
        except TypeError as err:
            raise ConfigError(f'Invalid train config: {err}') from err


class EarlyStopping:
    """Track the best value of a metric which is maximized.

    Training stops once more than `patience` consecutive epochs did not
    improve on the best value. Ties do not count as improvement.

    """
    __slots__ = ('patience', 'best', 'best_epoch', 'n_bad_epochs')

    def __init__(self, patience):
        self.patience = patience
        self.best = -np.inf
        self.best_epoch = None
        self.n_bad_epochs = 0

    def update(self, metric, epoch):
        """Register the metric of an epoch.

        Returns
        -------
        improved : bool
            If the metric is a new best.

        """
        if metric > self.best:
            self.best = metric
            self.best_epoch = epoch
            self.n_bad_epochs = 0
            return True
        self.n_bad_epochs += 1
        return False

    @property
    def should_stop(self):
        """Return if the patience is exhausted."""
        return self.n_bad_epochs > self.patience


@dataclasses.dataclass
class TrainResult:
    """Outcome of [train][ferhelper.train.trainer.train].

    The model holds the state of `best_epoch` after training.

    """

    model: object
    best_epoch: int
    best_valid_acc: float
    stop_epoch: int
    metrics: pd.DataFrame
    best_state: dict

    def write_metric_log(self, file_name):
        """Write the CSV `epoch,train_loss,train_acc,valid_acc`."""
        io.savecsv(file_name, self.metrics[list(METRIC_COLUMNS)])

    def metric_records(self):
        """Return the metric log as list of dicts."""
        return self.metrics.to_dict(orient='records')


def train(
    model,
    train_manifest,
    valid_manifest,
    cfg,
    preprocess=None,
    workers=1,
    cache_images=False,
):
    """Train a model with cross-entropy loss.

    Every epoch iterates over the shuffled training set, steps the optimizer
    once per batch and evaluates the accuracy of the training and the
    validation set in eval mode. The state with the best validation
    accuracy is kept, ties are resolved in favor of the earlier epoch.

    Parameters
    ----------
    model : Model
        Model to train in place.
    train_manifest, valid_manifest : DatasetManifest
        Non-empty training and validation sets.
    cfg : TrainConfig
        Hyperparameters.
    preprocess : PreprocessConfig, optional
        Preprocessing, the augmentations are applied to the training batches.
    workers : int, optional
        Number of threads loading images.
    cache_images : bool, optional
        Keep every decoded image of both sets in memory for all epochs.
        This needs about `H W C` bytes per image, so enable it only if
        both sets fit into memory.

    Returns
    -------
    result : TrainResult

    """
    if not len(train_manifest) or not len(valid_manifest):
        raise ManifestError('Training and validation sets must not be empty.')
    preprocess = PreprocessConfig() if preprocess is None else preprocess
    model.reseed(cfg.seed)
    optimizer = make_optimizer(
        cfg.optimizer,
        model.parameters(),
        lr=cfg.learning_rate,
        momentum=cfg.momentum,
        weight_decay=cfg.weight_decay,
    )
    stopper = EarlyStopping(cfg.patience)
    cache = {} if cache_images else None
    records = []
    best_state = None

    for epoch in range(1, cfg.epochs + 1):
        model.train()
        loss_sum = 0.0
        batches = batch_iter(
            train_manifest,
            preprocess,
            cfg.batch_size,
            shuffle=True,
            seed=(cfg.seed, epoch),
            mode='train',
            workers=workers,
            cache=cache,
        )
        for batch_idx, (x, labels) in enumerate(batches, 1):
            optimizer.zero_grad()
            loss = cross_entropy(model(x), labels)
            loss_value = loss.item()
            if not np.isfinite(loss_value):
                raise DivergenceError(
                    f'Loss became {loss_value} in epoch {epoch}, batch '
                    f'{batch_idx}.',
                )
            backward(loss)
            optimizer.step()
            loss_sum += loss_value * len(labels)

        train_acc, valid_acc = (
            _accuracy(model, manifest, preprocess, cfg, workers, cache)
            for manifest in (train_manifest, valid_manifest)
        )
        records.append({
            'epoch': epoch,
            'train_loss': loss_sum / len(train_manifest),
            'train_acc': train_acc,
            'valid_acc': valid_acc,
        })
        logger.info(
            'epoch %d: train_loss=%.5f train_acc=%.4f valid_acc=%.4f',
            epoch,
            records[-1]['train_loss'],
            train_acc,
            valid_acc,
        )

        if stopper.update(valid_acc, epoch):
            best_state = {
                name: array.copy()
                for name, array in model.state_dict().items()
            }
        if cfg.early_stopping and stopper.should_stop:
            logger.info('Early stopping after epoch %d.', epoch)
            break

    model.load_state(best_state)
    model.eval()
    return TrainResult(
        model=model,
        best_epoch=stopper.best_epoch,
        best_valid_acc=stopper.best,
        stop_epoch=epoch,
        metrics=pd.DataFrame(records, columns=METRIC_COLUMNS),
        best_state=best_state,
    )


def _accuracy(model, manifest, preprocess, cfg, workers, cache):
    labels, preds, _, _ = predict_manifest(
        model,
        manifest,
        preprocess,
        batch_size=cfg.batch_size,
        workers=workers,
        cache=cache,
    )
    return float(np.mean(labels == preds))
