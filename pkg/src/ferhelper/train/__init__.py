# -*- coding: utf-8 -*-
"""# Training

This submodule contains everything needed to fit and persist a classifier.

- [**optim:**][ferhelper.train.optim] SGD with momentum, Adam and AdamW.
- [**trainer:**][ferhelper.train.trainer] The training loop with early
  stopping on the validation accuracy.
- [**grid:**][ferhelper.train.grid] Exhaustive hyperparameter search.
- [**checkpoint:**][ferhelper.train.checkpoint] The binary checkpoint
  format.

"""
__all__ = [
    'SGD',
    'Adam',
    'AdamW',
    'make_optimizer',
    'sgd_step',
    'EarlyStopping',
    'TrainConfig',
    'TrainResult',
    'train',
    'SEARCH_SPACE',
    'GridResult',
    'GridSpec',
    'grid_search',
    'to_run',
    'Checkpoint',
    'load_checkpoint',
    'load_model',
    'save_checkpoint',
]

from .optim import SGD, Adam, AdamW, make_optimizer, sgd_step
from .trainer import EarlyStopping, TrainConfig, TrainResult, train
from .grid import SEARCH_SPACE, GridResult, GridSpec, grid_search, to_run
from .checkpoint import (
    Checkpoint,
    load_checkpoint,
    load_model,
    save_checkpoint,
)
