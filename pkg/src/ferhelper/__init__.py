# -*- coding: utf-8 -*-
""" --8<-- "docs/tutorials/ferhelper.md" """
__all__ = [
    'Tensor',
    'no_grad',
    'default_dtype',
    'ModelSpec',
    'build',
    'get_spec',
    'n_params',
    'DatasetManifest',
    'PreprocessConfig',
    'scan_folders',
    'TrainConfig',
    'train',
    'save_checkpoint',
    'load_checkpoint',
    'load_model',
    'ConfusionMatrix',
    'evaluate',
    'score_folder',
    'grad_cam',
    'CascadeModel',
    'detect_multiscale',
    'annotate_frames',
]

from . import data, detect, exceptions, io, models, nn, plot, utils
from .tensor import Tensor, default_dtype, no_grad
from .models import ModelSpec, build, get_spec, n_params
from .data import DatasetManifest, PreprocessConfig, scan_folders
from .train import (
    TrainConfig,
    load_checkpoint,
    load_model,
    save_checkpoint,
    train,
)
from .evaluate import ConfusionMatrix, evaluate, score_folder
from .xai import grad_cam
from .detect import CascadeModel, detect_multiscale
from .pipeline import annotate_frames

__version__ = '0.1.0'
