# -*- coding: utf-8 -*-
"""# Data Pipeline

This submodule turns folder-structured datasets into model input.

- [**labels:**][ferhelper.data.labels] The six emotion classes.
- [**manifest:**][ferhelper.data.manifest] CSV manifests of image paths and
  labels, scanning class folders and stratified splitting.
- [**imageio:**][ferhelper.data.imageio] Decoding and encoding of JPEG, PNG
  and PPM/PGM images.
- [**transforms:**][ferhelper.data.transforms] Preprocessing to normalized
  `[3, 64, 64]` tensors and the training augmentations.
- [**loader:**][ferhelper.data.loader] Seeded batch iteration.

"""
__all__ = [
    'CLASS_NAMES',
    'N_CLASSES',
    'ClassLabel',
    'DatasetManifest',
    'PreprocessConfig',
    'augment',
    'batch_iter',
    'decode_image',
    'encode_image',
    'preprocess',
    'scan_folders',
    'to_label',
]

from .labels import CLASS_NAMES, N_CLASSES, ClassLabel, to_label
from .manifest import DatasetManifest, scan_folders
from .imageio import decode_image, encode_image
from .transforms import PreprocessConfig, augment, preprocess
from .loader import batch_iter
