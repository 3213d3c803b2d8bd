# -*- coding: utf-8 -*-
# BSD 3-Clause License
# Copyright (c) 2024, ferhelper developers
# All rights reserved.
"""Binary checkpoint format.

A checkpoint file is laid out as

| bytes | content                                              |
|-------|------------------------------------------------------|
| 4     | magic `GMF5`                                         |
| 4     | format version, unsigned little-endian, currently 1  |
| 8     | length `n` of the metadata, unsigned little-endian   |
| n     | UTF-8 JSON metadata with sorted keys                 |
| rest  | raw float32 little-endian data of every tensor       |

The metadata holds the model spec, the preprocess config, the epoch, the
metric history and a tensor directory listing name, shape, kind
(`parameter` or `buffer`) and byte offset into the data section of every
tensor, in model order.

"""
import dataclasses
import json
import os
import struct

import numpy as np

from ferhelper.data.transforms import PreprocessConfig
from ferhelper.exceptions import (
    BadMagicError,
    CheckpointError,
    ConfigError,
    TensorCountMismatchError,
    TruncatedCheckpointError,
    VersionMismatchError,
)
from ferhelper.models import ModelSpec, build

MAGIC = b'GMF5'
VERSION = 1
INIT_SCHEME = 'kaiming_normal_fan_in'

_HEADER = struct.Struct('<4sIQ')
_DTYPE = np.dtype('<f4')


@dataclasses.dataclass
class Checkpoint:
    """Model with the metadata it was stored with."""

    model: object
    preprocess: PreprocessConfig
    epoch: int = 0
    metrics: list = dataclasses.field(default_factory=list)

    @property
    def spec(self):
        """Return the ModelSpec."""
        return self.model.spec


def _directory(model):
    entries, offset = [], 0
    for kind, named in (
        ('parameter', model.named_parameters()),
        ('buffer', model.named_buffers()),
    ):
        for name, tensor in named:
            entries.append({
                'name': name,
                'shape': list(tensor.shape),
                'kind': kind,
                'offset': offset,
            })
            offset += tensor.size * _DTYPE.itemsize
    return entries


def save_checkpoint(model, path, preprocess=None, epoch=0, metrics=None):
    """Write a model to the binary checkpoint format.

    Parameters
    ----------
    model : Model
        Model to store.
    path : str
        Output file.
    preprocess : PreprocessConfig, optional
        Preprocessing the model was trained with, default config if `None`.
    epoch : int, optional
        Epoch of the stored state.
    metrics : list of dict, optional
        Metric history, e.g. the records of the metric log.

    """
    preprocess = PreprocessConfig() if preprocess is None else preprocess
    meta = {
        'epoch': int(epoch),
        'init': INIT_SCHEME,
        'metrics': [] if metrics is None else list(metrics),
        'model_spec': model.spec.to_dict(),
        'preprocess': preprocess.to_dict(),
        'tensors': _directory(model),
    }
    meta_bytes = json.dumps(
        meta, sort_keys=True, separators=(',', ':'), allow_nan=True,
    ).encode('utf-8')

    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, 'wb') as ckpt:
        ckpt.write(_HEADER.pack(MAGIC, VERSION, len(meta_bytes)))
        ckpt.write(meta_bytes)
        for tensor in model.state_dict().values():
            ckpt.write(np.ascontiguousarray(tensor, dtype=_DTYPE).tobytes())


def _parse_header(raw, path):
    if len(raw) < len(MAGIC) or raw[:len(MAGIC)] != MAGIC:
        if MAGIC.startswith(raw[:len(MAGIC)]) and len(raw) < len(MAGIC):
            raise TruncatedCheckpointError(f'{path} ends within the magic.')
        raise BadMagicError(f'{path} is not a checkpoint file.')
    if len(raw) < _HEADER.size:
        raise TruncatedCheckpointError(f'{path} ends within the header.')
    _, version, meta_length = _HEADER.unpack_from(raw)
    if version != VERSION:
        raise VersionMismatchError(
            f'{path} has format version {version}, supported is {VERSION}.',
        )
    meta_end = _HEADER.size + meta_length
    if len(raw) < meta_end:
        raise TruncatedCheckpointError(f'{path} ends within the metadata.')
    try:
        meta = json.loads(raw[_HEADER.size:meta_end].decode('utf-8'))
    except (UnicodeDecodeError, json.JSONDecodeError) as err:
        raise CheckpointError(f'{path} has corrupted metadata: {err}') from err
    return meta, meta_end


def load_checkpoint(path):
    """Read a checkpoint file.

    Parameters
    ----------
    path : str
        Checkpoint written by
        [save_checkpoint][ferhelper.train.checkpoint.save_checkpoint].

    Returns
    -------
    checkpoint : Checkpoint
        Rebuilt model in eval mode with its metadata.

    """
    with open(path, 'rb') as ckpt:
        raw = ckpt.read()
    meta, data_start = _parse_header(raw, path)

    try:
        spec = ModelSpec.from_dict(meta['model_spec'])
        preprocess = PreprocessConfig.from_dict(meta['preprocess'])
        entries = meta['tensors']
    except (KeyError, TypeError, ConfigError) as err:
        raise CheckpointError(f'{path} has invalid metadata: {err}') from err

    model = build(spec)
    expected = _directory(model)
    if [
        (entry['name'], list(entry['shape'])) for entry in entries
    ] != [(entry['name'], entry['shape']) for entry in expected]:
        raise TensorCountMismatchError(
            f'{path} stores {len(entries)} tensors which do not match the '
            f'{len(expected)} tensors of its {spec.family} model.',
        )

    data = raw[data_start:]
    n_bytes = sum(
        int(np.prod(entry['shape'])) * _DTYPE.itemsize for entry in expected
    )
    if len(data) < n_bytes:
        raise TruncatedCheckpointError(
            f'{path} holds {len(data)} of {n_bytes} bytes of tensor data.',
        )
    if len(data) > n_bytes:
        raise CheckpointError(f'{path} has trailing data.')

    state = {}
    for entry in expected:
        count = int(np.prod(entry['shape']))
        state[entry['name']] = np.frombuffer(
            data, dtype=_DTYPE, count=count, offset=entry['offset'],
        ).reshape(entry['shape'])
    model.load_state(state)

    return Checkpoint(
        model=model.eval(),
        preprocess=preprocess,
        epoch=meta.get('epoch', 0),
        metrics=meta.get('metrics', []),
    )


def load_model(path):
    """Return only the model of a checkpoint, see `load_checkpoint`."""
    return load_checkpoint(path).model
