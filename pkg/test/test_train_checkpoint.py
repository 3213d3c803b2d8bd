# -*- coding: utf-8 -*-
"""Tests for the checkpoint module.

BSD 3-Clause License
Copyright (c) 2024, ferhelper developers
All rights reserved.

"""
import json
import os

import numpy as np
import pytest

from ferhelper import data, exceptions
from ferhelper.models import ModelSpec, build
from ferhelper.tensor import Tensor
from ferhelper.train import checkpoint

TOY_SPEC = ModelSpec(conv_blocks=2, input_shape=(3, 8, 8), fc_layers=2)


@pytest.fixture
def ckpt_file(tmp_path):
    """Store a toy model with non-trivial running statistics."""
    model = build(TOY_SPEC)
    model(Tensor(np.random.default_rng(0).standard_normal((4, 3, 8, 8))))
    file_name = str(tmp_path / 'toy.gmf')
    checkpoint.save_checkpoint(
        model,
        file_name,
        epoch=7,
        metrics=[{'epoch': 1, 'valid_acc': 0.5}],
    )
    return file_name, model


def _rewrite(file_name, header=None, meta=None, data_bytes=None):
    with open(file_name, 'rb') as ckpt:
        raw = ckpt.read()
    magic, version, meta_length = checkpoint._HEADER.unpack_from(raw)
    start = checkpoint._HEADER.size
    old_meta = raw[start:start + meta_length]
    old_data = raw[start + meta_length:]
    if meta is not None:
        old_meta = json.dumps(meta(json.loads(old_meta))).encode('utf-8')
    if header is not None:
        magic, version = header
    if data_bytes is not None:
        old_data = data_bytes(old_data)
    with open(file_name, 'wb') as ckpt:
        ckpt.write(checkpoint._HEADER.pack(magic, version, len(old_meta)))
        ckpt.write(old_meta)
        ckpt.write(old_data)


def test_roundtrip(ckpt_file):
    """Test that every tensor is restored bit by bit."""
    file_name, model = ckpt_file
    with open(file_name, 'rb') as ckpt:
        assert ckpt.read(4) == b'GMF5'

    loaded = checkpoint.load_checkpoint(file_name)
    assert loaded.spec == TOY_SPEC
    assert loaded.epoch == 7
    assert loaded.metrics == [{'epoch': 1, 'valid_acc': 0.5}]
    assert loaded.preprocess == data.PreprocessConfig()
    assert loaded.model.mode == 'eval'

    state = model.state_dict()
    assert list(loaded.model.state_dict()) == list(state)
    for name, values in loaded.model.state_dict().items():
        assert values.dtype == np.float32
        np.testing.assert_array_equal(values, state[name])
    assert np.any(state['conv1.bn.running_mean'] != 0)

    x = Tensor(np.random.default_rng(1).standard_normal((2, 3, 8, 8)))
    np.testing.assert_array_equal(
        loaded.model(x).numpy(), model.eval()(x).numpy(),
    )
    assert checkpoint.load_model(file_name).spec == TOY_SPEC


def test_gimefive15_size(tmp_path):
    """Test the number of stored values of the default model."""
    file_name = str(tmp_path / 'gimefive15.gmf')
    checkpoint.save_checkpoint(build('gimefive15'), file_name)
    with open(file_name, 'rb') as ckpt:
        raw = ckpt.read(checkpoint._HEADER.size)
    _, version, meta_length = checkpoint._HEADER.unpack(raw)
    assert version == 1
    n_bytes = (
        os.path.getsize(file_name) - checkpoint._HEADER.size - meta_length
    )
    assert n_bytes == 4 * (10478086 + 3968)


def test_metadata(ckpt_file):
    """Test the tensor directory of the metadata."""
    file_name, model = ckpt_file
    with open(file_name, 'rb') as ckpt:
        raw = ckpt.read()
    meta, _ = checkpoint._parse_header(raw, file_name)
    assert meta['init'] == 'kaiming_normal_fan_in'
    entries = meta['tensors']
    assert [entry['name'] for entry in entries] == list(model.state_dict())
    assert entries[0] == {
        'name': 'conv1.conv.weight',
        'shape': [64, 3, 3, 3],
        'kind': 'parameter',
        'offset': 0,
    }
    assert entries[1]['offset'] == 4 * 64 * 27
    assert entries[-1]['kind'] == 'buffer'


def test_bad_magic(tmp_path):
    """Test files which are no checkpoints."""
    file_name = tmp_path / 'model.gmf'
    file_name.write_bytes(b'PK\x03\x04' + bytes(100))
    with pytest.raises(exceptions.BadMagicError):
        checkpoint.load_checkpoint(str(file_name))


def test_version_mismatch(ckpt_file):
    """Test an unsupported format version."""
    file_name, _ = ckpt_file
    _rewrite(file_name, header=(b'GMF5', 2))
    with pytest.raises(exceptions.VersionMismatchError):
        checkpoint.load_checkpoint(file_name)


@pytest.mark.parametrize('n_bytes', [2, 10, 30, -4])
def test_truncated(ckpt_file, n_bytes):
    """Test files cut within the magic, header, metadata or data."""
    file_name, _ = ckpt_file
    with open(file_name, 'rb') as ckpt:
        raw = ckpt.read()
    with open(file_name, 'wb') as ckpt:
        ckpt.write(raw[:n_bytes])
    with pytest.raises(exceptions.TruncatedCheckpointError):
        checkpoint.load_checkpoint(file_name)


def test_tensor_mismatch(ckpt_file):
    """Test a directory not matching the declared spec."""
    file_name, _ = ckpt_file

    def shrink(meta):
        meta['model_spec']['fc_layers'] = 1
        return meta

    _rewrite(file_name, meta=shrink)
    with pytest.raises(exceptions.TensorCountMismatchError):
        checkpoint.load_checkpoint(file_name)


def test_corrupted(ckpt_file):
    """Test trailing bytes and invalid metadata."""
    file_name, _ = ckpt_file
    _rewrite(file_name, data_bytes=lambda old: old + bytes(4))
    with pytest.raises(exceptions.CheckpointError):
        checkpoint.load_checkpoint(file_name)

    def drop_spec(meta):
        meta.pop('model_spec')
        return meta

    _rewrite(file_name, meta=drop_spec, data_bytes=lambda old: old[:-4])
    with pytest.raises(exceptions.CheckpointError):
        checkpoint.load_checkpoint(file_name)
