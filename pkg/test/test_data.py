# -*- coding: utf-8 -*-
"""Tests for the data submodule.

BSD 3-Clause License
Copyright (c) 2024, ferhelper developers
All rights reserved.

"""
import os

import numpy as np
import pytest

from ferhelper import data
from ferhelper.data import imageio, loader, transforms
from ferhelper.data.labels import ClassLabel
from ferhelper.exceptions import (
    ConfigError,
    DecodeError,
    LabelError,
    ManifestError,
    ShapeError,
)
from ferhelper.tensor import Tensor


def test_labels():
    """Test the bijection of ids and emotion names."""
    assert data.CLASS_NAMES == (
        'happiness', 'surprise', 'sadness', 'anger', 'disgust', 'fear',
    )
    for idx, name in enumerate(data.CLASS_NAMES):
        assert data.to_label(idx) == data.to_label(name) == idx
        assert data.to_label(str(idx)).label == name
    assert data.to_label(' Fear ') is ClassLabel.FEAR


@pytest.mark.parametrize('value', [6, -1, '7', 'joy', 'neutral'])
def test_labels_errors(value):
    """Test rejecting unknown labels."""
    with pytest.raises(LabelError):
        data.to_label(value)


def test_scan_folders(dataset):
    """Test scanning a folder per class."""
    os.makedirs(os.path.join(dataset, 'misc'))
    with open(os.path.join(dataset, '0_happiness', 'notes.txt'), 'w') as fh:
        fh.write('not an image')

    manifest = data.scan_folders(dataset)
    assert len(manifest) == 18
    np.testing.assert_array_equal(manifest.histogram(), [3] * 6)
    assert manifest.paths == sorted(manifest.paths)
    assert manifest.paths[0] == '0_happiness/img_00.png'
    assert manifest.skipped == ('misc',)


def test_scan_folders_names(tmp_path):
    """Test that only the leading digit of a folder defines the label."""
    imageio.encode_image(np.zeros((4, 4)), str(tmp_path / '0_happiness/a.jpg'))
    imageio.encode_image(np.zeros((4, 4)), str(tmp_path / '5_fear/b.jpg'))
    imageio.encode_image(np.zeros((4, 4)), str(tmp_path / '12_x/c.png'))
    manifest = data.scan_folders(str(tmp_path))
    assert list(manifest) == [
        ('0_happiness/a.jpg', ClassLabel.HAPPINESS),
        ('5_fear/b.jpg', ClassLabel.FEAR),
    ]
    assert manifest.skipped == ('12_x',)


def test_scan_folders_errors(tmp_path):
    """Test empty and missing dataset directories."""
    with pytest.raises(ManifestError):
        data.scan_folders(str(tmp_path))
    with pytest.raises(ManifestError):
        data.scan_folders(str(tmp_path / 'missing'))


def test_manifest_csv(dataset, tmp_path):
    """Test writing and reading manifests."""
    manifest = data.scan_folders(dataset)
    csv_file = str(tmp_path / 'lists' / 'all.csv')
    manifest.to_csv(csv_file)
    with open(csv_file) as csv:
        assert csv.readline() == 'path,label\n'
        assert csv.readline() == '../dataset/0_happiness/img_00.png,0\n'

    loaded = data.DatasetManifest.from_csv(csv_file, split='train')
    assert loaded.split == 'train'
    np.testing.assert_array_equal(loaded.labels, manifest.labels)
    for path, other in zip(loaded.paths, manifest.paths):
        assert os.path.samefile(loaded.resolve(path), manifest.resolve(other))

    bad_file = str(tmp_path / 'bad.csv')
    with open(bad_file, 'w') as csv:
        csv.write('file,emotion\na.png,0\n')
    with pytest.raises(ManifestError):
        data.DatasetManifest.from_csv(bad_file)


def test_manifest_errors():
    """Test the manifest invariants."""
    with pytest.raises(ManifestError):
        data.DatasetManifest(rows=(('a.png', 0), ('a.png', 1)))
    with pytest.raises(ConfigError):
        data.DatasetManifest(rows=(), split='holdout')
    with pytest.raises(LabelError):
        data.DatasetManifest(rows=(('a.png', 9),))


def test_split_by():
    """Test the stratified split."""
    manifest = data.DatasetManifest(rows=tuple(
        (f'{label}/{idx}.png', label)
        for label in range(6)
        for idx in range(10)
    ))
    splits = manifest.split_by((0.8, 0.1, 0.1), seed=3)
    assert list(splits) == ['train', 'test', 'valid']
    np.testing.assert_array_equal(splits['train'].histogram(), [8] * 6)
    np.testing.assert_array_equal(splits['test'].histogram(), [1] * 6)
    np.testing.assert_array_equal(splits['valid'].histogram(), [1] * 6)

    paths = [set(split.paths) for split in splits.values()]
    assert set.union(*paths) == set(manifest.paths)
    assert sum(len(split) for split in splits.values()) == 60

    again = manifest.split_by((0.8, 0.1, 0.1), seed=3)
    assert again['test'].paths == splits['test'].paths
    assert splits['valid'].split == 'valid'


@pytest.mark.parametrize('fractions', [
    (0.5, 0.5), (0.8, 0.1, 0.2), (1.2, -0.1, -0.1),
])
def test_split_by_errors(fractions):
    """Test invalid split fractions."""
    manifest = data.DatasetManifest(rows=(('a.png', 0),))
    with pytest.raises(ConfigError):
        manifest.split_by(fractions)


def test_decode_pgm(tmp_path):
    """Test decoding a binary gray map."""
    pgm_file = tmp_path / 'tiny.pgm'
    pgm_file.write_bytes(b'P5\n2 2\n255\n' + bytes([0, 255, 128, 64]))
    grid = data.decode_image(str(pgm_file))
    assert grid.dtype == np.uint8
    np.testing.assert_array_equal(grid, [[0, 255], [128, 64]])


def test_encode_decode(tmp_path):
    """Test lossless formats and invalid input."""
    rng = np.random.default_rng(0)
    rgb = rng.integers(0, 256, size=(5, 7, 3)).astype(np.uint8)
    for ext in ('png', 'ppm'):
        file_name = str(tmp_path / f'img.{ext}')
        data.encode_image(rgb, file_name)
        np.testing.assert_array_equal(data.decode_image(file_name), rgb)

    with pytest.raises(ShapeError):
        data.encode_image(np.zeros((2, 2, 4)), str(tmp_path / 'rgba.png'))

    text_file = tmp_path / 'image.png'
    text_file.write_text('no image')
    with pytest.raises(DecodeError):
        data.decode_image(str(text_file))
    with pytest.raises(DecodeError):
        data.decode_image(str(tmp_path / 'missing.png'))


def test_to_grayscale():
    """Test the luma conversion."""
    np.testing.assert_allclose(
        imageio.to_grayscale(np.array([[[255, 0, 0], [0, 0, 255]]])),
        [[76.245, 29.07]],
    )
    gray = np.arange(4).reshape(2, 2)
    np.testing.assert_array_equal(imageio.to_grayscale(gray), gray)
    assert imageio.to_rgb(gray).shape == (2, 2, 3)


def test_preprocess():
    """Test resizing, replication and normalization."""
    x = data.preprocess(np.full((16, 16), 128, dtype=np.uint8))
    assert isinstance(x, Tensor)
    assert x.shape == (3, 64, 64)
    # (128 / 255 - 0.5) / 0.5
    np.testing.assert_allclose(x.numpy(), 1 / 255, atol=1e-5)

    rng = np.random.default_rng(0)
    x = data.preprocess(rng.integers(0, 256, size=(80, 60, 3))).numpy()
    np.testing.assert_array_equal(x[0], x[1])
    assert x.min() >= -1 - 1e-5 and x.max() <= 1 + 1e-5

    with pytest.raises(ConfigError):
        data.preprocess(np.zeros((8, 8)), mode='test')


def test_preprocess_train():
    """Test that augmentations are reproducible by seed."""
    grid = np.random.default_rng(1).integers(0, 256, size=(64, 64))
    first = data.preprocess(grid, mode='train', rng=7).numpy()
    second = data.preprocess(grid, mode='train', rng=7).numpy()
    np.testing.assert_array_equal(first, second)

    cfg = data.PreprocessConfig(augmentations=())
    np.testing.assert_array_equal(
        data.preprocess(grid, cfg, mode='train', rng=7).numpy(),
        data.preprocess(grid, cfg).numpy(),
    )


@pytest.mark.parametrize('op', [
    transforms.HFlip(p=0),
    transforms.Rotation(max_deg=0),
    transforms.Crop(pad=0),
    transforms.Erasing(p=0),
    transforms.Brightness(p=0),
])
def test_augmentation_identities(op):
    """Test augmentations which are switched off."""
    x = np.random.default_rng(2).random((3, 8, 8))
    np.testing.assert_array_equal(
        data.augment(x, [op], np.random.default_rng(0)), x,
    )


def test_augmentations():
    """Test properties of the single augmentations."""
    rng = np.random.default_rng(3)
    x = rng.random((3, 16, 16))

    flip = transforms.HFlip(p=1)
    np.testing.assert_array_equal(data.augment(x, [flip], rng), x[:, :, ::-1])
    np.testing.assert_array_equal(data.augment(x, [flip, flip], rng), x)

    ones = np.ones((3, 16, 16))
    np.testing.assert_allclose(
        data.augment(ones, [transforms.Crop(pad=4)], rng), ones,
    )
    rotated = data.augment(ones, [transforms.Rotation(max_deg=30)], rng)
    np.testing.assert_allclose(rotated[:, 6:10, 6:10], 1)

    erased = data.augment(ones, [transforms.Erasing(p=1)], rng)
    fraction = 1 - erased.mean()
    assert 0.01 <= fraction <= 0.25

    brighter = data.augment(x, [transforms.Brightness(p=1)], rng)
    assert brighter.min() >= 0 and brighter.max() <= 1

    tensor = data.augment(Tensor(x), [flip], rng)
    assert isinstance(tensor, Tensor)


def test_preprocess_config():
    """Test the config validation and its dictionary form."""
    cfg = data.PreprocessConfig()
    assert data.PreprocessConfig.from_dict(cfg.to_dict()) == cfg
    assert [aug.name for aug in cfg.augmentations] == [
        'hflip', 'rotation', 'crop', 'erasing',
    ]

    for kwargs in (
        {'target_size': 32},
        {'normalize_std': (0.5, 0, 0.5)},
        {'normalize_mean': (0.5,)},
        {'augmentations': ('hflip',)},
    ):
        with pytest.raises(ConfigError):
            data.PreprocessConfig(**kwargs)
    with pytest.raises(ConfigError):
        data.PreprocessConfig.from_dict({'augmentations': [{'name': 'zoom'}]})
    with pytest.raises(ConfigError):
        data.PreprocessConfig.from_dict({'size': 64})


def test_batch_iter(dataset):
    """Test batch sizes, order and reproducibility."""
    manifest = data.scan_folders(dataset).subset(range(10))
    cfg = data.PreprocessConfig()
    batches = list(data.batch_iter(manifest, cfg, batch_size=4))
    assert [len(labels) for _, labels in batches] == [4, 4, 2]
    assert batches[0][0].shape == (4, 3, 64, 64)
    np.testing.assert_array_equal(
        np.concatenate([labels for _, labels in batches]), manifest.labels,
    )

    def run(workers):
        return list(data.batch_iter(
            manifest,
            cfg,
            batch_size=3,
            shuffle=True,
            seed=5,
            mode='train',
            workers=workers,
        ))

    single, threaded = run(1), run(3)
    for (x_single, y_single), (x_threaded, y_threaded) in zip(
        single, threaded,
    ):
        np.testing.assert_array_equal(x_single.numpy(), x_threaded.numpy())
        np.testing.assert_array_equal(y_single, y_threaded)

    with pytest.raises(ConfigError):
        next(data.batch_iter(manifest, cfg, batch_size=0))
    with pytest.raises(ManifestError):
        next(data.batch_iter(data.DatasetManifest(rows=()), cfg, 4))


def test_load_sample_cache(dataset):
    """Test that decoded images are cached by path."""
    path = os.path.join(dataset, '3_anger', 'img_01.png')
    cache = {}
    first = loader.load_sample(path, data.PreprocessConfig(), cache=cache)
    assert first.shape == (3, 64, 64)
    assert list(cache) == [path]
    np.testing.assert_array_equal(
        loader.load_sample(path, data.PreprocessConfig(), cache=cache), first,
    )
