# -*- coding: utf-8 -*-
"""Tests for the cli script.

BSD 3-Clause License
Copyright (c) 2024, ferhelper developers
All rights reserved.

"""
import json
import os

import numpy as np
import pytest
from click.testing import CliRunner

import ferhelper as fh
from ferhelper.__main__ import main
from ferhelper.data.imageio import decode_image, encode_image
from ferhelper.data.loader import load_sample
from ferhelper.tensor import Tensor

SUBCOMMANDS = (
    'manifest',
    'split',
    'train',
    'grid',
    'evaluate',
    'score',
    'explain',
    'detect',
    'annotate',
    'params',
    'convert-cascade',
)


@pytest.fixture
def runner():
    """Create a click runner."""
    return CliRunner()


@pytest.fixture
def checkpoint(tmp_path):
    """Store an untrained single block model."""
    file_name = str(tmp_path / 'model.gmf5')
    fh.save_checkpoint(
        fh.build(fh.ModelSpec(conv_blocks=1, fc_layers=1)),
        file_name,
        preprocess=fh.PreprocessConfig(),
    )
    return file_name


@pytest.fixture
def manifest_file(dataset, tmp_path, runner):
    """Create the manifest of the fixture dataset with the CLI."""
    file_name = str(tmp_path / 'manifest.csv')
    result = runner.invoke(main, ['manifest', dataset, '-o', file_name])
    assert result.exit_code == 0
    assert '18 images, per class: [3, 3, 3, 3, 3, 3]' in result.output
    return file_name


def test_main(runner):
    """Test the help of the group."""
    result = runner.invoke(main)
    assert result.exit_code == 1
    assert 'Usage:' in result.output

    result = runner.invoke(main, ['--help'])
    assert result.exit_code == 0
    assert '--config' in result.output
    for subcommand in SUBCOMMANDS:
        assert subcommand in result.output


@pytest.mark.parametrize('subcommand', SUBCOMMANDS)
def test_submodules(runner, subcommand):
    """Test that subcommands without arguments show their help."""
    result = runner.invoke(main, [subcommand])
    assert result.exit_code == 1
    assert '--help' in result.output
    assert 'Usage:' in result.output


def test_usage_errors(runner, tmp_path):
    """Test invalid arguments."""
    result = runner.invoke(main, ['params', '--arch', 'gimefive99'])
    assert result.exit_code == 1
    result = runner.invoke(main, ['unknown'])
    assert result.exit_code == 1
    result = runner.invoke(main, ['--workers', '0', 'params'])
    assert result.exit_code == 1


@pytest.mark.parametrize('arch, n_params', [
    ('gimefive15', 10478086),
    ('baseline13', 2606086),
])
def test_params(runner, arch, n_params):
    """Test the parameter count."""
    result = runner.invoke(main, ['params', '--arch', arch])
    assert result.exit_code == 0
    assert result.output.strip() == str(n_params)


def test_config(runner, tmp_path):
    """Test default values from a JSON file."""
    config = tmp_path / 'config.json'
    config.write_text(json.dumps({'params': {'arch': 'gimefive13'}}))
    result = runner.invoke(main, ['--config', str(config), 'params'])
    assert result.exit_code == 0
    assert result.output.strip() == '2606086'

    # flags override the file
    result = runner.invoke(
        main, ['--config', str(config), 'params', '--arch', 'gimefive15'],
    )
    assert result.output.strip() == '10478086'

    config.write_text('{"params": ')
    result = runner.invoke(main, ['--config', str(config), 'params'])
    assert result.exit_code == 1
    config.write_text('[1, 2]')
    result = runner.invoke(main, ['--config', str(config), 'params'])
    assert result.exit_code == 1


def test_split(runner, manifest_file, tmp_path):
    """Test writing the three splits."""
    output = str(tmp_path / 'splits')
    result = runner.invoke(main, [
        'split',
        '-m',
        manifest_file,
        '--fractions',
        '0.4',
        '0.3',
        '0.3',
        '-o',
        output,
    ])
    assert result.exit_code == 0
    sizes = [
        len(fh.DatasetManifest.from_csv(os.path.join(output, f'{name}.csv')))
        for name in ('train', 'test', 'valid')
    ]
    assert sizes == [6, 6, 6]


def test_runtime_errors(runner, manifest_file, tmp_path):
    """Test that failing commands exit with code 2."""
    broken = tmp_path / 'broken.gmf5'
    broken.write_bytes(b'not a checkpoint')
    result = runner.invoke(
        main, ['evaluate', '--ckpt', str(broken), '--data', manifest_file],
    )
    assert result.exit_code == 2
    assert 'Error:' in result.output

    empty = tmp_path / 'empty'
    empty.mkdir()
    result = runner.invoke(
        main, ['manifest', str(empty), '-o', str(tmp_path / 'm.csv')],
    )
    assert result.exit_code == 2


def test_evaluate_and_score(
    runner, checkpoint, manifest_file, dataset, tmp_path,
):
    """Test reporting accuracies and exporting scores."""
    heatmap = str(tmp_path / 'cm.png')
    result = runner.invoke(main, [
        'evaluate',
        '--ckpt',
        checkpoint,
        '--data',
        manifest_file,
        '--heatmap',
        heatmap,
    ])
    assert result.exit_code == 0
    assert '(18 images)' in result.output
    assert 'happiness' in result.output
    assert decode_image(heatmap).shape == (192, 192, 3)

    scores = str(tmp_path / 'scores.csv')
    result = runner.invoke(main, [
        '--workers',
        '2',
        'score',
        '--ckpt',
        checkpoint,
        '--dir',
        dataset,
        '-o',
        scores,
    ])
    assert result.exit_code == 0
    assert 'scored 18 images, 0 failed' in result.output
    assert len(fh.io.opencsv(scores)) == 18


def test_explain(runner, checkpoint, dataset, tmp_path):
    """Test Grad-CAM and activation overlays."""
    image = os.path.join(dataset, '4_disgust', 'img_00.png')
    output = str(tmp_path / 'cam.png')
    result = runner.invoke(main, [
        'explain',
        '--ckpt',
        checkpoint,
        '--image',
        image,
        '--class',
        'disgust',
        '--size',
        '32',
        '-o',
        output,
    ])
    assert result.exit_code == 0
    assert 'explained class disgust' in result.output
    assert decode_image(output).shape == (32, 32, 3)

    args = ['explain', '--ckpt', checkpoint, '--image', image, '-o', output]
    result = runner.invoke(main, [*args, '--stage', 'conv1', '--triptych'])
    assert result.exit_code == 0
    assert decode_image(output).shape[1] > 3 * 64
    model = fh.load_checkpoint(checkpoint).model
    sample = load_sample(image, fh.PreprocessConfig())
    _, labels = model.predict(Tensor(sample[np.newaxis]))
    predicted = fh.data.to_label(int(labels[0])).label
    assert f'activation of conv1, predicted class {predicted}' in (
        result.output
    )

    result = runner.invoke(main, [*args, '--stage', 'conv9'])
    assert result.exit_code == 1
    result = runner.invoke(main, [*args, '--class', 'joy'])
    assert result.exit_code == 1


def test_detect(runner, empty_cascade, tmp_path):
    """Test listing and cropping all windows of a cascade without stages."""
    image = str(tmp_path / 'image.png')
    encode_image(np.full((32, 32), 128), image)
    output = str(tmp_path / 'faces.csv')
    crops = str(tmp_path / 'crops')
    result = runner.invoke(main, [
        '--workers',
        '2',
        'detect',
        '--cascade',
        empty_cascade,
        '--image',
        image,
        '--min-neighbors',
        '0',
        '--crops',
        crops,
        '-o',
        output,
    ])
    assert result.exit_code == 0
    assert '150 faces' in result.output
    table = fh.io.opencsv(output)
    assert tuple(table.columns) == ('x', 'y', 'w', 'h', 'neighbors')
    assert len(table) == 150
    assert len(os.listdir(crops)) == 150


def test_convert_cascade(runner, opencv_xml, tmp_path):
    """Test importing OpenCV cascades."""
    output = str(tmp_path / 'cascade.json')
    result = runner.invoke(
        main, ['convert-cascade', '--xml', opencv_xml(), '-o', output],
    )
    assert result.exit_code == 0
    assert '1 stages with 2 weak classifiers' in result.output
    assert fh.CascadeModel.from_json(output).window_size == 24

    result = runner.invoke(
        main,
        ['convert-cascade', '--xml', opencv_xml(tilted=True), '-o', output],
    )
    assert result.exit_code == 2


def test_annotate(runner, checkpoint, empty_cascade, tmp_path):
    """Test annotating frames without faces."""
    frames = tmp_path / 'frames'
    for idx in range(2):
        encode_image(np.full((20, 20), 50 * idx), str(frames / f'{idx}.png'))
    output = str(tmp_path / 'annotated')
    result = runner.invoke(main, [
        'annotate',
        '--ckpt',
        checkpoint,
        '--cascade',
        empty_cascade,
        '--frames',
        str(frames),
        '-o',
        output,
    ])
    assert result.exit_code == 0
    assert "2 frames, 0 faces, {'no_face': 2}" in result.output
    assert sorted(os.listdir(output)) == [
        '0_annotated.png', '1_annotated.png', 'frames.csv',
    ]


def test_grid(runner, manifest_file, tmp_path):
    """Test ranking a single configuration."""
    space = tmp_path / 'space.json'
    space.write_text(json.dumps({
        'conv_blocks': [1],
        'fc_layers': [1],
        'epochs': [1, 2],
        'batch_size': [9],
    }))
    output = str(tmp_path / 'grid.csv')
    result = runner.invoke(main, [
        'grid',
        '--space',
        str(space),
        '--train',
        manifest_file,
        '--valid',
        manifest_file,
        '--max-epochs',
        '1',
        '-o',
        output,
    ])
    assert result.exit_code == 0
    assert '1 runs, best valid accuracy' in result.output
    assert len(fh.io.opencsv(output)) == 1


@pytest.mark.slow
def test_train(runner, manifest_file, tmp_path):
    """Test a single training epoch of the smallest architecture."""
    output = str(tmp_path / 'model.gmf5')
    log = str(tmp_path / 'metrics.csv')
    result = runner.invoke(main, [
        'train',
        '--arch',
        'gimefive13',
        '--train',
        manifest_file,
        '--valid',
        manifest_file,
        '--epochs',
        '1',
        '--batch',
        '9',
        '--log',
        log,
        '--cache-images',
        '-o',
        output,
    ])
    assert result.exit_code == 0
    assert 'in epoch 1, stopped after epoch 1' in result.output
    checkpoint = fh.load_checkpoint(output)
    assert checkpoint.model.spec.conv_blocks == 4
    assert len(fh.io.opencsv(log)) == 1
