# -*- coding: utf-8 -*-
# BSD 3-Clause License
# Copyright (c) 2024, ferhelper developers
# All rights reserved.
"""Evaluate a checkpoint on a labeled manifest."""
import click
import prettypyplot as pplt
from matplotlib import pyplot as plt

import ferhelper as fh
from ferhelper._cli import FerCommand, get_workers
from ferhelper.data.labels import CLASS_NAMES
from ferhelper.evaluate import render_confusion_heatmap


@click.command('eval', cls=FerCommand)
@click.option(
    '--ckpt',
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help='Checkpoint to evaluate.',
)
@click.option(
    '--data',
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help='Manifest CSV of the test set.',
)
@click.option(
    '--heatmap',
    type=click.Path(dir_okay=False),
    help='Output image (".png", ".ppm") of the gray confusion heatmap.',
)
@click.option(
    '--figure',
    type=click.Path(dir_okay=False),
    help=(
        'Output figure of the row-normalized confusion matrix. Needs to '
        'have a valid extension (".pdf", ".svg", ".png").'
    ),
)
@click.option(
    '--batch',
    type=click.IntRange(min=1),
    default=32,
    show_default=True,
    help='Number of images per forward pass.',
)
def evaluate(ckpt, data, heatmap, figure, batch):
    """Report the accuracy and confusion matrix of a checkpoint."""
    checkpoint = fh.load_checkpoint(ckpt)
    accuracy, cm = fh.evaluate(
        checkpoint.model,
        fh.DatasetManifest.from_csv(data, split='test'),
        preprocess=checkpoint.preprocess,
        batch_size=batch,
        workers=get_workers(),
    )
    click.echo(f'accuracy {accuracy:.4f} ({cm.total} images)')
    for name, class_acc in zip(CLASS_NAMES, cm.per_class_accuracy):
        click.echo(f'  {name:<10} {class_acc:.4f}')

    if heatmap is not None:
        render_confusion_heatmap(cm, heatmap)
    if figure is not None:
        pplt.use_style(figsize=2.6, latex=False, true_black=True)
        _, ax = plt.subplots()
        fh.plot.plot_confusion_matrix(cm, ax=ax)
        pplt.savefig(figure)
        plt.close('all')


if __name__ == '__main__':
    evaluate()  # pragma: no cover
