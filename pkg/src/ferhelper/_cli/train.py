# -*- coding: utf-8 -*-
# BSD 3-Clause License
# Copyright (c) 2024, ferhelper developers
# All rights reserved.
"""Train a model and store the best checkpoint."""
import click
import prettypyplot as pplt
from matplotlib import pyplot as plt

import ferhelper as fh
from ferhelper._cli import FerCommand, get_workers
from ferhelper.models import ARCHITECTURES
from ferhelper.train.optim import OPTIMIZERS


@click.command(cls=FerCommand)
@click.option(
    '--arch',
    required=True,
    type=click.Choice(sorted(ARCHITECTURES)),
    help='Architecture to train.',
)
@click.option(
    '--train',
    'train_file',
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help='Manifest CSV of the training set.',
)
@click.option(
    '--valid',
    'valid_file',
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help='Manifest CSV of the validation set.',
)
@click.option(
    '--lr',
    type=click.FloatRange(min=0, min_open=True),
    default=1e-3,
    show_default=True,
    help='Learning rate.',
)
@click.option(
    '--batch',
    type=click.IntRange(min=1),
    default=32,
    show_default=True,
    help='Batch size.',
)
@click.option(
    '--epochs',
    type=click.IntRange(min=1),
    default=10,
    show_default=True,
    help='Maximal number of epochs.',
)
@click.option(
    '--seed',
    type=click.INT,
    default=0,
    show_default=True,
    help='Seed of initialization, shuffling, augmentation and dropout.',
)
@click.option(
    '--early-stop/--no-early-stop',
    default=False,
    show_default=True,
    help='Stop if the validation accuracy stops improving.',
)
@click.option(
    '--patience',
    type=click.IntRange(min=1),
    default=5,
    show_default=True,
    help='Tolerated epochs without improvement.',
)
@click.option(
    '--optimizer',
    type=click.Choice(OPTIMIZERS, case_sensitive=False),
    default='sgd',
    show_default=True,
    help='Optimizer.',
)
@click.option(
    '--momentum',
    type=click.FloatRange(min=0, max=1, max_open=True),
    default=0.9,
    show_default=True,
    help='Momentum of SGD.',
)
@click.option(
    '--weight-decay',
    type=click.FloatRange(min=0),
    default=1e-4,
    show_default=True,
    help='L2 penalty.',
)
@click.option(
    '--output',
    '-o',
    required=True,
    type=click.Path(dir_okay=False),
    help='Output checkpoint file.',
)
@click.option(
    '--log',
    type=click.Path(dir_okay=False),
    help='Output CSV of the per epoch metrics.',
)
@click.option(
    '--figure',
    type=click.Path(dir_okay=False),
    help=(
        'Output figure of the training curves. Needs to have a valid '
        'extension (".pdf", ".svg", ".png").'
    ),
)
@click.option(
    '--cache-images',
    is_flag=True,
    help='Keep all decoded images in memory between epochs.',
)
def train(
    arch,
    train_file,
    valid_file,
    lr,
    batch,
    epochs,
    seed,
    early_stop,
    patience,
    optimizer,
    momentum,
    weight_decay,
    output,
    log,
    figure,
    cache_images,
):
    """Train with cross-entropy and keep the best validation state."""
    cfg = fh.TrainConfig(
        learning_rate=lr,
        momentum=momentum,
        weight_decay=weight_decay,
        batch_size=batch,
        epochs=epochs,
        early_stopping=early_stop,
        patience=patience,
        seed=seed,
        optimizer=optimizer.lower(),
    )
    spec = fh.get_spec(arch).replace(seed=seed)
    model = fh.build(spec)
    preprocess = fh.PreprocessConfig()
    result = fh.train(
        model,
        fh.DatasetManifest.from_csv(train_file, split='train'),
        fh.DatasetManifest.from_csv(valid_file, split='valid'),
        cfg,
        preprocess=preprocess,
        workers=get_workers(),
        cache_images=cache_images,
    )
    fh.save_checkpoint(
        result.model,
        output,
        preprocess=preprocess,
        epoch=result.best_epoch,
        metrics=result.metric_records(),
    )
    if log is not None:
        result.write_metric_log(log)
    if figure is not None:
        pplt.use_style(figsize=2.6, latex=False, true_black=True)
        fh.plot.plot_metric_log(result.metrics)
        pplt.savefig(figure)
        plt.close('all')
    click.echo(
        f'best valid accuracy {result.best_valid_acc:.4f} in epoch '
        f'{result.best_epoch}, stopped after epoch {result.stop_epoch}',
    )


if __name__ == '__main__':
    train()  # pragma: no cover
