# -*- coding: utf-8 -*-
# BSD 3-Clause License
# Copyright (c) 2024, ferhelper developers
# All rights reserved.
"""Export the softmax scores of a folder of images."""
import click

import ferhelper as fh
from ferhelper._cli import FerCommand, get_workers


@click.command(cls=FerCommand)
@click.option(
    '--ckpt',
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help='Checkpoint to classify with.',
)
@click.option(
    '--dir',
    'folder',
    required=True,
    type=click.Path(exists=True, file_okay=False),
    help='Folder which is searched recursively for images.',
)
@click.option(
    '--output',
    '-o',
    required=True,
    type=click.Path(dir_okay=False),
    help='Output CSV with one row of scores per image.',
)
@click.option(
    '--batch',
    type=click.IntRange(min=1),
    default=32,
    show_default=True,
    help='Number of images per forward pass.',
)
def score(ckpt, folder, output, batch):
    """Classify all images of a folder and write the scores as CSV."""
    checkpoint = fh.load_checkpoint(ckpt)
    records = fh.score_folder(
        checkpoint.model,
        folder,
        output=output,
        preprocess=checkpoint.preprocess,
        batch_size=batch,
        workers=get_workers(),
    )
    n_failed = sum(record.status != 'ok' for record in records)
    click.echo(f'scored {len(records) - n_failed} images, {n_failed} failed')


if __name__ == '__main__':
    score()  # pragma: no cover
