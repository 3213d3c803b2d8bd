# -*- coding: utf-8 -*-
# BSD 3-Clause License
# Copyright (c) 2024, ferhelper developers
# All rights reserved.
"""Hyperparameter grid search."""
import click

import ferhelper as fh
from ferhelper._cli import FerCommand, get_workers
from ferhelper.train.grid import GridSpec, grid_search, results_frame


@click.command(cls=FerCommand)
@click.option(
    '--space',
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help=(
        'JSON object mapping grid axes to lists of candidates, missing axes '
        'keep a single default value.'
    ),
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
    '--arch',
    default='gimefive15',
    show_default=True,
    help='GiMeFive architecture providing all fields which are no axes.',
)
@click.option(
    '--seed',
    type=click.INT,
    default=0,
    show_default=True,
    help='Seed shared by all runs.',
)
@click.option(
    '--max-runs',
    type=click.IntRange(min=1),
    help='Train only the first configurations.',
)
@click.option(
    '--max-epochs',
    type=click.IntRange(min=1),
    help='Skip configurations training for more epochs.',
)
@click.option(
    '--output',
    '-o',
    required=True,
    type=click.Path(dir_okay=False),
    help='Output CSV of the ranked configurations.',
)
def grid(
    space, train_file, valid_file, arch, seed, max_runs, max_epochs, output,
):
    """Train every grid configuration and rank by validation accuracy."""
    grid_spec = GridSpec.from_json(space)
    budget = None
    if max_epochs is not None:
        def budget(point):  # noqa: WPS430
            return point['epochs'] <= max_epochs

    results = grid_search(
        grid_spec,
        fh.DatasetManifest.from_csv(train_file, split='train'),
        fh.DatasetManifest.from_csv(valid_file, split='valid'),
        base_spec=arch,
        budget=budget,
        max_runs=max_runs,
        seed=seed,
        workers=get_workers(),
    )
    fh.io.savecsv(output, results_frame(results))
    best = results[0]
    click.echo(
        f'{len(results)} runs, best valid accuracy {best.valid_acc:.4f} '
        f'for {best.config}',
    )


if __name__ == '__main__':
    grid()  # pragma: no cover
