# -*- coding: utf-8 -*-
# BSD 3-Clause License
# Copyright (c) 2024, ferhelper developers
# All rights reserved.
"""Stratified train, test and valid split of a manifest."""
import os

import click

import ferhelper as fh
from ferhelper._cli import FerCommand


@click.command(cls=FerCommand)
@click.option(
    '--manifest',
    '-m',
    'manifest_file',
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help='Manifest CSV to split.',
)
@click.option(
    '--fractions',
    nargs=3,
    type=click.FloatRange(min=0, max=1),
    default=(0.8, 0.1, 0.1),
    show_default=True,
    help='Fractions of the train, test and valid split.',
)
@click.option(
    '--seed',
    type=click.INT,
    default=0,
    show_default=True,
    help='Seed of the per-class permutation.',
)
@click.option(
    '--output',
    '-o',
    required=True,
    type=click.Path(file_okay=False),
    help='Output directory of "train.csv", "test.csv" and "valid.csv".',
)
def split(manifest_file, fractions, seed, output):
    """Split a manifest into train, test and valid manifests."""
    dataset = fh.DatasetManifest.from_csv(manifest_file)
    os.makedirs(output, exist_ok=True)
    splits = dataset.split_by(fractions=fractions, seed=seed)
    for name, subset in splits.items():
        subset.to_csv(os.path.join(output, f'{name}.csv'))
        click.echo(f'{name}: {len(subset)} images')


if __name__ == '__main__':
    split()  # pragma: no cover
