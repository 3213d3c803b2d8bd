# -*- coding: utf-8 -*-
# BSD 3-Clause License
# Copyright (c) 2024, ferhelper developers
# All rights reserved.
"""Create a dataset manifest from class folders."""
import click

import ferhelper as fh
from ferhelper._cli import FerCommand


@click.command(cls=FerCommand)
@click.argument(
    'root',
    type=click.Path(exists=True, file_okay=False),
)
@click.option(
    '--output',
    '-o',
    required=True,
    type=click.Path(dir_okay=False),
    help='Output CSV with the columns "path,label".',
)
def manifest(root, output):
    """Scan ROOT for folders named like "0_happiness" and list their images."""
    dataset = fh.scan_folders(root)
    dataset.to_csv(output)
    per_class = dataset.histogram().tolist()
    click.echo(f'{len(dataset)} images, per class: {per_class}')


if __name__ == '__main__':
    manifest()  # pragma: no cover
