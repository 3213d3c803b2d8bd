# -*- coding: utf-8 -*-
# BSD 3-Clause License
# Copyright (c) 2024, ferhelper developers
# All rights reserved.
"""Print the number of trainable parameters of an architecture."""
import click

import ferhelper as fh
from ferhelper._cli import FerCommand
from ferhelper.models import ARCHITECTURES


@click.command(cls=FerCommand)
@click.option(
    '--arch',
    required=True,
    type=click.Choice(sorted(ARCHITECTURES)),
    help='Name of the architecture.',
)
def params(arch):
    """Print the trainable parameter count."""
    click.echo(fh.n_params(fh.build(arch)))


if __name__ == '__main__':
    params()  # pragma: no cover
