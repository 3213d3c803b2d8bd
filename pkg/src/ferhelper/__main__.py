# -*- coding: utf-8 -*-
# BSD 3-Clause License
# Copyright (c) 2024, ferhelper developers
# All rights reserved.
"""CLI of ferhelper.

Containing some command line interfaces to access basic functionality directly.

"""
import json
import logging

import click

import ferhelper as fh
from ferhelper._cli import FerGroup
from ferhelper._cli.annotate import annotate
from ferhelper._cli.convert_cascade import convert_cascade
from ferhelper._cli.detect import detect
from ferhelper._cli.evaluate import evaluate
from ferhelper._cli.explain import explain
from ferhelper._cli.grid import grid
from ferhelper._cli.manifest import manifest
from ferhelper._cli.params import params
from ferhelper._cli.score import score
from ferhelper._cli.split import split
from ferhelper._cli.train import train

HELP_STR = f"""ferhelper v{fh.__version__}

Recognize facial emotions in images and videos with small convolutional
networks, explain their decisions with Grad-CAM and locate faces with Haar
cascades.

Copyright (c) 2024, ferhelper developers
"""


def _read_config(ctx, param, value):
    if value is None:
        return value
    try:
        with open(value, encoding='utf-8') as config_file:
            config = json.load(config_file)
    except json.JSONDecodeError as err:
        raise click.BadParameter(f'invalid JSON: {err}') from err
    if not isinstance(config, dict):
        raise click.BadParameter('needs to hold a JSON object.')
    ctx.default_map = {**(ctx.default_map or {}), **config}
    return value


@click.group(cls=FerGroup, help=HELP_STR)
@click.option(
    '--config',
    type=click.Path(exists=True, dir_okay=False),
    is_eager=True,
    expose_value=False,
    callback=_read_config,
    help=(
        'JSON file with default values, one object per subcommand, e.g. '
        '{"train": {"lr": 0.01}}. Flags override file values.'
    ),
)
@click.option(
    '--workers',
    type=click.IntRange(min=1),
    default=1,
    show_default=True,
    envvar='GMF_WORKERS',
    help='Number of parallel workers used by the subcommands.',
)
@click.option(
    '--verbose',
    '-v',
    count=True,
    help='Report progress, repeat for debug output.',
)
@click.pass_context
def main(ctx, workers, verbose):
    """Group holding all subcommands."""
    level = (logging.WARNING, logging.INFO)[min(verbose, 1)]
    if verbose > 1:
        level = logging.DEBUG
    logging.basicConfig(
        level=level, format='%(levelname)s %(name)s: %(message)s',
    )
    ctx.obj = {'workers': workers}


main.add_command(manifest)
main.add_command(split)
main.add_command(train)
main.add_command(grid)
main.add_command(evaluate)
main.add_command(score)
main.add_command(explain)
main.add_command(detect)
main.add_command(annotate)
main.add_command(params)
main.add_command(convert_cascade)


if __name__ == '__main__':
    main()  # pragma: no cover
