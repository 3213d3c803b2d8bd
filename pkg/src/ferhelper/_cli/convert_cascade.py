# -*- coding: utf-8 -*-
# BSD 3-Clause License
# Copyright (c) 2024, ferhelper developers
# All rights reserved.
"""Convert an OpenCV Haar cascade to the JSON cascade format."""
import click

import ferhelper as fh
from ferhelper._cli import FerCommand


@click.command(cls=FerCommand)
@click.option(
    '--xml',
    'xml_file',
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help='Stump based HAAR cascade in the OpenCV XML layout.',
)
@click.option(
    '--output',
    '-o',
    required=True,
    type=click.Path(dir_okay=False),
    help='Output JSON cascade.',
)
def convert_cascade(xml_file, output):
    """Import an OpenCV cascade, see docs/cascade_format.md."""
    cascade = fh.CascadeModel.from_opencv_xml(xml_file)
    cascade.to_json(output)
    click.echo(
        f'{len(cascade.stages)} stages with {cascade.n_weak_classifiers} '
        'weak classifiers',
    )


if __name__ == '__main__':
    convert_cascade()  # pragma: no cover
