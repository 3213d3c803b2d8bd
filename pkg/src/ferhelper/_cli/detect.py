# -*- coding: utf-8 -*-
# BSD 3-Clause License
# Copyright (c) 2024, ferhelper developers
# All rights reserved.
"""Detect faces with a Haar cascade."""
import os

import click

import ferhelper as fh
from ferhelper._cli import FerCommand, get_workers
from ferhelper.data.imageio import decode_image, encode_image, to_grayscale
from ferhelper.detect import crop_faces
from ferhelper.detect.detector import (
    DEFAULT_MIN_NEIGHBORS,
    DEFAULT_SCALE_FACTOR,
)

DETECTION_COLUMNS = ('x', 'y', 'w', 'h', 'neighbors')


@click.command(cls=FerCommand)
@click.option(
    '--cascade',
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help='Cascade in the JSON format, see "convert-cascade".',
)
@click.option(
    '--image',
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help='Image to search.',
)
@click.option(
    '--output',
    '-o',
    required=True,
    type=click.Path(dir_okay=False),
    help='Output CSV with the columns "x,y,w,h,neighbors".',
)
@click.option(
    '--scale-factor',
    type=click.FloatRange(min=1, min_open=True),
    default=DEFAULT_SCALE_FACTOR,
    show_default=True,
    help='Ratio of consecutive window sizes.',
)
@click.option(
    '--min-neighbors',
    type=click.IntRange(min=0),
    default=DEFAULT_MIN_NEIGHBORS,
    show_default=True,
    help='Minimal number of merged windows per face.',
)
@click.option(
    '--min-size',
    type=click.IntRange(min=1),
    help='Minimal window edge length in pixels.',
)
@click.option(
    '--crops',
    type=click.Path(file_okay=False),
    help='Directory to store the cropped faces as PNG.',
)
@click.option(
    '--margin',
    type=click.FloatRange(min=0),
    default=0.0,
    show_default=True,
    help='Fraction of the box size added on every side of the crops.',
)
def detect(
    cascade,
    image,
    output,
    scale_factor,
    min_neighbors,
    min_size,
    crops,
    margin,
):
    """Write the bounding boxes of all detected faces as CSV."""
    grid = decode_image(image)
    detections = fh.detect_multiscale(
        fh.CascadeModel.from_json(cascade),
        to_grayscale(grid),
        scale_factor=scale_factor,
        min_neighbors=min_neighbors,
        min_size=min_size,
        workers=get_workers(),
    )
    fh.io.savecsv(
        output,
        fh.io.records_frame(
            [
                dict(zip(DETECTION_COLUMNS, (*det.box, det.neighbors)))
                for det in detections
            ],
            DETECTION_COLUMNS,
            int_columns=DETECTION_COLUMNS,
        ),
    )
    if crops is not None:
        os.makedirs(crops, exist_ok=True)
        for idx, crop in enumerate(crop_faces(grid, detections, margin)):
            encode_image(crop, os.path.join(crops, f'face_{idx:03d}.png'))
    click.echo(f'{len(detections)} faces')


if __name__ == '__main__':
    detect()  # pragma: no cover
